#include <algorithm>
#include <set>

#include "bpcite/api.hpp"
#include "bpcite/errors.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with Eigen parameter names.
#include <httplib.h>
#include <spdlog/spdlog.h>

namespace bpcite {

namespace {

struct HttpError : Error {
  HttpError(int status, const std::string& message) : Error(message), status(status) {}
  int status;
};

constexpr std::size_t kHistogramBins = 10;
constexpr std::size_t kKeywords = 10;

void allow_only(const QueryParams& params, std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : params)
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw HttpError(400, "unknown query parameter '" + key + "'");
}

// Filter fields of a query; empty values mean "not set".
TimelineFilter filter_from(const QueryParams& params) {
  QueryParams fields;
  for (const char* key : {"kinds", "rapporteur", "doc_type", "tc"})
    if (auto it = params.find(key); it != params.end() && !it->second.empty()) fields.insert(*it);
  return TimelineFilter::parse(fields);
}

nlohmann::json filter_json(const TimelineFilter& f) {
  auto kinds = nlohmann::json::array();
  for (auto k : f.kinds) kinds.push_back(to_string(k));
  return {{"kinds", kinds},
          {"rapporteur", f.rapporteur ? nlohmann::json(*f.rapporteur) : nlohmann::json(nullptr)},
          {"doc_type", f.doc_type ? nlohmann::json(*f.doc_type) : nlohmann::json(nullptr)},
          {"tc", f.t_c}};
}

long parse_int(const QueryParams& params, const std::string& key, std::optional<long> fallback) {
  auto it = params.find(key);
  if (it == params.end() || it->second.empty()) {
    if (fallback) return *fallback;
    throw HttpError(400, "missing query parameter '" + key + "'");
  }
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size()) throw HttpError(400, "query parameter '" + key + "' must be an integer");
  return v;
}

nlohmann::json spans_json(std::span<const Span> spans) {
  auto out = nlohmann::json::array();
  for (const auto& s : spans) out.push_back({{"begin", s.begin}, {"end", s.end}});
  return out;
}

nlohmann::json with_schema(nlohmann::json j) {
  j["schema"] = Api::kSchema;
  return j;
}

}  // namespace

Api::Api(Corpus corpus, ModelArtifact model, std::vector<CitationRecord> records, LimeConfig lime)
    : corpus_(std::move(corpus)), model_(std::move(model)), records_(std::move(records)), lime_config_(lime) {
  for (std::size_t i = 0; i < corpus_.documents.size(); ++i) doc_index_.emplace(corpus_.documents[i].id, i);
  for (const auto& bp : corpus_.precedents) statement_latents_.emplace(bp.id, model_.pipeline.latent(bp.statement));
  for (const auto& r : records_)
    if (!doc_index_.count(r.doc_id)) throw DataError("citation index references unknown document " + r.doc_id);
}

namespace {

Api load_api(const ProjectStore& store) {
  StoreLock lock(store.root(), StoreLock::Mode::Shared);
  if (!store.has_corpus()) throw ConfigError("store has no corpus; run `engine ingest` first");
  if (!store.has_model()) throw ConfigError("store has no model; run `engine train` first");
  if (!store.has_citations()) throw ConfigError("store has no citation index; run `engine infer` first");
  auto model = store.load_model();
  const auto corpus_fp = store.corpus_fingerprint();
  if (model.metadata.value("corpus_fingerprint", "") != corpus_fp)
    throw ConfigError("model was trained on a different corpus version; re-run `engine train`");
  const auto meta = store.load_citations_meta();
  if (meta.value("model_fingerprint", "") != store.model_fingerprint() ||
      meta.value("corpus_fingerprint", "") != corpus_fp)
    throw ConfigError("citation index was built from different artifacts; re-run `engine infer`");
  LimeConfig lime;
  lime.seed = model.metadata.value("seed", std::uint64_t{0});
  return Api(store.load_corpus(), std::move(model), store.load_citations(), lime);
}

}  // namespace

Api::Api(const ProjectStore& store) : Api(load_api(store)) {}

const Document& Api::find_document(const std::string& id) const {
  auto it = doc_index_.find(id);
  if (it == doc_index_.end()) throw HttpError(404, "unknown document '" + id + "'");
  return corpus_.documents[it->second];
}

const BindingPrecedent& Api::find_precedent(BpId bp) const {
  for (const auto& p : corpus_.precedents)
    if (p.id == bp) return p;
  throw HttpError(404, "unknown binding precedent " + std::to_string(bp));
}

const Eigen::VectorXd& Api::statement_latent(BpId bp) const {
  auto it = statement_latents_.find(bp);
  if (it == statement_latents_.end()) throw HttpError(404, "unknown binding precedent " + std::to_string(bp));
  return it->second;
}

Explanation Api::lime(const Document& doc, BpId bp) const {
  {
    std::lock_guard guard(lime_mutex_);
    if (auto it = lime_cache_.find({doc.id, bp}); it != lime_cache_.end()) return it->second;
  }
  auto e = explain(model_.pipeline, model_.classifier, doc, bp, lime_config_);
  std::lock_guard guard(lime_mutex_);
  return lime_cache_.emplace(std::make_pair(doc.id, bp), std::move(e)).first->second;
}

nlohmann::json Api::health() const {
  return with_schema({{"status", "ok"},
                      {"documents", corpus_.documents.size()},
                      {"citations", records_.size()},
                      {"classes", model_.classifier.classes()},
                      {"embedding_fingerprint", model_.pipeline.fingerprint()}});
}

nlohmann::json Api::bps() const {
  const auto& classes = model_.classifier.classes();
  auto list = nlohmann::json::array();
  for (const auto& p : corpus_.precedents)
    list.push_back({{"id", p.id},
                    {"statement", p.statement},
                    {"published", p.published ? nlohmann::json(p.published->iso()) : nlohmann::json(nullptr)},
                    {"classifier_class", std::binary_search(classes.begin(), classes.end(), p.id)}});
  return with_schema({{"bps", list}});
}

nlohmann::json Api::filters() const {
  std::set<std::string> rapporteurs, types;
  for (const auto& d : corpus_.documents) {
    rapporteurs.insert(d.rapporteur);
    types.insert(d.doc_type);
  }
  return with_schema({{"rapporteurs", rapporteurs}, {"doc_types", types}, {"kinds", {"explicit", "potential"}}});
}

nlohmann::json Api::timeline(const QueryParams& params) const {
  allow_only(params, {"kinds", "rapporteur", "doc_type", "tc"});
  const auto filter = filter_from(params);
  auto bins = nlohmann::json::array();
  for (const auto& b : timeline_bins(records_, corpus_.documents, filter))
    bins.push_back({{"bp", b.bp},
                    {"month", b.month.str()},
                    {"total", b.total},
                    {"explicit", b.explicit_count},
                    {"potential", b.potential}});
  return with_schema({{"filters", filter_json(filter)}, {"bins", bins}});
}

nlohmann::json Api::bar(const QueryParams& params) const {
  allow_only(params, {"bp", "month", "clusters", "kinds", "rapporteur", "doc_type", "tc"});
  const auto bp = static_cast<BpId>(parse_int(params, "bp", std::nullopt));
  const auto& latent = statement_latent(bp);
  const auto month_it = params.find("month");
  if (month_it == params.end()) throw HttpError(400, "missing query parameter 'month'");
  const auto month = YearMonth::parse(month_it->second);
  if (!month) throw HttpError(400, "month must be YYYY-MM");
  const long k = parse_int(params, "clusters", 1);
  if (k < 1) throw HttpError(400, "clusters must be at least 1");
  const auto filter = filter_from(params);

  struct Entry {
    const Document* doc;
    const CitationRecord* record;
    std::vector<ParagraphSimilarity> sims;
    double score;
  };
  std::vector<Entry> entries;
  for (const auto& r : records_) {
    if (r.bp != bp || r.month != month) continue;
    const auto& doc = find_document(r.doc_id);
    if (!filter.accepts(r, doc)) continue;
    auto sims = paragraph_similarities(model_.pipeline, doc, latent, segment(doc.body));
    const double score = sims.empty() ? 0.0 : document_score(sims);
    entries.push_back({&doc, &r, std::move(sims), score});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.doc->id < b.doc->id; });

  nlohmann::json out = {{"bp", bp}, {"month", month->str()}, {"clusters_requested", k}, {"filters", filter_json(filter)}};
  auto clusters = nlohmann::json::array();
  if (!entries.empty()) {
    if (static_cast<std::size_t>(k) > entries.size())
      throw HttpError(400, "clusters exceeds the number of documents (" + std::to_string(entries.size()) + ")");
    std::vector<std::string> bodies;
    for (const auto& e : entries) bodies.push_back(e.doc->body);
    NmfOptions nmf;
    nmf.iterations = 300;
    nmf.seed = model_.metadata.value("seed", std::uint64_t{0});
    Clustering clustering;
    try {
      clustering = cluster_documents(model_.pipeline, bodies, static_cast<std::size_t>(k), nmf, kKeywords);
    } catch (const Error& e) {
      throw HttpError(400, std::string("cannot cluster this selection: ") + e.what());
    }

    // Most frequent surface form per stem, for display.
    std::map<std::string, std::map<std::string, std::size_t>> surfaces;
    const auto& normalizer = model_.pipeline.normalizer();
    for (const auto& body : bodies)
      for (const auto& tok : Normalizer::tokenize(body))
        if (auto term = normalizer.term(tok.lower); !term.empty()) ++surfaces[term][tok.lower];
    auto label_of = [&](const std::string& term) {
      const auto& forms = surfaces[term];
      std::string best = term;
      std::size_t count = 0;
      for (const auto& [form, n] : forms)
        if (n > count) best = form, count = n;
      return best;
    };

    for (std::size_t t = 0; t < static_cast<std::size_t>(k); ++t) {
      std::vector<ScoredDocument> scored;
      std::map<std::string, const Entry*> by_id;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (clustering.assignment[i] != t) continue;
        scored.push_back({entries[i].doc->id, entries[i].score});
        by_id[entries[i].doc->id] = &entries[i];
      }
      std::vector<double> scores;
      auto docs = nlohmann::json::array();
      for (const auto& s : order_documents(scored)) {
        const Entry& e = *by_id.at(s.doc_id);
        scores.push_back(e.score);
        auto paragraphs = nlohmann::json::array();
        for (const auto& p : e.sims) paragraphs.push_back({{"length", p.paragraph_length}, {"similarity", p.similarity}});
        docs.push_back({{"doc_id", e.doc->id},
                        {"title", e.doc->title},
                        {"doc_type", e.doc->doc_type},
                        {"kind", to_string(e.record->kind)},
                        {"confidence", e.record->confidence},
                        {"document_score", e.score},
                        {"topic", t},
                        {"paragraphs", paragraphs}});
      }
      auto keywords = nlohmann::json::array();
      for (const auto& kw : clustering.keywords[t])
        keywords.push_back({{"term", kw.term}, {"label", label_of(kw.term)}, {"weight", kw.weight}});
      clusters.push_back({{"topic", t},
                          {"keywords", keywords},
                          {"histogram", similarity_histogram(scores, kHistogramBins)},
                          {"documents", docs}});
    }
  }
  out["clusters"] = clusters;
  return with_schema(out);
}

nlohmann::json Api::document(const QueryParams& params) const {
  allow_only(params, {"id", "bp"});
  const auto id_it = params.find("id");
  if (id_it == params.end() || id_it->second.empty()) throw HttpError(400, "missing query parameter 'id'");
  const auto& doc = find_document(id_it->second);

  const CitationRecord* record = nullptr;
  std::optional<BpId> bp;
  if (params.count("bp")) bp = static_cast<BpId>(parse_int(params, "bp", std::nullopt));
  for (const auto& r : records_) {
    if (r.doc_id != doc.id) continue;
    if (bp ? r.bp == *bp : (!record || r.kind == CitationKind::Potential)) record = &r;
  }
  if (!bp) bp = record ? record->bp : model_.classifier.predict(model_.pipeline.embed(doc.body));
  const auto& precedent = find_precedent(*bp);

  const auto seg = segment(doc.body);
  const auto sims = paragraph_similarities(model_.pipeline, doc, statement_latent(*bp), seg);
  auto paragraphs = nlohmann::json::array();
  for (std::size_t i = 0; i < seg.paragraphs.size(); ++i)
    paragraphs.push_back({{"begin", seg.paragraphs[i].begin},
                          {"end", seg.paragraphs[i].end},
                          {"length", sims[i].paragraph_length},
                          {"similarity", sims[i].similarity}});

  nlohmann::json out = {
      {"doc_id", doc.id},
      {"title", doc.title},
      {"date", doc.date ? nlohmann::json(doc.date->iso()) : nlohmann::json(nullptr)},
      {"rapporteur", doc.rapporteur},
      {"doc_type", doc.doc_type},
      {"explicit_bps", doc.explicit_bps},
      {"body", doc.body},
      {"bp", *bp},
      {"statement", precedent.statement},
      {"kind", record ? nlohmann::json(to_string(record->kind)) : nlohmann::json(nullptr)},
      {"confidence", record ? nlohmann::json(record->confidence) : nlohmann::json(nullptr)},
      {"paragraphs", paragraphs},
      {"sentences", spans_json(seg.sentences)},
      {"common_terms", spans_json(shared_term_spans(model_.pipeline.normalizer(), doc.body, precedent.statement))},
      {"document_score", sims.empty() ? 0.0 : document_score(sims)},
      {"lime", nullptr}};
  if (record && record->kind == CitationKind::Potential) {
    const auto e = lime(doc, *bp);
    out["lime"] = {{"weights", e.weights},
                   {"intercept", e.intercept},
                   {"r2", e.r2},
                   {"degenerate", e.degenerate},
                   {"n_samples", e.n_samples},
                   {"seed", e.seed}};
  }
  return with_schema(out);
}

ApiResponse Api::handle(std::string_view path, const QueryParams& params) const {
  try {
    nlohmann::json body;
    if (path == "/api/health") {
      allow_only(params, {});
      body = health();
    } else if (path == "/api/bps") {
      allow_only(params, {});
      body = bps();
    } else if (path == "/api/filters") {
      allow_only(params, {});
      body = filters();
    } else if (path == "/api/timeline") {
      body = timeline(params);
    } else if (path == "/api/bar") {
      body = bar(params);
    } else if (path == "/api/document") {
      body = document(params);
    } else {
      throw HttpError(404, "no route for " + std::string(path));
    }
    return {200, body.dump()};
  } catch (const HttpError& e) {
    return {e.status, with_schema({{"error", e.what()}}).dump()};
  } catch (const ConfigError& e) {
    return {400, with_schema({{"error", e.what()}}).dump()};
  } catch (const DataError& e) {
    return {400, with_schema({{"error", e.what()}}).dump()};
  } catch (const std::exception& e) {
    spdlog::error("request {} failed: {}", path, e.what());
    return {500, with_schema({{"error", "internal error"}}).dump()};
  }
}

HttpServer::HttpServer(const Api& api) : api_(api), server_(std::make_unique<httplib::Server>()) {
  server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [k, v] : req.params) params.emplace(k, v);
    auto r = api_.handle(req.path, params);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

std::pair<std::string, int> HttpServer::parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("bind address must be host:port");
  try {
    std::size_t used = 0;
    const int port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("port");
    return {bind.substr(0, colon), port};
  } catch (const std::exception&) {
    throw ConfigError("invalid port in bind address '" + bind + "'");
  }
}

int HttpServer::start(const std::string& bind) {
  const auto [host, port] = parse_bind(bind);
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw ConfigError("cannot bind " + bind);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& bind) {
  const auto [host, port] = parse_bind(bind);
  spdlog::info("serving on http://{}:{}", host, port);
  if (!server_->listen(host, port)) throw ConfigError("cannot bind " + bind);
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace bpcite
