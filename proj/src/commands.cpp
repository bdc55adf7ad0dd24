#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "bpcite/citation_engine.hpp"
#include "bpcite/commands.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

namespace fs = std::filesystem;

namespace {

struct LabeledRows {
  Eigen::MatrixXd x;
  std::vector<BpId> y;
};

LabeledRows embed_ids(const EmbeddingPipeline& pipeline, const std::vector<std::string>& ids,
                      const std::unordered_map<std::string, const Document*>& by_id) {
  std::vector<std::string> bodies;
  LabeledRows out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("split references unknown document " + id);
    if (!it->second->single_label()) throw DataError("split document " + id + " is not single-label");
    bodies.push_back(it->second->body);
    out.y.push_back(it->second->explicit_bps.front());
  }
  out.x = pipeline.embed_all(bodies);
  return out;
}

std::unordered_map<std::string, const Document*> index_documents(const std::vector<Document>& docs) {
  std::unordered_map<std::string, const Document*> out;
  for (const auto& d : docs) out.emplace(d.id, &d);
  return out;
}

nlohmann::json report_json(const LoadReport& report, std::size_t duplicates, std::size_t kept) {
  auto issues = nlohmann::json::array();
  for (const auto& i : report.issues)
    issues.push_back({{"file", fs::path(i.file).filename().string()},
                      {"line", i.line},
                      {"field", i.field},
                      {"message", i.message}});
  return {{"accepted", report.accepted}, {"duplicates_removed", duplicates}, {"kept", kept}, {"issues", issues}};
}

}  // namespace

IngestResult cmd_ingest(ProjectStore& store, const IngestOptions& options) {
  StoreLock lock(store.root(), StoreLock::Mode::Exclusive);
  IngestResult r;
  auto precedents = load_precedents(options.precedents, r.report);
  auto docs = load_documents(options.documents, precedents, r.report);
  for (const auto& issue : r.report.issues)
    spdlog::warn("{}:{}: rejected ({})", issue.file, issue.line, issue.message);
  r.loaded = docs.size();
  auto kept = dedupe(docs);
  r.kept = kept.size();
  r.duplicates = r.loaded - r.kept;
  std::sort(precedents.begin(), precedents.end(),
            [](const BindingPrecedent& a, const BindingPrecedent& b) { return a.id < b.id; });
  store.save_corpus(kept, precedents, report_json(r.report, r.duplicates, r.kept));
  r.fingerprint = store.manifest().value("corpus", "");
  if (options.strict && !r.report.clean())
    throw DataError(std::to_string(r.report.issues.size()) + " invalid input line(s) (strict mode)");
  return r;
}

TrainResult cmd_train(ProjectStore& store, const TrainConfig& config) {
  if (config.grid.empty()) throw ConfigError("hyperparameter grid is empty");
  StoreLock lock(store.root(), StoreLock::Mode::Exclusive);
  const auto corpus = store.load_corpus();
  TrainResult result;
  result.classes = most_cited(corpus.documents, config.classes);
  if (result.classes.size() < 2) throw DataError("training needs at least two cited precedents");

  std::map<BpId, std::size_t> sizes;
  for (const auto& d : corpus.documents)
    if (d.single_label()) ++sizes[d.explicit_bps.front()];
  result.per_class = config.per_class;
  if (result.per_class == 0) {
    result.per_class = sizes[result.classes.front()];
    for (BpId bp : result.classes) result.per_class = std::min(result.per_class, sizes[bp]);
  }

  const auto sample = build_sample(corpus.documents, result.classes, result.per_class, config.seed);
  const auto parts = split(sample, config.ratios, config.seed);
  const auto by_id = index_documents(sample);

  Normalizer normalizer(config.normalizer);
  auto patterns = config.patterns ? CitationPatterns::load(*config.patterns) : CitationPatterns::defaults();
  std::vector<std::string> train_bodies;
  for (const auto& id : parts.train) train_bodies.push_back(by_id.at(id)->body);
  spdlog::info("fitting embedding on {} training documents", train_bodies.size());
  auto pipeline = EmbeddingPipeline::fit(train_bodies, std::move(normalizer), std::move(patterns),
                                         {config.k, config.min_df, config.seed});

  const auto train = embed_ids(pipeline, parts.train, by_id);
  const auto val = embed_ids(pipeline, parts.validation, by_id);
  const auto test = embed_ids(pipeline, parts.test, by_id);

  TrainOptions options;
  options.seed = config.seed;
  auto grid = grid_search(train.x, train.y, val.x, val.y, config.grid, options, pipeline.fingerprint());
  result.reg_c = grid.reg_c;
  result.accuracy_by_c = grid.accuracy_by_c;
  result.validation = grid.report;
  result.test = evaluate(grid.classifier, test.x, test.y);

  std::optional<Date> latest;
  for (const auto& d : corpus.documents)
    if (d.date && (!latest || *d.date > *latest)) latest = d.date;

  nlohmann::json meta;
  meta["seed"] = config.seed;
  meta["date"] = latest ? nlohmann::json(latest->iso()) : nlohmann::json(nullptr);
  meta["corpus_fingerprint"] = store.corpus_fingerprint();
  meta["classes"] = result.classes;
  meta["per_class"] = result.per_class;
  meta["split"] = {{"train", parts.train}, {"validation", parts.validation}, {"test", parts.test}};
  auto trace = nlohmann::json::array();
  for (const auto& [c, acc] : result.accuracy_by_c) trace.push_back({{"C", c}, {"accuracy", acc}});
  meta["grid"] = trace;
  meta["reg_C"] = result.reg_c;
  meta["validation"] = result.validation.to_json();
  meta["test"] = result.test.to_json();

  store.save_model({std::move(pipeline), std::move(grid.classifier), std::move(meta)});
  result.model_fingerprint = store.model_fingerprint();
  return result;
}

InferResult cmd_infer(ProjectStore& store, double t_c) {
  InferenceConfig cfg;
  cfg.t_c = t_c;
  cfg.validate();
  StoreLock lock(store.root(), StoreLock::Mode::Exclusive);
  const auto corpus = store.load_corpus();
  const auto model = store.load_model();
  const auto& classes = model.classifier.classes();
  cfg.bp_scope = {classes.begin(), classes.end()};

  auto batch = batch_infer(model.pipeline, model.classifier, corpus.documents, cfg);
  const auto index = build_index(corpus.documents, batch.records, cfg.bp_scope);

  InferResult r;
  r.documents = corpus.documents.size();
  r.skipped = batch.errors.size();
  for (const auto& rec : index) {
    if (rec.kind == CitationKind::Explicit) {
      ++r.explicit_records;
    } else {
      ++r.potential_records;
      ++r.potential_by_bp[rec.bp];
    }
  }
  auto by_bp = nlohmann::json::object();
  for (const auto& [bp, n] : r.potential_by_bp) by_bp[std::to_string(bp)] = n;
  nlohmann::json meta = {{"format", "bpcite.citations/1"},
                         {"t_c", t_c},
                         {"model_fingerprint", store.model_fingerprint()},
                         {"corpus_fingerprint", store.corpus_fingerprint()},
                         {"explicit", r.explicit_records},
                         {"potential", r.potential_records},
                         {"potential_by_bp", by_bp},
                         {"skipped", r.skipped}};
  store.save_citations(index, meta);
  return r;
}

EvalResult cmd_eval(const ProjectStore& store) {
  StoreLock lock(store.root(), StoreLock::Mode::Shared);
  const auto corpus = store.load_corpus();
  const auto model = store.load_model();
  const auto by_id = index_documents(corpus.documents);
  const auto& split = model.metadata.at("split");
  EvalResult r;
  const auto val = embed_ids(model.pipeline, split.at("validation").get<std::vector<std::string>>(), by_id);
  const auto test = embed_ids(model.pipeline, split.at("test").get<std::vector<std::string>>(), by_id);
  r.validation = evaluate(model.classifier, val.x, val.y);
  r.test = evaluate(model.classifier, test.x, test.y);
  return r;
}

std::string explanation_key(const std::string& doc_id, BpId bp, const LimeConfig& cfg, const std::string& model_fp) {
  nlohmann::json j = {{"doc", doc_id},
                      {"bp", bp},
                      {"n_samples", cfg.n_samples},
                      {"ridge_lambda", cfg.ridge_lambda},
                      {"kernel_width", cfg.kernel_width ? nlohmann::json(*cfg.kernel_width) : nlohmann::json(nullptr)},
                      {"seed", cfg.seed},
                      {"model", model_fp}};
  std::string safe;
  for (char c : doc_id) safe.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return safe + "-" + std::to_string(bp) + "-" + text::fingerprint(j.dump());
}

ExplainResult cmd_explain(ProjectStore& store, const std::string& doc_id, std::optional<BpId> bp,
                          const LimeConfig& cfg) {
  cfg.validate();
  StoreLock lock(store.root(), StoreLock::Mode::Exclusive);
  const auto corpus = store.load_corpus();
  const auto it = std::find_if(corpus.documents.begin(), corpus.documents.end(),
                               [&](const Document& d) { return d.id == doc_id; });
  if (it == corpus.documents.end()) throw ConfigError("unknown document id '" + doc_id + "'");
  const auto model = store.load_model();

  if (!bp && store.has_citations()) {
    for (const auto& r : store.load_citations()) {
      if (r.doc_id != doc_id) continue;
      if (!bp || r.kind == CitationKind::Potential) bp = r.bp;
    }
  }
  if (!bp) bp = model.classifier.predict(model.pipeline.embed(it->body));

  ExplainResult out;
  out.file = store.explanation_path(explanation_key(doc_id, *bp, cfg, store.model_fingerprint()));
  if (fs::exists(out.file)) {
    out.explanation = Explanation::from_json(nlohmann::json::parse(read_file(out.file)));
    out.cached = true;
    return out;
  }
  out.explanation = explain(model.pipeline, model.classifier, *it, *bp, cfg);
  write_file_atomic(out.file, dump_json(out.explanation.to_json()));
  return out;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream ss;
  char line[160];
  std::snprintf(line, sizeof line, "accuracy %.4f  precision %.4f  recall %.4f  f1 %.4f  (n=%zu)\n", report.accuracy,
                report.precision, report.recall, report.f1, report.total);
  ss << line << "confusion (rows = true):\n      ";
  for (BpId c : report.classes) {
    std::snprintf(line, sizeof line, "%5d", c);
    ss << line;
  }
  ss << '\n';
  for (std::size_t r = 0; r < report.classes.size(); ++r) {
    std::snprintf(line, sizeof line, "%5d ", report.classes[r]);
    ss << line;
    for (std::size_t v : report.confusion[r]) {
      std::snprintf(line, sizeof line, "%5zu", v);
      ss << line;
    }
    ss << '\n';
  }
  return ss.str();
}

}  // namespace bpcite
