#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "bpcite/citation_engine.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

namespace {

std::set<BpId> effective_scope(const InferenceConfig& cfg, std::span<const BpId> classes) {
  if (!cfg.bp_scope.empty()) return cfg.bp_scope;
  return {classes.begin(), classes.end()};
}

std::optional<YearMonth> month_of(const Document& doc) {
  if (!doc.date) return std::nullopt;
  return bpcite::month_of(*doc.date);
}

}  // namespace

std::string_view to_string(CitationKind kind) { return kind == CitationKind::Explicit ? "explicit" : "potential"; }

CitationKind parse_citation_kind(std::string_view s) {
  if (s == "explicit") return CitationKind::Explicit;
  if (s == "potential") return CitationKind::Potential;
  throw DataError("unknown citation kind '" + std::string(s) + "'");
}

nlohmann::json to_json(const CitationRecord& r) {
  nlohmann::json j;
  j["doc_id"] = r.doc_id;
  j["bp_id"] = r.bp;
  j["kind"] = to_string(r.kind);
  j["confidence"] = r.confidence;
  j["month"] = r.month ? nlohmann::json(r.month->str()) : nlohmann::json(nullptr);
  return j;
}

CitationRecord citation_from_json(const nlohmann::json& j) {
  CitationRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.bp = j.at("bp_id").get<BpId>();
  r.kind = parse_citation_kind(j.at("kind").get<std::string>());
  r.confidence = j.at("confidence").get<double>();
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) throw DataError("citation confidence outside [0,1]");
  if (const auto& m = j.at("month"); !m.is_null()) {
    r.month = YearMonth::parse(m.get<std::string>());
    if (!r.month) throw DataError("malformed citation month '" + m.get<std::string>() + "'");
  }
  return r;
}

void InferenceConfig::validate() const {
  if (!std::isfinite(t_c) || t_c < 0.0 || t_c > 1.0)
    throw ConfigError("threshold t_c must lie in [0, 1], got " + std::to_string(t_c));
}

bool out_of_scope(const Document& doc, const std::set<BpId>& scope) {
  return std::any_of(doc.explicit_bps.begin(), doc.explicit_bps.end(), [&](BpId bp) { return !scope.count(bp); });
}

std::optional<CitationRecord> apply_citation_rule(const Document& doc, std::span<const BpId> classes,
                                                  const Eigen::VectorXd& probabilities, const InferenceConfig& cfg) {
  if (static_cast<std::size_t>(probabilities.size()) != classes.size())
    throw ModelError("probability vector does not match the class list");
  const std::size_t best = argmax(probabilities);
  const BpId bp = classes[best];
  const double p = probabilities[static_cast<Eigen::Index>(best)];
  if (doc.cites(bp)) return CitationRecord{doc.id, bp, CitationKind::Explicit, 1.0, month_of(doc)};
  if (!cfg.bp_scope.empty() && !cfg.bp_scope.count(bp)) return std::nullopt;
  if (p >= cfg.t_c) return CitationRecord{doc.id, bp, CitationKind::Potential, p, month_of(doc)};
  return std::nullopt;
}

std::optional<CitationRecord> infer_document(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf,
                                             const Document& doc, const InferenceConfig& cfg) {
  cfg.validate();
  if (clf.embedding_fingerprint != pipeline.fingerprint())
    throw ModelError("classifier was trained on embedding " + clf.embedding_fingerprint + ", pipeline is " +
                     pipeline.fingerprint());
  if (out_of_scope(doc, effective_scope(cfg, clf.classes())))
    throw ConfigError("document " + doc.id + " cites a precedent outside the inference scope");
  return apply_citation_rule(doc, clf.classes(), clf.predict_proba(pipeline.embed(doc.body)), cfg);
}

BatchResult batch_infer(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf,
                        std::span<const Document> docs, const InferenceConfig& cfg) {
  cfg.validate();
  BatchResult out;
  for (const auto& doc : docs) {
    try {
      if (auto r = infer_document(pipeline, clf, doc, cfg)) out.records.push_back(std::move(*r));
    } catch (const ModelError&) {
      throw;
    } catch (const Error& e) {
      out.errors.push_back({doc.id, e.what()});
    }
  }
  return out;
}

BatchResult batch_apply(std::span<const Document> docs, std::span<const BpId> classes,
                        const Eigen::MatrixXd& probabilities, const InferenceConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(probabilities.rows()) != docs.size())
    throw DataError("probability rows do not match the documents");
  const auto scope = effective_scope(cfg, classes);
  BatchResult out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (out_of_scope(docs[i], scope)) {
      out.errors.push_back({docs[i].id, "cites a precedent outside the inference scope"});
      continue;
    }
    if (auto r = apply_citation_rule(docs[i], classes, probabilities.row(static_cast<Eigen::Index>(i)).transpose(), cfg))
      out.records.push_back(std::move(*r));
  }
  return out;
}

std::vector<CitationRecord> build_index(std::span<const Document> docs, const std::vector<CitationRecord>& inferred,
                                        const std::set<BpId>& scope) {
  std::vector<CitationRecord> out;
  for (const auto& doc : docs) {
    if (out_of_scope(doc, scope)) continue;
    for (BpId bp : doc.explicit_bps) out.push_back({doc.id, bp, CitationKind::Explicit, 1.0, month_of(doc)});
  }
  for (const auto& r : inferred)
    if (r.kind == CitationKind::Potential) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const CitationRecord& a, const CitationRecord& b) {
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.bp < b.bp;
  });
  return out;
}

void write_citations(std::ostream& out, std::span<const CitationRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<CitationRecord> read_citations(std::istream& in) {
  std::vector<CitationRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(citation_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("citation index line " + std::to_string(number) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("citation index line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace bpcite
