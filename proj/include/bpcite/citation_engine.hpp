#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bpcite/classifier.hpp"
#include "bpcite/corpus.hpp"
#include "bpcite/embedding.hpp"

namespace bpcite {

enum class CitationKind { Explicit, Potential };

std::string_view to_string(CitationKind kind);
CitationKind parse_citation_kind(std::string_view s);

struct CitationRecord {
  std::string doc_id;
  BpId bp = 0;
  CitationKind kind = CitationKind::Potential;
  double confidence = 0.0;
  std::optional<YearMonth> month;

  bool operator==(const CitationRecord&) const = default;
};

nlohmann::json to_json(const CitationRecord& r);
CitationRecord citation_from_json(const nlohmann::json& j);

struct InferenceConfig {
  double t_c = 0.95;
  /// Empty means every classifier class.
  std::set<BpId> bp_scope;

  /// Throws ConfigError unless 0 <= t_c <= 1.
  void validate() const;
};

/// The decision rule on an already computed probability vector (aligned to
/// `classes`). Returns nothing when the argmax is out of scope or below t_c.
std::optional<CitationRecord> apply_citation_rule(const Document& doc, std::span<const BpId> classes,
                                                  const Eigen::VectorXd& probabilities, const InferenceConfig& cfg);

/// Documents with an explicit label outside the scope.
bool out_of_scope(const Document& doc, const std::set<BpId>& scope);

/// Throws ModelError when the classifier was trained on a different pipeline,
/// ConfigError when the document's explicit labels fall outside the scope.
std::optional<CitationRecord> infer_document(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf,
                                             const Document& doc, const InferenceConfig& cfg);

struct InferenceError {
  std::string doc_id;
  std::string message;
};

struct BatchResult {
  std::vector<CitationRecord> records;
  std::vector<InferenceError> errors;
};

BatchResult batch_infer(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf,
                        std::span<const Document> docs, const InferenceConfig& cfg);

/// Same rule over precomputed probability rows (one per doc), for threshold sweeps.
BatchResult batch_apply(std::span<const Document> docs, std::span<const BpId> classes,
                        const Eigen::MatrixXd& probabilities, const InferenceConfig& cfg);

/// Label-derived explicit records (confidence 1.0, one per in-scope label) followed by
/// the potential records of `inferred`, ordered by (doc_id, kind, bp).
std::vector<CitationRecord> build_index(std::span<const Document> docs, const std::vector<CitationRecord>& inferred,
                                        const std::set<BpId>& scope);

void write_citations(std::ostream& out, std::span<const CitationRecord> records);
std::vector<CitationRecord> read_citations(std::istream& in);

}  // namespace bpcite
