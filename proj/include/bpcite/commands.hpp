#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpcite/classifier.hpp"
#include "bpcite/corpus.hpp"
#include "bpcite/explainer.hpp"
#include "bpcite/normalize.hpp"
#include "bpcite/store.hpp"

namespace bpcite {

struct IngestOptions {
  std::filesystem::path documents;
  std::filesystem::path precedents;
  bool strict = false;
};

struct IngestResult {
  LoadReport report;
  std::size_t loaded = 0;
  std::size_t duplicates = 0;
  std::size_t kept = 0;
  std::string fingerprint;
};

/// Validates, deduplicates and stores the corpus. Rejected lines are reported;
/// with `strict` they also make the command fail (after writing the report).
IngestResult cmd_ingest(ProjectStore& store, const IngestOptions& options);

struct TrainConfig {
  std::uint64_t seed = 0;
  std::vector<double> grid = default_grid();
  std::size_t k = 50;
  std::size_t min_df = 2;
  std::size_t classes = 10;
  /// 0 = the size of the smallest selected class.
  std::size_t per_class = 0;
  SplitRatios ratios;
  NormalizerConfig normalizer;
  std::optional<std::filesystem::path> patterns;
};

struct TrainResult {
  std::vector<BpId> classes;
  std::size_t per_class = 0;
  double reg_c = 0.0;
  std::vector<std::pair<double, double>> accuracy_by_c;
  EvalReport validation;
  EvalReport test;
  std::string model_fingerprint;
};

TrainResult cmd_train(ProjectStore& store, const TrainConfig& config);

struct InferResult {
  std::size_t documents = 0;
  std::size_t explicit_records = 0;
  std::size_t potential_records = 0;
  std::size_t skipped = 0;
  std::map<BpId, std::size_t> potential_by_bp;
};

InferResult cmd_infer(ProjectStore& store, double t_c);

struct EvalResult {
  EvalReport validation;
  EvalReport test;
};

/// Re-scores the stored split with the stored model.
EvalResult cmd_eval(const ProjectStore& store);

/// Cache key of an explanation: document, class, configuration and model.
std::string explanation_key(const std::string& doc_id, BpId bp, const LimeConfig& cfg, const std::string& model_fp);

struct ExplainResult {
  Explanation explanation;
  std::filesystem::path file;
  bool cached = false;
};

/// `bp` defaults to the document's citation-index record, else the argmax class.
ExplainResult cmd_explain(ProjectStore& store, const std::string& doc_id, std::optional<BpId> bp, const LimeConfig& cfg);

std::string format_report(const EvalReport& report);

}  // namespace bpcite
