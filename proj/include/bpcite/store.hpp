#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpcite/citation_engine.hpp"
#include "bpcite/classifier.hpp"
#include "bpcite/corpus.hpp"
#include "bpcite/embedding.hpp"
#include "bpcite/explainer.hpp"

namespace bpcite {

/// Advisory flock on <root>/.lock, released on destruction.
class StoreLock {
 public:
  enum class Mode { Shared, Exclusive };
  StoreLock(const std::filesystem::path& root, Mode mode);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

struct ModelArtifact {
  static constexpr std::string_view kFormat = "bpcite.model/1";

  EmbeddingPipeline pipeline;
  CalibratedClassifier classifier;
  /// seed, date, corpus fingerprint, split ids, grid trace, reports.
  nlohmann::json metadata;

  nlohmann::json to_json() const;
  static ModelArtifact from_json(const nlohmann::json& j);
};

/// On-disk layout:
///   documents.jsonl, precedents.jsonl, ingest_report.json   (ingest)
///   model.json                                              (train)
///   citations.jsonl, citations.meta.json                    (infer)
///   explanations/                                           (explain cache)
///   manifest.json                                           fingerprints of the above
class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(std::string_view name) const { return root_ / std::string(name); }

  bool has_corpus() const;
  bool has_model() const;
  bool has_citations() const;

  void save_corpus(std::span<const Document> docs, std::span<const BindingPrecedent> precedents,
                   const nlohmann::json& report);
  /// Reads the validated corpus back; throws with a remediation hint when absent.
  Corpus load_corpus() const;
  std::string corpus_fingerprint() const;

  void save_model(const ModelArtifact& model);
  ModelArtifact load_model() const;
  std::string model_fingerprint() const;

  void save_citations(std::span<const CitationRecord> records, const nlohmann::json& meta);
  std::vector<CitationRecord> load_citations() const;
  nlohmann::json load_citations_meta() const;

  std::filesystem::path explanation_path(const std::string& key) const;

  nlohmann::json manifest() const;

 private:
  void update_manifest(const std::string& field, const std::string& value);

  std::filesystem::path root_;
};

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Stable JSON text: sorted keys, two-space indent, trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace bpcite
