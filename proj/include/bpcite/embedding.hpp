#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include "bpcite/citations.hpp"
#include "bpcite/normalize.hpp"

namespace bpcite {

using SparseVec = Eigen::SparseVector<double>;
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Smoothed TF-IDF: idf(t) = ln((1 + N) / (1 + df(t))) + 1, raw counts, L2 rows.
class TfIdfModel {
 public:
  TfIdfModel() = default;
  TfIdfModel(std::vector<std::string> terms, Eigen::VectorXd idf, std::size_t doc_count);

  /// Vocabulary = terms with document frequency >= min_df, sorted. Throws
  /// DataError when no documents are given or the vocabulary is empty.
  static TfIdfModel fit(std::span<const TokenSeq> docs, std::size_t min_df);

  /// Out-of-vocabulary terms are ignored; an all-zero vector stays zero.
  SparseVec transform(const TokenSeq& tokens) const;
  SparseMat transform_all(std::span<const TokenSeq> docs) const;

  std::size_t size() const { return terms_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const Eigen::VectorXd& idf() const { return idf_; }
  std::optional<std::size_t> index_of(const std::string& term) const;

  nlohmann::json to_json() const;
  static TfIdfModel from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
  Eigen::VectorXd idf_;
  std::size_t doc_count_ = 0;
};

/// Truncated SVD of an uncentered matrix: top-k right singular vectors as rows.
class SvdModel {
 public:
  /// Exact dense decomposition when min(rows, cols) fits the exact threshold,
  /// randomized subspace iteration otherwise.
  static constexpr std::size_t kExactLimit = 64;
  static constexpr std::size_t kOversampling = 10;
  static constexpr int kPowerIterations = 2;

  SvdModel() = default;
  SvdModel(Eigen::MatrixXd components, Eigen::VectorXd singular_values);

  /// Requires 1 <= k <= min(rows, cols). Sign rule: the largest-magnitude
  /// entry of each component is positive.
  static SvdModel fit(const SparseMat& matrix, std::size_t k, std::uint64_t seed);

  Eigen::VectorXd project(const SparseVec& v) const;
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;

  std::size_t k() const { return static_cast<std::size_t>(components_.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(components_.cols()); }
  const Eigen::MatrixXd& components() const { return components_; }
  const Eigen::VectorXd& singular_values() const { return singular_values_; }

  nlohmann::json to_json() const;
  static SvdModel from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd components_;
  Eigen::VectorXd singular_values_;
};

/// Per-coordinate z-scoring with population variance; constant coordinates keep stdev 1.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(Eigen::VectorXd mean, Eigen::VectorXd stdev);

  /// Rows are samples. Throws DataError with fewer than 2 rows.
  static Standardizer fit(const Eigen::MatrixXd& rows);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& stdev() const { return stdev_; }

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd stdev_;
};

struct EmbeddingOptions {
  std::size_t k = 50;
  std::size_t min_df = 2;
  std::uint64_t seed = 0;
};

/// raw text -> strip citations -> normalize -> TF-IDF -> SVD -> standardize.
class EmbeddingPipeline {
 public:
  static constexpr std::string_view kFormat = "bpcite.embedding/1";

  EmbeddingPipeline(Normalizer normalizer, CitationPatterns patterns, TfIdfModel tfidf, SvdModel svd,
                    Standardizer standardizer);

  /// k is clamped to min(documents, vocabulary) when the corpus is too small.
  static EmbeddingPipeline fit(std::span<const std::string> bodies, Normalizer normalizer, CitationPatterns patterns,
                               const EmbeddingOptions& options);

  TokenSeq tokens(std::string_view body) const;
  SparseVec tfidf_vector(std::string_view body) const;
  /// SVD projection without standardization (the space used for similarities).
  Eigen::VectorXd latent(std::string_view body) const;
  Eigen::VectorXd embed(std::string_view body) const;
  Eigen::MatrixXd embed_all(std::span<const std::string> bodies) const;

  std::size_t dim() const { return svd_.k(); }
  const Normalizer& normalizer() const { return normalizer_; }
  const CitationPatterns& patterns() const { return patterns_; }
  const TfIdfModel& tfidf() const { return tfidf_; }
  const SvdModel& svd() const { return svd_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const std::string& fingerprint() const { return fingerprint_; }

  nlohmann::json to_json() const;
  static EmbeddingPipeline from_json(const nlohmann::json& j);

 private:
  Normalizer normalizer_;
  CitationPatterns patterns_;
  TfIdfModel tfidf_;
  SvdModel svd_;
  Standardizer standardizer_;
  std::string fingerprint_;
};

namespace json_util {
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
/// Row-major nested arrays.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
}  // namespace json_util

}  // namespace bpcite
