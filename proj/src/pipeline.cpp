#include <algorithm>

#include <spdlog/spdlog.h>

#include "bpcite/embedding.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

namespace json_util {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ModelError("ragged matrix in artifact");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace json_util

EmbeddingPipeline::EmbeddingPipeline(Normalizer normalizer, CitationPatterns patterns, TfIdfModel tfidf, SvdModel svd,
                                     Standardizer standardizer)
    : normalizer_(std::move(normalizer)),
      patterns_(std::move(patterns)),
      tfidf_(std::move(tfidf)),
      svd_(std::move(svd)),
      standardizer_(std::move(standardizer)) {
  if (svd_.input_dim() != tfidf_.size())
    throw ModelError("svd input dimension does not match the tf-idf vocabulary");
  if (static_cast<std::size_t>(standardizer_.mean().size()) != svd_.k())
    throw ModelError("standardizer dimension does not match the svd rank");
  auto j = to_json();
  j.erase("fingerprint");
  fingerprint_ = text::fingerprint(j.dump());
}

EmbeddingPipeline EmbeddingPipeline::fit(std::span<const std::string> bodies, Normalizer normalizer,
                                         CitationPatterns patterns, const EmbeddingOptions& options) {
  std::vector<TokenSeq> tokens;
  tokens.reserve(bodies.size());
  for (const auto& b : bodies) tokens.push_back(normalizer.normalize(patterns.strip(b)));
  auto tfidf = TfIdfModel::fit(tokens, options.min_df);
  const SparseMat matrix = tfidf.transform_all(tokens);
  std::size_t k = options.k;
  const auto limit = std::min<std::size_t>(static_cast<std::size_t>(matrix.rows()), tfidf.size());
  if (k > limit) {
    spdlog::warn("embedding dimension {} exceeds min(documents, vocabulary) = {}; using {}", k, limit, limit);
    k = limit;
  }
  auto svd = SvdModel::fit(matrix, k, options.seed);
  Eigen::MatrixXd projected(matrix.rows(), static_cast<Eigen::Index>(k));
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    SparseVec row = matrix.row(r).transpose();
    projected.row(r) = svd.project(row).transpose();
  }
  auto standardizer = Standardizer::fit(projected);
  return EmbeddingPipeline(std::move(normalizer), std::move(patterns), std::move(tfidf), std::move(svd),
                           std::move(standardizer));
}

TokenSeq EmbeddingPipeline::tokens(std::string_view body) const { return normalizer_.normalize(patterns_.strip(body)); }

SparseVec EmbeddingPipeline::tfidf_vector(std::string_view body) const { return tfidf_.transform(tokens(body)); }

Eigen::VectorXd EmbeddingPipeline::latent(std::string_view body) const { return svd_.project(tfidf_vector(body)); }

Eigen::VectorXd EmbeddingPipeline::embed(std::string_view body) const { return standardizer_.apply(latent(body)); }

Eigen::MatrixXd EmbeddingPipeline::embed_all(std::span<const std::string> bodies) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(bodies.size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < bodies.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = embed(bodies[i]).transpose();
  return out;
}

nlohmann::json EmbeddingPipeline::to_json() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["normalizer"] = normalizer_.to_json();
  j["normalizer_fingerprint"] = normalizer_.fingerprint();
  j["citation_patterns"] = patterns_.sources();
  j["tfidf"] = tfidf_.to_json();
  j["svd"] = svd_.to_json();
  j["standardizer"] = standardizer_.to_json();
  j["fingerprint"] = fingerprint_;
  return j;
}

EmbeddingPipeline EmbeddingPipeline::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormat) throw ModelError("not an embedding artifact (format tag mismatch)");
  auto normalizer = Normalizer::from_json(j.at("normalizer"));
  if (normalizer.fingerprint() != j.at("normalizer_fingerprint").get<std::string>())
    throw ModelError("embedding artifact normalizer fingerprint mismatch");
  EmbeddingPipeline p(std::move(normalizer),
                      CitationPatterns::from_lines(j.at("citation_patterns").get<std::vector<std::string>>()),
                      TfIdfModel::from_json(j.at("tfidf")), SvdModel::from_json(j.at("svd")),
                      Standardizer::from_json(j.at("standardizer")));
  if (j.contains("fingerprint") && j.at("fingerprint").get<std::string>() != p.fingerprint())
    throw ModelError("embedding artifact fingerprint mismatch (file modified?)");
  return p;
}

}  // namespace bpcite
