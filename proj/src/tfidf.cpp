#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "bpcite/embedding.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

TfIdfModel::TfIdfModel(std::vector<std::string> terms, Eigen::VectorXd idf, std::size_t doc_count)
    : terms_(std::move(terms)), idf_(std::move(idf)), doc_count_(doc_count) {
  if (static_cast<std::size_t>(idf_.size()) != terms_.size())
    throw ModelError("tf-idf vocabulary and idf sizes differ");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!std::isfinite(idf_[static_cast<Eigen::Index>(i)]) || idf_[static_cast<Eigen::Index>(i)] <= 0.0)
      throw ModelError("idf must be finite and positive for term '" + terms_[i] + "'");
    if (!index_.emplace(terms_[i], i).second) throw ModelError("duplicate vocabulary term '" + terms_[i] + "'");
  }
}

TfIdfModel TfIdfModel::fit(std::span<const TokenSeq> docs, std::size_t min_df) {
  if (docs.empty()) throw DataError("cannot fit tf-idf on an empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen(doc.begin(), doc.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  std::vector<std::string> terms;
  std::vector<double> idf;
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    terms.push_back(term);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (terms.empty()) throw DataError("tf-idf vocabulary is empty (min_df=" + std::to_string(min_df) + ")");
  return TfIdfModel(std::move(terms), Eigen::Map<Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size())),
                    docs.size());
}

std::optional<std::size_t> TfIdfModel::index_of(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVec TfIdfModel::transform(const TokenSeq& tokens) const {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens)
    if (auto it = index_.find(t); it != index_.end()) counts[it->second] += 1.0;
  SparseVec v(static_cast<Eigen::Index>(terms_.size()));
  if (counts.empty()) return v;
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  double norm2 = 0.0;
  for (auto& [idx, c] : counts) {
    c *= idf_[static_cast<Eigen::Index>(idx)];
    norm2 += c * c;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (const auto& [idx, c] : counts) v.insertBack(static_cast<Eigen::Index>(idx)) = c * inv;
  return v;
}

SparseMat TfIdfModel::transform_all(std::span<const TokenSeq> docs) const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    auto v = transform(docs[r]);
    for (SparseVec::InnerIterator it(v); it; ++it)
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
  }
  SparseMat m(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(terms_.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

nlohmann::json TfIdfModel::to_json() const {
  return {{"vocabulary", terms_}, {"idf", json_util::vector_to_json(idf_)}, {"doc_count", doc_count_}};
}

TfIdfModel TfIdfModel::from_json(const nlohmann::json& j) {
  return TfIdfModel(j.at("vocabulary").get<std::vector<std::string>>(), json_util::vector_from_json(j.at("idf")),
                    j.at("doc_count").get<std::size_t>());
}

}  // namespace bpcite
