#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bpcite/classifier.hpp"
#include "bpcite/corpus.hpp"
#include "bpcite/embedding.hpp"
#include "bpcite/segment.hpp"

namespace bpcite {

/// One flag per sentence; 1 = kept.
using SentenceMask = std::vector<std::uint8_t>;

struct LimeConfig {
  std::size_t n_samples = 1000;
  double ridge_lambda = 1.0;
  /// Defaults to 0.25 * sqrt(sentence count).
  std::optional<double> kernel_width;
  std::uint64_t seed = 0;

  void validate() const;
  double width_for(std::size_t n_sentences) const;
};

struct PerturbationSample {
  SentenceMask mask;
  double prob = 0.0;
  double weight = 0.0;
};

struct SurrogateFit {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// First mask keeps everything; each other mask removes a uniform count in
/// [1, n-1] of uniformly chosen sentences. Length max(n_samples, n+1), or 1 when n == 1.
std::vector<SentenceMask> sample_masks(std::size_t n_sentences, std::size_t n_samples, std::uint64_t seed);

/// exp(-d^2 / width^2) with d the removed fraction.
double kernel_weight(const SentenceMask& mask, double width);

/// Weighted ridge with an unpenalized intercept, solved through the normal
/// equations. Throws ModelError when the system is singular.
SurrogateFit fit_surrogate(std::span<const PerturbationSample> samples, double ridge_lambda);

/// Prefix before the first sentence, kept sentences, and every inter-sentence
/// gap; the all-ones mask reproduces `body`.
std::string masked_text(std::string_view body, std::span<const Span> sentences, const SentenceMask& mask);

/// Probability of class `bp` for the masked document.
double evaluate_masked(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf, std::string_view body,
                       std::span<const Span> sentences, const SentenceMask& mask, BpId bp);

struct Explanation {
  std::string doc_id;
  BpId bp = 0;
  std::vector<Span> sentences;
  std::vector<double> weights;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Single-sentence documents: nothing to perturb, the weight is 0.
  bool degenerate = false;
  std::size_t n_samples = 0;
  double kernel_width = 0.0;
  double ridge_lambda = 0.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static Explanation from_json(const nlohmann::json& j);
};

/// Sampling, kernel weighting and surrogate fitting around an arbitrary
/// probability function of the mask. `seed` is used as given.
Explanation explain_function(std::size_t n_sentences, const std::function<double(const SentenceMask&)>& f,
                             const LimeConfig& cfg, std::uint64_t seed);

/// Sentence-level explanation of P(bp | doc); the sampling seed is mix_seed(cfg.seed, doc.id).
Explanation explain(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf, const Document& doc, BpId bp,
                    const LimeConfig& cfg, const SegmentConfig& segmentation = {});

}  // namespace bpcite
