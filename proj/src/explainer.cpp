#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "bpcite/errors.hpp"
#include "bpcite/explainer.hpp"
#include "bpcite/random.hpp"

namespace bpcite {

namespace {

constexpr double kMinRcond = 1e-13;
constexpr double kConstantVariance = 1e-30;

}  // namespace

void LimeConfig::validate() const {
  if (n_samples == 0) throw ConfigError("lime n_samples must be positive");
  if (!std::isfinite(ridge_lambda) || ridge_lambda < 0.0) throw ConfigError("lime ridge_lambda must be >= 0");
  if (kernel_width && (!std::isfinite(*kernel_width) || *kernel_width <= 0.0))
    throw ConfigError("lime kernel_width must be positive");
}

double LimeConfig::width_for(std::size_t n_sentences) const {
  return kernel_width ? *kernel_width : 0.25 * std::sqrt(static_cast<double>(n_sentences));
}

std::vector<SentenceMask> sample_masks(std::size_t n_sentences, std::size_t n_samples, std::uint64_t seed) {
  if (n_sentences == 0) throw DataError("cannot perturb a document without sentences");
  std::vector<SentenceMask> masks;
  masks.emplace_back(n_sentences, 1);
  if (n_sentences == 1) return masks;
  const std::size_t total = std::max(n_samples, n_sentences + 1);
  Rng rng(seed);
  std::vector<std::size_t> order(n_sentences);
  while (masks.size() < total) {
    const std::size_t removed = rng.between(1, n_sentences - 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SentenceMask mask(n_sentences, 1);
    for (std::size_t r = 0; r < removed; ++r) {
      std::swap(order[r], order[r + rng.index(n_sentences - r)]);
      mask[order[r]] = 0;
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

double kernel_weight(const SentenceMask& mask, double width) {
  if (mask.empty()) return 1.0;
  const auto kept = static_cast<double>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  const double d = 1.0 - kept / static_cast<double>(mask.size());
  return std::exp(-(d * d) / (width * width));
}

SurrogateFit fit_surrogate(std::span<const PerturbationSample> samples, double ridge_lambda) {
  if (samples.empty()) throw DataError("surrogate fit needs samples");
  const auto n = static_cast<Eigen::Index>(samples.front().mask.size());
  if (static_cast<Eigen::Index>(samples.size()) < n + 1)
    throw DataError("surrogate fit needs at least sentence count + 1 samples");

  // Unknowns: (w_0 .. w_{n-1}, b).
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd row(n + 1);
  for (const auto& s : samples) {
    if (static_cast<Eigen::Index>(s.mask.size()) != n) throw DataError("masks differ in length");
    for (Eigen::Index i = 0; i < n; ++i) row[i] = s.mask[static_cast<std::size_t>(i)];
    row[n] = 1.0;
    normal.selfadjointView<Eigen::Lower>().rankUpdate(row, s.weight);
    rhs += s.weight * s.prob * row;
  }
  normal = normal.selfadjointView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < n; ++i) normal(i, i) += ridge_lambda;

  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond)
    throw ModelError(ridge_lambda == 0.0 ? "surrogate system is singular; use ridge_lambda > 0"
                                         : "surrogate system is singular");
  const Eigen::VectorXd theta = llt.solve(rhs);

  SurrogateFit fit;
  fit.weights = theta.head(n);
  fit.intercept = theta[n];
  double wsum = 0.0, wy = 0.0;
  for (const auto& s : samples) wsum += s.weight, wy += s.weight * s.prob;
  const double mean = wy / wsum;
  double sse = 0.0, sst = 0.0;
  for (const auto& s : samples) {
    double pred = fit.intercept;
    for (Eigen::Index i = 0; i < n; ++i) pred += fit.weights[i] * s.mask[static_cast<std::size_t>(i)];
    sse += s.weight * (s.prob - pred) * (s.prob - pred);
    sst += s.weight * (s.prob - mean) * (s.prob - mean);
  }
  fit.r2 = sst <= kConstantVariance * wsum ? 1.0 : 1.0 - sse / sst;
  return fit;
}

std::string masked_text(std::string_view body, std::span<const Span> sentences, const SentenceMask& mask) {
  if (mask.size() != sentences.size()) throw DataError("mask length does not match the sentence count");
  if (sentences.empty()) return std::string(body);
  std::string out(body.substr(0, sentences.front().begin));
  // Inter-sentence gaps are always kept so paragraph breaks survive.
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (mask[i]) out.append(body.substr(sentences[i].begin, sentences[i].size()));
    const std::size_t next = i + 1 < sentences.size() ? sentences[i + 1].begin : body.size();
    out.append(body.substr(sentences[i].end, next - sentences[i].end));
  }
  return out;
}

double evaluate_masked(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf, std::string_view body,
                       std::span<const Span> sentences, const SentenceMask& mask, BpId bp) {
  if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end())
    throw DataError("cannot evaluate an all-zero mask");
  const auto p = clf.predict_proba(pipeline.embed(masked_text(body, sentences, mask)));
  return p[static_cast<Eigen::Index>(clf.class_index(bp))];
}

Explanation explain_function(std::size_t n_sentences, const std::function<double(const SentenceMask&)>& f,
                             const LimeConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Explanation e;
  e.kernel_width = cfg.width_for(n_sentences);
  e.ridge_lambda = cfg.ridge_lambda;
  e.seed = seed;
  const auto masks = sample_masks(n_sentences, cfg.n_samples, seed);
  e.n_samples = masks.size();
  if (n_sentences == 1) {
    e.degenerate = true;
    e.weights = {0.0};
    e.intercept = f(masks.front());
    e.r2 = 1.0;
    return e;
  }
  std::vector<PerturbationSample> samples;
  samples.reserve(masks.size());
  for (const auto& m : masks) samples.push_back({m, f(m), kernel_weight(m, e.kernel_width)});
  const auto fit = fit_surrogate(samples, cfg.ridge_lambda);
  e.weights.assign(fit.weights.data(), fit.weights.data() + fit.weights.size());
  e.intercept = fit.intercept;
  e.r2 = fit.r2;
  return e;
}

Explanation explain(const EmbeddingPipeline& pipeline, const CalibratedClassifier& clf, const Document& doc, BpId bp,
                    const LimeConfig& cfg, const SegmentConfig& segmentation) {
  const std::size_t column = clf.class_index(bp);
  const auto seg = segment(doc.body, segmentation);
  if (seg.sentences.empty()) throw DataError("document " + doc.id + " has no sentences to explain");
  auto f = [&](const SentenceMask& mask) {
    return clf.predict_proba(pipeline.embed(masked_text(doc.body, seg.sentences, mask)))[static_cast<Eigen::Index>(column)];
  };
  auto e = explain_function(seg.sentences.size(), f, cfg, mix_seed(cfg.seed, doc.id));
  e.doc_id = doc.id;
  e.bp = bp;
  e.sentences = seg.sentences;
  return e;
}

nlohmann::json Explanation::to_json() const {
  auto sents = nlohmann::json::array();
  for (std::size_t i = 0; i < sentences.size(); ++i)
    sents.push_back({{"begin", sentences[i].begin}, {"end", sentences[i].end}, {"weight", weights[i]}});
  return {{"doc_id", doc_id},
          {"bp_id", bp},
          {"sentences", sents},
          {"intercept", intercept},
          {"r2", r2},
          {"degenerate", degenerate},
          {"config",
           {{"n_samples", n_samples}, {"kernel_width", kernel_width}, {"ridge_lambda", ridge_lambda}, {"seed", seed}}}};
}

Explanation Explanation::from_json(const nlohmann::json& j) {
  Explanation e;
  e.doc_id = j.at("doc_id").get<std::string>();
  e.bp = j.at("bp_id").get<BpId>();
  for (const auto& s : j.at("sentences")) {
    e.sentences.push_back({s.at("begin").get<std::size_t>(), s.at("end").get<std::size_t>()});
    e.weights.push_back(s.at("weight").get<double>());
  }
  e.intercept = j.at("intercept").get<double>();
  e.r2 = j.at("r2").get<double>();
  e.degenerate = j.at("degenerate").get<bool>();
  const auto& c = j.at("config");
  e.n_samples = c.at("n_samples").get<std::size_t>();
  e.kernel_width = c.at("kernel_width").get<double>();
  e.ridge_lambda = c.at("ridge_lambda").get<double>();
  e.seed = c.at("seed").get<std::uint64_t>();
  return e;
}

}  // namespace bpcite
