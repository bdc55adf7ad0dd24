#include <cmath>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "bpcite/explainer.hpp"
#include "bpcite/random.hpp"
#include "helpers.hpp"

using namespace bpcite;
using testing_support::make_doc;
using testing_support::small_world;

namespace {

// Oracle: ridge-weighted least squares as one stacked least-squares problem,
// solved by column-pivoting Householder QR.
Eigen::VectorXd wls_oracle(std::span<const PerturbationSample> samples, double lambda) {
  const auto n = static_cast<Eigen::Index>(samples.front().mask.size());
  const auto m = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + n, n + 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m + n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double sw = std::sqrt(samples[r].weight);
    for (Eigen::Index i = 0; i < n; ++i) a(r, i) = sw * samples[r].mask[i];
    a(r, n) = sw;
    y(r) = sw * samples[r].prob;
  }
  for (Eigen::Index i = 0; i < n; ++i) a(m + i, i) = std::sqrt(lambda);
  return a.colPivHouseholderQr().solve(y);
}

double ridge_objective(std::span<const PerturbationSample> samples, const Eigen::VectorXd& w, double b,
                       double lambda) {
  double f = lambda * w.squaredNorm();
  for (const auto& s : samples) {
    double pred = b;
    for (Eigen::Index i = 0; i < w.size(); ++i) pred += w(i) * s.mask[i];
    f += s.weight * (s.prob - pred) * (s.prob - pred);
  }
  return f;
}

std::vector<PerturbationSample> build_samples(std::size_t n, std::size_t count, std::uint64_t seed,
                                              const std::function<double(const SentenceMask&)>& f, double width) {
  std::vector<PerturbationSample> out;
  for (const auto& m : sample_masks(n, count, seed)) out.push_back({m, f(m), kernel_weight(m, width)});
  return out;
}

}  // namespace

TEST(Masks, FirstIsAllOnesAndNoneEmpty) {
  const auto masks = sample_masks(6, 300, 3);
  ASSERT_EQ(masks.size(), 300u);
  EXPECT_EQ(masks[0], SentenceMask(6, 1));
  for (const auto& m : masks) {
    const auto kept = std::count(m.begin(), m.end(), 1);
    EXPECT_GE(kept, 1);
  }
  EXPECT_EQ(masks, sample_masks(6, 300, 3));
  EXPECT_NE(masks, sample_masks(6, 300, 4));
}

TEST(Masks, SingleSentenceAndClamping) {
  const auto one = sample_masks(1, 500, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], SentenceMask{1});
  EXPECT_EQ(sample_masks(9, 3, 1).size(), 10u);
}

TEST(Masks, KeepRateIsBalanced) {
  const auto masks = sample_masks(4, 10000, 77);
  for (std::size_t i = 0; i < 4; ++i) {
    std::size_t kept = 0;
    for (const auto& m : masks) kept += m[i];
    const double rate = double(kept) / masks.size();
    EXPECT_GE(rate, 0.4);
    EXPECT_LE(rate, 0.8);
  }
}

TEST(Kernel, Examples) {
  EXPECT_DOUBLE_EQ(kernel_weight(SentenceMask(4, 1), 0.5), 1.0);
  EXPECT_NEAR(kernel_weight(SentenceMask{1, 1, 0, 0}, 0.5), std::exp(-1.0), 1e-15);
  double prev = 2.0;
  for (int removed = 0; removed < 8; ++removed) {
    SentenceMask m(8, 1);
    for (int i = 0; i < removed; ++i) m[i] = 0;
    const double w = kernel_weight(m, 0.7);
    EXPECT_LT(w, prev);
    prev = w;
  }
  LimeConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.width_for(16), 1.0);
}

TEST(Surrogate, LinearFunctionIsRecovered) {
  const auto f = [](const SentenceMask& m) { return 0.2 + 0.5 * m[2]; };
  const auto samples = build_samples(6, 400, 5, f, 0.25 * std::sqrt(6.0));
  const auto fit = fit_surrogate(samples, 1e-9);
  const auto oracle = wls_oracle(samples, 1e-9);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(fit.weights(i), i == 2 ? 0.5 : 0.0, 1e-6);
    EXPECT_NEAR(fit.weights(i), oracle(i), 1e-9);
  }
  EXPECT_NEAR(fit.intercept, 0.2, 1e-6);
  EXPECT_GE(fit.r2, 1.0 - 1e-6);
}

TEST(Surrogate, MatchesQrOracleOnNonlinearFunction) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = rng.between(2, 12);
    Eigen::VectorXd coef(n);
    for (std::size_t i = 0; i < n; ++i) coef(i) = rng.normal();
    const auto f = [&](const SentenceMask& m) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += coef(i) * m[i];
      return 1.0 / (1.0 + std::exp(-s));
    };
    const double lambda = 0.1 + rng.uniform();
    const auto samples = build_samples(n, 200, trial, f, 0.25 * std::sqrt(double(n)));
    const auto fit = fit_surrogate(samples, lambda);
    const auto oracle = wls_oracle(samples, lambda);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fit.weights(i), oracle(i), 1e-9);
    EXPECT_NEAR(fit.intercept, oracle(n), 1e-9);
    EXPECT_LE(fit.r2, 1.0);
    const double f0 = ridge_objective(samples, fit.weights, fit.intercept, lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (double step : {1e-4, -1e-4}) {
        Eigen::VectorXd w = fit.weights;
        w(i) += step;
        EXPECT_GE(ridge_objective(samples, w, fit.intercept, lambda), f0 - 1e-12);
      }
  }
}

TEST(Surrogate, ConstantAndRidgeLimit) {
  const auto constant = build_samples(5, 100, 1, [](const SentenceMask&) { return 0.37; }, 0.5);
  const auto c = fit_surrogate(constant, 1e-6);
  EXPECT_NEAR(c.weights.norm(), 0.0, 1e-9);
  EXPECT_NEAR(c.intercept, 0.37, 1e-9);
  EXPECT_DOUBLE_EQ(c.r2, 1.0);
  const auto linear = build_samples(5, 100, 1, [](const SentenceMask& m) { return 0.1 * m[0] + 0.4 * m[3]; }, 0.5);
  EXPECT_LT(fit_surrogate(linear, 1e12).weights.norm(), 1e-9);
}

TEST(Explain, FunctionPathIsDeterministic) {
  const auto f = [](const SentenceMask& m) { return 0.3 * m[0] + 0.1 * m[1] * m[2]; };
  LimeConfig cfg;
  cfg.n_samples = 300;
  const auto a = explain_function(3, f, cfg, 9);
  const auto b = explain_function(3, f, cfg, 9);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  const auto single = explain_function(1, f, cfg, 9);
  EXPECT_TRUE(single.degenerate);
  EXPECT_EQ(single.weights.size(), 1u);
  EXPECT_EQ(single.n_samples, 1u);
}

TEST(Explain, MaskedTextKeepsOrderAndParagraphs) {
  const std::string body = "Intro: Um. Dois.\n\nTrês. Quatro.";
  const auto seg = segment(body);
  ASSERT_EQ(seg.sentences.size(), 4u);
  EXPECT_EQ(masked_text(body, seg.sentences, SentenceMask(4, 1)), body);
  EXPECT_EQ(masked_text(body, seg.sentences, SentenceMask{1, 0, 1, 0}), "Intro: Um. \n\nTrês. ");
}

TEST(Explain, AllOnesMaskEqualsFullPrediction) {
  const auto& w = small_world();
  const auto& doc = w.corpus.documents.front();
  const auto seg = segment(doc.body);
  const BpId bp = w.classifier.classes()[1];
  const double full = w.classifier.predict_proba(w.pipeline.embed(doc.body))[1];
  EXPECT_DOUBLE_EQ(evaluate_masked(w.pipeline, w.classifier, doc.body, seg.sentences,
                                   SentenceMask(seg.sentences.size(), 1), bp),
                   full);
  EXPECT_THROW(evaluate_masked(w.pipeline, w.classifier, doc.body, seg.sentences,
                               SentenceMask(seg.sentences.size(), 0), bp),
               DataError);
}

TEST(Explain, OovSentenceBarelyMatters) {
  const auto& w = small_world();
  const std::string body = w.corpus.documents.front().body + "\n\nQxzv wqpt zzkr.";
  const auto seg = segment(body);
  SentenceMask without(seg.sentences.size(), 1);
  without.back() = 0;
  const BpId bp = w.classifier.classes()[0];
  const double with = evaluate_masked(w.pipeline, w.classifier, body, seg.sentences,
                                      SentenceMask(seg.sentences.size(), 1), bp);
  EXPECT_NEAR(evaluate_masked(w.pipeline, w.classifier, body, seg.sentences, without, bp), with, 1e-12);
}

TEST(Explain, DiscriminativeSentenceGetsTopWeight) {
  const auto& w = small_world();
  const BpId bp = w.corpus.class_ids[0];
  std::string topical = "Consta que";
  for (std::size_t i = 0; i < 25; ++i) topical += " " + w.corpus.class_words[0][i % w.corpus.class_words[0].size()];
  topical += '.';
  const auto doc = make_doc("crafted",
                            "Relatório do processo em exame. Trata-se de pedido formulado pela parte. " + topical +
                                " Decido em seguida. Publique-se e intime-se.");
  std::size_t hits = 0;
  const auto n_sentences = segment(doc.body).sentences.size();
  ASSERT_EQ(n_sentences, 5u);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LimeConfig cfg;
    cfg.n_samples = 150;
    cfg.seed = seed;
    const auto e = explain(w.pipeline, w.classifier, doc, bp, cfg);
    hits += std::max_element(e.weights.begin(), e.weights.end()) - e.weights.begin() == 2;
  }
  EXPECT_GE(hits, 95u);
}

TEST(Explain, JsonRoundTrip) {
  const auto& w = small_world();
  LimeConfig cfg;
  cfg.n_samples = 50;
  const auto e = explain(w.pipeline, w.classifier, w.corpus.documents[5], w.classifier.classes()[0], cfg);
  const auto back = Explanation::from_json(e.to_json());
  EXPECT_EQ(back.to_json().dump(), e.to_json().dump());
  EXPECT_EQ(e.seed, mix_seed(0, w.corpus.documents[5].id));
}

TEST(LimeConfig, Validation) {
  LimeConfig cfg;
  cfg.n_samples = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.n_samples = 10;
  cfg.kernel_width = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.kernel_width.reset();
  cfg.ridge_lambda = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
