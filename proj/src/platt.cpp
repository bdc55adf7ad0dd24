#include <cmath>
#include <memory>

#include <spdlog/spdlog.h>

#include "bpcite/classifier.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

namespace {

constexpr double kHessianRidge = 1e-12;
constexpr double kMinStep = 1e-10;
constexpr double kArmijo = 1e-4;

// -log likelihood term for target t at f = a*s + b, evaluated without overflow.
double nll_term(double t, double f) {
  return f >= 0.0 ? t * f + std::log1p(std::exp(-f)) : (t - 1.0) * f + std::log1p(std::exp(f));
}

}  // namespace

double SigmoidParams::probability(double score) const {
  const double f = a * score + b;
  return f >= 0.0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
}

SigmoidParams fit_sigmoid(std::span<const double> scores, std::span<const bool> positive, const PlattOptions& options) {
  if (scores.size() != positive.size()) throw DataError("calibration scores and labels differ in length");
  double n_pos = 0.0, n_neg = 0.0;
  for (bool p : positive) (p ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("calibration labels are all identical");

  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  std::vector<double> target(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) target[i] = positive[i] ? hi : lo;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) f += nll_term(target[i], a * scores[i] + b);
    return f;
  };

  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double fval = objective(a, b);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    double h11 = kHessianRidge, h22 = kHessianRidge, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double s = scores[i];
      const double f = a * s + b;
      double p, q;
      if (f >= 0.0) {
        const double e = std::exp(-f);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(f);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += s * s * d2;
      h22 += d2;
      h21 += s * d2;
      const double d1 = target[i] - p;
      g1 += s * d1;
      g2 += d1;
    }
    if (std::abs(g1) <= options.gradient_tolerance && std::abs(g2) <= options.gradient_tolerance) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + kArmijo * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) break;
  }
  if (it == options.max_iterations) spdlog::warn("platt scaling hit the iteration cap");
  return {a, b};
}

PlattCalibrator fit_platt(const Eigen::MatrixXd& scores, std::span<const BpId> labels, std::span<const BpId> classes,
                          const PlattOptions& options) {
  if (static_cast<std::size_t>(scores.rows()) != labels.size() ||
      static_cast<std::size_t>(scores.cols()) != classes.size())
    throw DataError("calibration score matrix shape does not match labels/classes");
  PlattCalibrator cal;
  cal.classes.assign(classes.begin(), classes.end());
  std::vector<double> col(labels.size());
  std::unique_ptr<bool[]> pos(new bool[labels.size()]);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      pos[i] = labels[i] == classes[c];
    }
    try {
      cal.params.push_back(fit_sigmoid(col, std::span<const bool>(pos.get(), labels.size()), options));
    } catch (const DataError& e) {
      throw DataError("calibration for class " + std::to_string(classes[c]) + ": " + e.what());
    }
    double pos_sum = 0.0, neg_sum = 0.0, pos_n = 0.0, neg_n = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (pos[i]) pos_sum += col[i], pos_n += 1.0;
      else neg_sum += col[i], neg_n += 1.0;
    }
    if (pos_sum / pos_n > neg_sum / neg_n && cal.params.back().a >= 0.0)
      spdlog::warn("calibration for class {} has A >= 0 although positives score higher", classes[c]);
  }
  return cal;
}

}  // namespace bpcite
