#include <algorithm>
#include <cmath>

#include "bpcite/analytics.hpp"
#include "bpcite/errors.hpp"
#include "bpcite/random.hpp"

namespace bpcite {

namespace {

constexpr double kEps = 1e-12;

// Direct residual; the Gram expansion |X|^2 - 2<W, XH^T> + <W^T W, HH^T> cancels
// catastrophically once the fit is close and makes the trace jitter upwards.
double objective(const SparseMat& x, const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  Eigen::MatrixXd r = w * h;
  r -= x;
  return r.squaredNorm();
}

}  // namespace

TopicModel fit_nmf(const SparseMat& x, std::size_t k, const NmfOptions& options) {
  const auto rows = static_cast<std::size_t>(x.rows());
  const auto cols = static_cast<std::size_t>(x.cols());
  if (k == 0 || k > std::min(rows, cols))
    throw ConfigError("topic count " + std::to_string(k) + " outside [1, " + std::to_string(std::min(rows, cols)) + "]");
  double total = 0.0;
  for (Eigen::Index r = 0; r < x.outerSize(); ++r)
    for (SparseMat::InnerIterator it(x, r); it; ++it) {
      if (!(it.value() >= 0.0)) throw DataError("topic model input has a negative entry");
      total += it.value();
    }

  const auto kk = static_cast<Eigen::Index>(k);
  const double scale = std::sqrt(total / static_cast<double>(rows * cols) / static_cast<double>(k));
  Rng rng(options.seed);
  TopicModel m;
  m.k = k;
  m.seed = options.seed;
  m.w.resize(x.rows(), kk);
  m.h.resize(kk, x.cols());
  for (Eigen::Index r = 0; r < m.w.rows(); ++r)
    for (Eigen::Index c = 0; c < kk; ++c) m.w(r, c) = scale * rng.uniform();
  for (Eigen::Index r = 0; r < kk; ++r)
    for (Eigen::Index c = 0; c < m.h.cols(); ++c) m.h(r, c) = scale * rng.uniform();

  const SparseMat xt = x.transpose();
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const Eigen::MatrixXd xht = x * m.h.transpose();
    const Eigen::MatrixXd hht = m.h * m.h.transpose();
    m.w = m.w.cwiseProduct(xht).cwiseQuotient(m.w * hht + Eigen::MatrixXd::Constant(m.w.rows(), kk, kEps));

    const Eigen::MatrixXd wtx = (xt * m.w).transpose();
    const Eigen::MatrixXd wtw = m.w.transpose() * m.w;
    m.h = m.h.cwiseProduct(wtx).cwiseQuotient(wtw * m.h + Eigen::MatrixXd::Constant(kk, m.h.cols(), kEps));

    m.objective_trace.push_back(objective(x, m.w, m.h));
    m.iterations = it + 1;
    if (options.tolerance > 0.0 && m.objective_trace.size() >= 2) {
      const double prev = m.objective_trace[m.objective_trace.size() - 2];
      if (prev - m.objective_trace.back() <= options.tolerance * std::max(prev, kEps)) break;
    }
  }
  return m;
}

TopicModel fit_nmf(const Eigen::MatrixXd& x, std::size_t k, const NmfOptions& options) {
  if ((x.array() < 0.0).any() || !x.allFinite()) throw DataError("topic model input has a negative entry");
  const SparseMat sparse = x.sparseView();
  return fit_nmf(sparse, k, options);
}

std::vector<std::vector<Keyword>> topic_keywords(const TopicModel& model, std::span<const std::string> vocabulary,
                                                 std::size_t m) {
  if (static_cast<std::size_t>(model.h.cols()) != vocabulary.size())
    throw DataError("vocabulary size does not match the topic model");
  std::vector<std::vector<Keyword>> out;
  std::vector<std::size_t> order(vocabulary.size());
  for (Eigen::Index t = 0; t < model.h.rows(); ++t) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t take = std::min(m, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double wa = model.h(t, static_cast<Eigen::Index>(a));
                        const double wb = model.h(t, static_cast<Eigen::Index>(b));
                        if (wa != wb) return wa > wb;
                        return vocabulary[a] < vocabulary[b];
                      });
    std::vector<Keyword> kw;
    for (std::size_t i = 0; i < take; ++i)
      kw.push_back({vocabulary[order[i]], model.h(t, static_cast<Eigen::Index>(order[i]))});
    out.push_back(std::move(kw));
  }
  return out;
}

std::vector<std::size_t> assign_topics(const TopicModel& model) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(model.w.rows()));
  for (Eigen::Index r = 0; r < model.w.rows(); ++r) {
    std::size_t best = 0;
    for (Eigen::Index c = 1; c < model.w.cols(); ++c)
      if (model.w(r, c) > model.w(r, static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(c);
    out.push_back(best);
  }
  return out;
}

}  // namespace bpcite
