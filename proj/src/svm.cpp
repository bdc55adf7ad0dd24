#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "bpcite/classifier.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInitialEps = 1e-3;
constexpr double kFinalEps = 1e-13;

// Dual: min 1/2 a^T Q a - e^T a  s.t. y^T a = 0, 0 <= a <= C, Q_ij = y_i y_j K_ij.
class DualSolver {
 public:
  DualSolver(const Eigen::MatrixXd& gram, std::span<const int> y, double c)
      : gram_(gram), y_(y), c_(c), n_(static_cast<Eigen::Index>(y.size())) {
    alpha_ = Eigen::VectorXd::Zero(n_);
    grad_ = Eigen::VectorXd::Constant(n_, -1.0);
  }

  // Returns the number of pair updates; stops when the maximal KKT violation <= eps.
  std::size_t run(double eps, std::size_t budget) {
    std::size_t iters = 0;
    while (iters < budget) {
      Eigen::Index i = -1, j = -1;
      if (!select(eps, i, j)) break;
      update(i, j);
      ++iters;
    }
    return iters;
  }

  void reset_gradient(const Eigen::VectorXd& margins) {
    for (Eigen::Index t = 0; t < n_; ++t) grad_[t] = y_[t] * margins[t] - 1.0;
  }

  const Eigen::VectorXd& alpha() const { return alpha_; }

 private:
  bool at_upper(Eigen::Index t) const { return alpha_[t] >= c_; }
  bool at_lower(Eigen::Index t) const { return alpha_[t] <= 0.0; }

  bool select(double eps, Eigen::Index& out_i, Eigen::Index& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n_; ++t) {
      if (y_[t] == 1) {
        if (!at_upper(t) && -grad_[t] >= gmax) gmax = -grad_[t], i = t;
      } else {
        if (!at_lower(t) && grad_[t] >= gmax) gmax = grad_[t], i = t;
      }
    }
    if (i < 0) return false;
    auto ki = gram_.col(i);
    const double kii = gram_(i, i);
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n_; ++t) {
      double diff = 0.0;
      if (y_[t] == 1) {
        if (at_lower(t)) continue;
        diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
      } else {
        if (at_upper(t)) continue;
        diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
      }
      if (diff > 0.0) {
        double quad = kii + gram_(t, t) - 2.0 * ki[t];
        if (quad <= 0.0) quad = kTau;
        const double gain = -(diff * diff) / quad;
        if (gain <= best) best = gain, j = t;
      }
    }
    if (gmax + gmax2 < eps || j < 0) return false;
    out_i = i;
    out_j = j;
    return true;
  }

  void update(Eigen::Index i, Eigen::Index j) {
    auto ki = gram_.col(i);
    auto kj = gram_.col(j);
    const double yi = y_[i], yj = y_[j];
    const double qij = yi * yj * ki[j];
    const double old_i = alpha_[i], old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = gram_(i, i) + gram_(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) aj = 0.0, ai = diff;
      } else {
        if (ai < 0.0) ai = 0.0, aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c_) ai = c_, aj = c_ - diff;
      } else {
        if (aj > c_) aj = c_, ai = c_ + diff;
      }
    } else {
      double quad = gram_(i, i) + gram_(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) ai = c_, aj = sum - c_;
      } else {
        if (aj < 0.0) aj = 0.0, ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) aj = c_, ai = sum - c_;
      } else {
        if (ai < 0.0) ai = 0.0, aj = sum;
      }
    }
    const double di = (ai - old_i) * yi;
    const double dj = (aj - old_j) * yj;
    for (Eigen::Index t = 0; t < n_; ++t) grad_[t] += y_[t] * (ki[t] * di + kj[t] * dj);
  }

  const Eigen::MatrixXd& gram_;
  std::span<const int> y_;
  double c_;
  Eigen::Index n_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd grad_;
};

// Midpoint of the minimizing interval of sum_i hinge(1 - y_i (s_i + b)).
double optimal_bias(const Eigen::VectorXd& s, std::span<const int> y) {
  std::vector<double> breaks;
  breaks.reserve(y.size());
  std::size_t positives = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    if (y[t] == 1) {
      breaks.push_back(1.0 - s[ti]);
      ++positives;
    } else {
      breaks.push_back(-1.0 - s[ti]);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  return 0.5 * (breaks[positives - 1] + breaks[positives]);
}

void check_problem(const Eigen::MatrixXd& x, std::span<const int> signs, double reg_c) {
  if (!(reg_c > 0.0) || !std::isfinite(reg_c)) throw ConfigError("regularization C must be positive and finite");
  if (static_cast<std::size_t>(x.rows()) != signs.size()) throw DataError("svm rows and labels differ in length");
  bool pos = false, neg = false;
  for (int s : signs) {
    if (s == 1) pos = true;
    else if (s == -1) neg = true;
    else throw DataError("svm labels must be +1 or -1");
  }
  if (!pos || !neg) throw DataError("svm training needs both positive and negative examples");
}

}  // namespace

double hinge_objective(const Eigen::MatrixXd& x, std::span<const int> signs, const Eigen::VectorXd& w, double b,
                       double reg_c) {
  const Eigen::VectorXd s = x * w;
  double loss = 0.0;
  for (std::size_t t = 0; t < signs.size(); ++t)
    loss += std::max(0.0, 1.0 - signs[t] * (s[static_cast<Eigen::Index>(t)] + b));
  return 0.5 * w.squaredNorm() + reg_c * loss;
}

BinarySvm train_binary_svm(const Eigen::MatrixXd& x, std::span<const int> signs, double reg_c,
                           const SvmOptions& options) {
  check_problem(x, signs, reg_c);
  const Eigen::MatrixXd gram = x * x.transpose();
  return train_binary_svm(x, gram, signs, reg_c, options);
}

BinarySvm train_binary_svm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram, std::span<const int> signs,
                           double reg_c, const SvmOptions& options) {
  check_problem(x, signs, reg_c);
  if (gram.rows() != x.rows() || gram.cols() != x.rows()) throw DataError("gram matrix shape does not match rows");

  DualSolver solver(gram, signs, reg_c);
  Eigen::VectorXd ys(x.rows());
  for (Eigen::Index t = 0; t < ys.size(); ++t) ys[t] = signs[static_cast<std::size_t>(t)];

  BinarySvm out;
  double eps = kInitialEps;
  for (;;) {
    out.iterations += solver.run(eps, options.max_iterations - out.iterations);
    out.weights = x.transpose() * solver.alpha().cwiseProduct(ys);
    const Eigen::VectorXd margins = x * out.weights;
    solver.reset_gradient(margins);
    out.bias = optimal_bias(margins, signs);
    out.primal = hinge_objective(x, signs, out.weights, out.bias, reg_c);
    out.dual = solver.alpha().sum() - 0.5 * out.weights.squaredNorm();
    const double gap = out.primal - out.dual;
    if (gap <= options.gap_tolerance * std::max(1.0, std::abs(out.primal))) break;
    if (out.iterations >= options.max_iterations) {
      spdlog::warn("svm stopped at the iteration cap with relative gap {:.3g}", gap / std::max(1.0, out.primal));
      break;
    }
    if (eps <= kFinalEps) {
      spdlog::warn("svm reached the KKT floor with relative gap {:.3g}", gap / std::max(1.0, out.primal));
      break;
    }
    eps *= 0.1;
  }
  return out;
}

LinearOvrModel train_ovr(const Eigen::MatrixXd& x, std::span<const BpId> labels, double reg_c,
                         const SvmOptions& options) {
  return train_ovr(x, Eigen::MatrixXd(x * x.transpose()), labels, reg_c, options);
}

LinearOvrModel train_ovr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram, std::span<const BpId> labels,
                         double reg_c, const SvmOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw DataError("rows and labels differ in length");
  std::vector<BpId> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw DataError("one-vs-rest training needs at least two classes");

  LinearOvrModel model;
  model.classes = classes;
  model.reg_c = reg_c;
  model.weights.resize(static_cast<Eigen::Index>(classes.size()), x.cols());
  model.biases.resize(static_cast<Eigen::Index>(classes.size()));
  std::vector<int> signs(labels.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t t = 0; t < labels.size(); ++t) signs[t] = labels[t] == classes[c] ? 1 : -1;
    BinarySvm svm;
    try {
      svm = train_binary_svm(x, gram, signs, reg_c, options);
    } catch (const DataError& e) {
      throw DataError("class " + std::to_string(classes[c]) + ": " + e.what());
    }
    model.weights.row(static_cast<Eigen::Index>(c)) = svm.weights.transpose();
    model.biases[static_cast<Eigen::Index>(c)] = svm.bias;
  }
  return model;
}

Eigen::VectorXd decision_scores(const LinearOvrModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.weights.cols())
    throw ModelError("classifier input has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(model.weights.cols()));
  return model.weights * x + model.biases;
}

}  // namespace bpcite
