#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bpcite/corpus.hpp"

namespace bpcite {

// ---------------------------------------------------------------------------
// Binary linear SVM

struct SvmOptions {
  /// Stop once (primal - dual) <= gap_tolerance * max(1, |primal|).
  double gap_tolerance = 1e-6;
  std::size_t max_iterations = 20'000'000;
};

struct BinarySvm {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  std::size_t iterations = 0;
};

/// Minimizes 1/2 |w|^2 + C * sum max(0, 1 - y_i (w.x_i + b)) with an
/// unregularized bias. Solved in the dual by two-coordinate descent
/// (maximal-violating pair, second-order selection) over a precomputed Gram
/// matrix; fully deterministic. `signs` holds +1/-1 per row of `x`.
BinarySvm train_binary_svm(const Eigen::MatrixXd& x, std::span<const int> signs, double reg_c,
                           const SvmOptions& options = {});

/// Same, reusing a Gram matrix x * x^T computed by the caller.
BinarySvm train_binary_svm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram, std::span<const int> signs,
                           double reg_c, const SvmOptions& options = {});

double hinge_objective(const Eigen::MatrixXd& x, std::span<const int> signs, const Eigen::VectorXd& w, double b,
                       double reg_c);

// ---------------------------------------------------------------------------
// One-vs-rest

struct LinearOvrModel {
  std::vector<BpId> classes;  // ascending
  Eigen::MatrixXd weights;    // classes x dim
  Eigen::VectorXd biases;
  double reg_c = 1.0;

  std::size_t dim() const { return static_cast<std::size_t>(weights.cols()); }
};

LinearOvrModel train_ovr(const Eigen::MatrixXd& x, std::span<const BpId> labels, double reg_c,
                         const SvmOptions& options = {});
LinearOvrModel train_ovr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram, std::span<const BpId> labels,
                         double reg_c, const SvmOptions& options = {});

/// score_c = w_c . x + b_c
Eigen::VectorXd decision_scores(const LinearOvrModel& model, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Platt calibration

/// P(positive | s) = 1 / (1 + exp(a * s + b)); a < 0 when positives score higher.
struct SigmoidParams {
  double a = 0.0;
  double b = 0.0;
  double probability(double score) const;
};

struct PlattOptions {
  double gradient_tolerance = 1e-10;
  int max_iterations = 200;
};

/// Newton's method with backtracking on the NLL against Platt's smoothed
/// targets (N+ + 1)/(N+ + 2) and 1/(N- + 2). Throws DataError when every
/// label is identical.
SigmoidParams fit_sigmoid(std::span<const double> scores, std::span<const bool> positive,
                          const PlattOptions& options = {});

struct PlattCalibrator {
  std::vector<BpId> classes;
  std::vector<SigmoidParams> params;
};

/// `scores` is samples x classes (out-of-fold decision scores).
PlattCalibrator fit_platt(const Eigen::MatrixXd& scores, std::span<const BpId> labels,
                          std::span<const BpId> classes, const PlattOptions& options = {});

// ---------------------------------------------------------------------------
// Calibrated classifier

/// Lowest index wins ties.
std::size_t argmax(const Eigen::VectorXd& v);

/// Divides by the sum; entries must be positive.
Eigen::VectorXd normalize_simplex(const Eigen::VectorXd& raw);

struct CalibratedClassifier {
  static constexpr std::string_view kFormat = "bpcite.classifier/1";

  LinearOvrModel model;
  PlattCalibrator calibrator;
  std::string embedding_fingerprint;

  /// Per-class sigmoids before normalization.
  Eigen::VectorXd raw_probabilities(const Eigen::VectorXd& x) const;
  /// Probability simplex over `classes()`.
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const;
  BpId predict(const Eigen::VectorXd& x) const;
  const std::vector<BpId>& classes() const { return model.classes; }
  std::size_t class_index(BpId bp) const;  // throws ConfigError for unknown classes

  nlohmann::json to_json() const;
  static CalibratedClassifier from_json(const nlohmann::json& j);
};

struct TrainOptions {
  double reg_c = 1.0;
  std::size_t calibration_folds = 3;
  std::uint64_t seed = 0;
  SvmOptions svm;
  PlattOptions platt;
};

/// Decision scores for every row, each produced by a model that never saw it.
/// Folds are stratified; every class needs at least `calibration_folds` rows.
Eigen::MatrixXd out_of_fold_scores(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram,
                                   std::span<const BpId> labels, const TrainOptions& options);

/// OvR SVM on all rows + Platt sigmoids fitted on out-of-fold scores.
CalibratedClassifier train_calibrated(const Eigen::MatrixXd& x, std::span<const BpId> labels,
                                      const TrainOptions& options, std::string embedding_fingerprint = {});
CalibratedClassifier train_calibrated(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram,
                                      std::span<const BpId> labels, const TrainOptions& options,
                                      std::string embedding_fingerprint = {});

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
  std::vector<BpId> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t total = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // support-weighted
  double recall = 0.0;
  double f1 = 0.0;

  nlohmann::json to_json() const;
};

EvalReport evaluate_predictions(std::span<const BpId> classes, std::span<const BpId> truth,
                                std::span<const BpId> predicted);
EvalReport evaluate(const CalibratedClassifier& clf, const Eigen::MatrixXd& x, std::span<const BpId> labels);

struct GridResult {
  double reg_c = 0.0;
  EvalReport report;
  CalibratedClassifier classifier;
  std::vector<std::pair<double, double>> accuracy_by_c;
};

inline const std::vector<double>& default_grid() {
  static const std::vector<double> kGrid = {0.01, 0.1, 1.0, 10.0, 100.0};
  return kGrid;
}

/// Highest validation accuracy wins; ties go to the smaller C.
GridResult grid_search(const Eigen::MatrixXd& train_x, std::span<const BpId> train_y, const Eigen::MatrixXd& val_x,
                       std::span<const BpId> val_y, std::span<const double> grid, const TrainOptions& base,
                       std::string embedding_fingerprint = {});

}  // namespace bpcite
