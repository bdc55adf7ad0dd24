#include <algorithm>
#include <limits>
#include <map>

#include <spdlog/spdlog.h>

#include "bpcite/classifier.hpp"
#include "bpcite/embedding.hpp"
#include "bpcite/errors.hpp"
#include "bpcite/random.hpp"

namespace bpcite {

namespace {

constexpr double kProbabilityFloor = 1e-300;

std::vector<BpId> distinct_sorted(std::span<const BpId> labels) {
  std::vector<BpId> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Eigen::Index> to_index(const std::vector<std::size_t>& rows) {
  return {rows.begin(), rows.end()};
}

}  // namespace

std::size_t argmax(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw DataError("argmax of an empty vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  return best;
}

Eigen::VectorXd normalize_simplex(const Eigen::VectorXd& raw) {
  Eigen::VectorXd p = raw.cwiseMax(kProbabilityFloor);
  return p / p.sum();
}

Eigen::VectorXd CalibratedClassifier::raw_probabilities(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd scores = decision_scores(model, x);
  Eigen::VectorXd out(scores.size());
  for (Eigen::Index c = 0; c < scores.size(); ++c)
    out[c] = calibrator.params[static_cast<std::size_t>(c)].probability(scores[c]);
  return out;
}

Eigen::VectorXd CalibratedClassifier::predict_proba(const Eigen::VectorXd& x) const {
  return normalize_simplex(raw_probabilities(x));
}

BpId CalibratedClassifier::predict(const Eigen::VectorXd& x) const { return model.classes[argmax(predict_proba(x))]; }

std::size_t CalibratedClassifier::class_index(BpId bp) const {
  auto it = std::lower_bound(model.classes.begin(), model.classes.end(), bp);
  if (it == model.classes.end() || *it != bp)
    throw ConfigError("binding precedent " + std::to_string(bp) + " is not a classifier class");
  return static_cast<std::size_t>(it - model.classes.begin());
}

nlohmann::json CalibratedClassifier::to_json() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["classes"] = model.classes;
  j["weights"] = json_util::matrix_to_json(model.weights);
  j["biases"] = json_util::vector_to_json(model.biases);
  j["reg_C"] = model.reg_c;
  auto platt = nlohmann::json::array();
  for (const auto& p : calibrator.params) platt.push_back({{"A", p.a}, {"B", p.b}});
  j["platt"] = platt;
  j["embedding_fingerprint"] = embedding_fingerprint;
  return j;
}

CalibratedClassifier CalibratedClassifier::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormat) throw ModelError("not a classifier artifact (format tag mismatch)");
  CalibratedClassifier clf;
  clf.model.classes = j.at("classes").get<std::vector<BpId>>();
  clf.model.weights = json_util::matrix_from_json(j.at("weights"));
  clf.model.biases = json_util::vector_from_json(j.at("biases"));
  clf.model.reg_c = j.at("reg_C").get<double>();
  for (const auto& p : j.at("platt")) clf.calibrator.params.push_back({p.at("A").get<double>(), p.at("B").get<double>()});
  clf.calibrator.classes = clf.model.classes;
  clf.embedding_fingerprint = j.at("embedding_fingerprint").get<std::string>();
  const auto n = clf.model.classes.size();
  if (static_cast<std::size_t>(clf.model.weights.rows()) != n || static_cast<std::size_t>(clf.model.biases.size()) != n ||
      clf.calibrator.params.size() != n)
    throw ModelError("classifier artifact has inconsistent class counts");
  if (!std::is_sorted(clf.model.classes.begin(), clf.model.classes.end()))
    throw ModelError("classifier artifact classes are not sorted");
  if (!clf.model.weights.allFinite() || !clf.model.biases.allFinite())
    throw ModelError("classifier artifact has non-finite weights");
  return clf;
}

Eigen::MatrixXd out_of_fold_scores(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram,
                                   std::span<const BpId> labels, const TrainOptions& options) {
  const auto classes = distinct_sorted(labels);
  const std::size_t folds = options.calibration_folds;
  if (folds < 2) throw ConfigError("calibration needs at least 2 folds");

  std::vector<std::size_t> fold_of(labels.size());
  for (BpId bp : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == bp) members.push_back(i);
    if (members.size() < folds)
      throw DataError("class " + std::to_string(bp) + " has " + std::to_string(members.size()) +
                      " training rows; calibration needs at least " + std::to_string(folds));
    Rng rng(mix_seed(options.seed, "calibration:" + std::to_string(bp)));
    rng.shuffle(members);
    for (std::size_t r = 0; r < members.size(); ++r) fold_of[members[r]] = r % folds;
  }

  Eigen::MatrixXd scores(x.rows(), static_cast<Eigen::Index>(classes.size()));
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, held;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold_of[i] == f ? held : train).push_back(i);
    const auto ti = to_index(train);
    std::vector<BpId> ty;
    for (auto i : train) ty.push_back(labels[i]);
    const Eigen::MatrixXd tx = x(ti, Eigen::all);
    const Eigen::MatrixXd tg = gram(ti, ti);
    const auto model = train_ovr(tx, tg, ty, options.reg_c, options.svm);
    for (auto i : held) scores.row(static_cast<Eigen::Index>(i)) = decision_scores(model, x.row(static_cast<Eigen::Index>(i)).transpose()).transpose();
  }
  return scores;
}

CalibratedClassifier train_calibrated(const Eigen::MatrixXd& x, std::span<const BpId> labels,
                                      const TrainOptions& options, std::string embedding_fingerprint) {
  const Eigen::MatrixXd gram = x * x.transpose();
  return train_calibrated(x, gram, labels, options, std::move(embedding_fingerprint));
}

CalibratedClassifier train_calibrated(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gram,
                                      std::span<const BpId> labels, const TrainOptions& options,
                                      std::string embedding_fingerprint) {
  CalibratedClassifier clf;
  clf.model = train_ovr(x, gram, labels, options.reg_c, options.svm);
  const Eigen::MatrixXd oof = out_of_fold_scores(x, gram, labels, options);
  clf.calibrator = fit_platt(oof, labels, clf.model.classes, options.platt);
  clf.embedding_fingerprint = std::move(embedding_fingerprint);
  return clf;
}

EvalReport evaluate_predictions(std::span<const BpId> classes, std::span<const BpId> truth,
                                std::span<const BpId> predicted) {
  if (truth.size() != predicted.size()) throw DataError("truth and predictions differ in length");
  if (truth.empty()) throw DataError("cannot evaluate an empty set");
  EvalReport r;
  r.classes.assign(classes.begin(), classes.end());
  for (BpId t : truth) r.classes.push_back(t);
  for (BpId p : predicted) r.classes.push_back(p);
  r.classes = distinct_sorted(r.classes);
  std::map<BpId, std::size_t> index;
  for (std::size_t i = 0; i < r.classes.size(); ++i) index[r.classes[i]] = i;
  const std::size_t k = r.classes.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion[index[truth[i]]][index[predicted[i]]];
  r.total = truth.size();

  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) correct += r.confusion[c][c];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t support = 0, predicted_c = 0;
    for (std::size_t o = 0; o < k; ++o) {
      support += r.confusion[c][o];
      predicted_c += r.confusion[o][c];
    }
    if (support == 0) continue;
    const double tp = static_cast<double>(r.confusion[c][c]);
    const double precision = predicted_c == 0 ? 0.0 : tp / static_cast<double>(predicted_c);
    const double recall = tp / static_cast<double>(support);
    const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    const double weight = static_cast<double>(support) / static_cast<double>(r.total);
    r.precision += weight * precision;
    r.recall += weight * recall;
    r.f1 += weight * f1;
  }
  return r;
}

EvalReport evaluate(const CalibratedClassifier& clf, const Eigen::MatrixXd& x, std::span<const BpId> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw DataError("rows and labels differ in length");
  std::vector<BpId> predicted;
  predicted.reserve(labels.size());
  for (Eigen::Index r = 0; r < x.rows(); ++r) predicted.push_back(clf.predict(x.row(r).transpose()));
  return evaluate_predictions(clf.classes(), labels, predicted);
}

nlohmann::json EvalReport::to_json() const {
  return {{"classes", classes}, {"confusion", confusion}, {"total", total},   {"accuracy", accuracy},
          {"precision", precision}, {"recall", recall},   {"f1", f1}};
}

GridResult grid_search(const Eigen::MatrixXd& train_x, std::span<const BpId> train_y, const Eigen::MatrixXd& val_x,
                       std::span<const BpId> val_y, std::span<const double> grid, const TrainOptions& base,
                       std::string embedding_fingerprint) {
  if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
  std::vector<double> values(grid.begin(), grid.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  const Eigen::MatrixXd gram = train_x * train_x.transpose();
  GridResult best;
  double best_accuracy = -1.0;
  for (double c : values) {
    TrainOptions opts = base;
    opts.reg_c = c;
    auto clf = train_calibrated(train_x, gram, train_y, opts, embedding_fingerprint);
    auto report = evaluate(clf, val_x, val_y);
    spdlog::info("grid C={:g}: validation accuracy {:.4f}", c, report.accuracy);
    best.accuracy_by_c.emplace_back(c, report.accuracy);
    // Ascending order: strict improvement keeps the smaller C on ties.
    if (report.accuracy > best_accuracy) {
      best_accuracy = report.accuracy;
      best.reg_c = c;
      best.report = std::move(report);
      best.classifier = std::move(clf);
    }
  }
  return best;
}

}  // namespace bpcite
