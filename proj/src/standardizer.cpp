#include <cmath>

#include "bpcite/embedding.hpp"
#include "bpcite/errors.hpp"

namespace bpcite {

Standardizer::Standardizer(Eigen::VectorXd mean, Eigen::VectorXd stdev) : mean_(std::move(mean)), stdev_(std::move(stdev)) {
  if (mean_.size() != stdev_.size()) throw ModelError("standardizer mean/stdev sizes differ");
  if ((stdev_.array() <= 0.0).any()) throw ModelError("standardizer stdev must be positive");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw DataError("standardizer needs at least 2 rows");
  const double n = static_cast<double>(rows.rows());
  Eigen::VectorXd mean = rows.colwise().sum().transpose() / n;
  Eigen::VectorXd stdev(rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double var = (rows.col(c).array() - mean[c]).square().sum() / n;
    const double sd = std::sqrt(var);
    stdev[c] = sd > 1e-12 * std::max(1.0, std::abs(mean[c])) ? sd : 1.0;
  }
  return Standardizer(std::move(mean), std::move(stdev));
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& v) const {
  if (v.size() != mean_.size())
    throw ModelError("standardizer input has dimension " + std::to_string(v.size()) + ", expected " +
                     std::to_string(mean_.size()));
  return ((v - mean_).array() / stdev_.array()).matrix();
}

nlohmann::json Standardizer::to_json() const {
  return {{"mean", json_util::vector_to_json(mean_)}, {"stdev", json_util::vector_to_json(stdev_)}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  return Standardizer(json_util::vector_from_json(j.at("mean")), json_util::vector_from_json(j.at("stdev")));
}

}  // namespace bpcite
