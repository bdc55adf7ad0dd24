#include <Eigen/QR>
#include <Eigen/SVD>

#include "bpcite/embedding.hpp"
#include "bpcite/errors.hpp"
#include "bpcite/random.hpp"

namespace bpcite {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

void fix_signs(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    Eigen::Index arg = 0;
    components.row(r).cwiseAbs().maxCoeff(&arg);
    if (components(r, arg) < 0.0) components.row(r) *= -1.0;
  }
}

}  // namespace

SvdModel::SvdModel(Eigen::MatrixXd components, Eigen::VectorXd singular_values)
    : components_(std::move(components)), singular_values_(std::move(singular_values)) {
  if (components_.rows() != singular_values_.size())
    throw ModelError("svd component count and singular value count differ");
}

SvdModel SvdModel::fit(const SparseMat& matrix, std::size_t k, std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(matrix.rows());
  const auto cols = static_cast<std::size_t>(matrix.cols());
  const std::size_t smaller = std::min(rows, cols);
  if (k == 0 || k > smaller)
    throw ModelError("svd rank " + std::to_string(k) + " outside [1, " + std::to_string(smaller) + "]");
  const auto kk = static_cast<Eigen::Index>(k);

  Eigen::MatrixXd components;
  Eigen::VectorXd values;
  if (smaller <= kExactLimit) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(matrix), Eigen::ComputeThinV);
    values = svd.singularValues().head(kk);
    components = svd.matrixV().leftCols(kk).transpose();
  } else {
    const auto width = static_cast<Eigen::Index>(std::min(k + kOversampling, smaller));
    Rng rng(seed);
    Eigen::MatrixXd omega(matrix.cols(), width);
    for (Eigen::Index c = 0; c < omega.cols(); ++c)
      for (Eigen::Index r = 0; r < omega.rows(); ++r) omega(r, c) = rng.normal();

    Eigen::MatrixXd range = orthonormal_basis(matrix * omega);
    for (int it = 0; it < kPowerIterations; ++it) {
      Eigen::MatrixXd co_range = orthonormal_basis(matrix.transpose() * range);
      range = orthonormal_basis(matrix * co_range);
    }
    // B = Q^T X is width x cols; decompose B^T = U S W^T so B's right singular vectors are U.
    Eigen::MatrixXd bt = matrix.transpose() * range;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(bt, Eigen::ComputeThinU);
    values = svd.singularValues().head(kk);
    components = svd.matrixU().leftCols(kk).transpose();
  }
  fix_signs(components);
  return SvdModel(std::move(components), std::move(values));
}

Eigen::VectorXd SvdModel::project(const SparseVec& v) const {
  if (v.size() != components_.cols())
    throw ModelError("projection input has dimension " + std::to_string(v.size()) + ", expected " +
                     std::to_string(components_.cols()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(components_.rows());
  for (SparseVec::InnerIterator it(v); it; ++it) out += components_.col(it.index()) * it.value();
  return out;
}

Eigen::VectorXd SvdModel::project(const Eigen::VectorXd& v) const {
  if (v.size() != components_.cols())
    throw ModelError("projection input has dimension " + std::to_string(v.size()) + ", expected " +
                     std::to_string(components_.cols()));
  return components_ * v;
}

nlohmann::json SvdModel::to_json() const {
  return {{"components", json_util::matrix_to_json(components_)},
          {"singular_values", json_util::vector_to_json(singular_values_)}};
}

SvdModel SvdModel::from_json(const nlohmann::json& j) {
  return SvdModel(json_util::matrix_from_json(j.at("components")), json_util::vector_from_json(j.at("singular_values")));
}

}  // namespace bpcite
