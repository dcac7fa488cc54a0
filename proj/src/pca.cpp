#include "bgcmeta/pca.hpp"

#include "bgcmeta/error.hpp"

#include <Eigen/SVD>

#include <string>

namespace bgcmeta {

Eigen::VectorXd PcaBasis::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != mean.size()) throw InputError("PCA project: dimension mismatch");
  return components.transpose() * (x - mean);
}

Eigen::VectorXd PcaBasis::reconstruct(const Eigen::Ref<const Eigen::VectorXd>& scores) const {
  if (scores.size() != components.cols()) throw InputError("PCA reconstruct: score count mismatch");
  return mean + components * scores;
}

PcaBasis fit_pca(const Eigen::MatrixXd& data, int components) {
  const auto n = data.cols();
  if (components < 1) throw InputError("PCA needs at least one component");
  if (n < components) {
    throw InputError("PCA with " + std::to_string(components) + " components needs at least as many samples, got " +
                     std::to_string(n));
  }
  if (components > data.rows()) throw InputError("PCA: more components than dimensions");
  if (!data.allFinite()) throw InputError("PCA input contains non-finite values");

  PcaBasis basis;
  basis.mean = data.rowwise().mean();
  const Eigen::MatrixXd centred = data.colwise() - basis.mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU);
  basis.components = svd.matrixU().leftCols(components);
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  basis.explained_variance = svd.singularValues().head(components).array().square() / denom;

  for (Eigen::Index c = 0; c < components; ++c) {
    Eigen::Index imax = 0;
    basis.components.col(c).cwiseAbs().maxCoeff(&imax);
    if (basis.components(imax, c) < 0.0) basis.components.col(c) *= -1.0;
  }
  return basis;
}

}  // namespace bgcmeta
