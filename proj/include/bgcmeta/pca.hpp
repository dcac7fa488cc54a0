#pragma once

#include <Eigen/Core>

namespace bgcmeta {

/// Principal axes of a set of column vectors, fitted by SVD of the
/// mean-centred data matrix.
struct PcaBasis {
  Eigen::VectorXd mean;                // length M
  Eigen::MatrixXd components;          // M x P, orthonormal columns
  Eigen::VectorXd explained_variance;  // length P, nonincreasing

  Eigen::Index dimension() const { return mean.size(); }
  Eigen::Index rank() const { return components.cols(); }

  /// Uᵀ(x - mean)
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// mean + U scores
  Eigen::VectorXd reconstruct(const Eigen::Ref<const Eigen::VectorXd>& scores) const;
};

/// Keeps the leading `components` left singular vectors of the centred
/// M x N matrix `data` (one sample per column). Each component is signed so
/// that its largest-magnitude element is positive.
PcaBasis fit_pca(const Eigen::MatrixXd& data, int components = 5);

}  // namespace bgcmeta
