#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace bgcmeta {

enum class DpGmmInit { random, kmeans };

struct DpGmmConfig {
  int max_components = 30;
  double weight_concentration = 0.0;  // <= 0 means 1 / max_components
  int max_iterations = 500;
  double tolerance = 1e-5;  // on the per-sample change of the ELBO
  double jitter = 1e-6;
  double prune_weight = 1e-3;
  DpGmmInit init = DpGmmInit::random;  // soft random responsibilities, or hard k-means labels
  int kmeans_iterations = 20;
  std::uint64_t seed = 0;
};

/// Finite Gaussian mixture in feature space.
struct GmmModel {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<Eigen::MatrixXd> cholesky;  // lower factors of covariances
  int truncation = 0;

  std::size_t components() const { return weights.size(); }
  Eigen::Index dimension() const { return means.empty() ? 0 : means.front().size(); }
  /// Mixture log density at x.
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Recomputes `cholesky`, adding diagonal jitter where a factorization fails.
  void factorize(double jitter);
};

struct DpGmmFit {
  GmmModel model;
  std::vector<double> elbo;  // one entry per variational sweep
  int iterations = 0;
  bool converged = false;
};

/// Truncated stick-breaking variational inference for a Dirichlet-process
/// mixture with Gaussian-Wishart component priors. `data` holds one sample
/// per column.
DpGmmFit fit_dpgmm(const Eigen::MatrixXd& data, const DpGmmConfig& config);

/// Ancestral draws, one per column: component by weight, then mean + L z.
/// Draw k uses its own RNG stream derived from (seed, k).
Eigen::MatrixXd sample_gmm(const GmmModel& model, std::size_t count, std::uint64_t seed);
Eigen::VectorXd sample_gmm_one(const GmmModel& model, std::uint64_t seed, std::uint64_t index);

/// Stream seed for item `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace bgcmeta
