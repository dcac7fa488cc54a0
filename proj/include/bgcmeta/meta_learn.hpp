#pragma once

#include "bgcmeta/metrics.hpp"
#include "bgcmeta/mlp.hpp"
#include "bgcmeta/synth.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bgcmeta {

/// Update rule for outer (meta) and region-adaptation steps.
enum class Optimizer { gradient_descent, adam };

Optimizer parse_optimizer(const std::string& name);
std::string to_string(Optimizer o);

/// A synthetic dataset prepared for training: transformed inputs, log10
/// targets and z-scored SIOP scores, one column per record.
struct TrainingSet {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  Eigen::MatrixXd siop;

  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
  Batch gather(std::span<const std::size_t> index) const;
};

InputTransform fit_input_transform(const SyntheticDataset& dataset);
TrainingSet make_training_set(const SyntheticDataset& dataset, const InputTransform& transform);

struct Task {
  Batch support;
  Batch query;
  Eigen::VectorXd centre_siop;
  std::size_t anchor = 0;
  std::vector<std::size_t> support_index;
  std::vector<std::size_t> query_index;
};

/// Anchor drawn uniformly; the anchor and its 2k-1 nearest neighbours in
/// SIOP-score space are shuffled and halved into support and query.
Task sample_task(const TrainingSet& data, std::size_t k, std::uint64_t seed);
/// Tasks with k drawn uniformly from [k_min, k_max] per task.
std::vector<Task> sample_tasks(const TrainingSet& data, std::size_t count, std::size_t k_min, std::size_t k_max,
                               std::uint64_t seed);

/// `steps` full-batch gradient steps on the support loss. Returns a copy.
MlpParams inner_adapt(const MlpParams& params, const Batch& support, double lr, int steps);

struct TrainConfig {
  double inner_lr = 0.01;
  double outer_lr = 0.001;
  int inner_steps = 1;
  int epochs = 200;
  std::size_t tasks = 200;
  std::size_t k_min = 5;
  std::size_t k_max = 50;
  std::uint64_t seed = 0;
  bool resample_tasks = false;
  Optimizer optimizer = Optimizer::adam;
  unsigned threads = 1;
  Architecture architecture;
};

/// Moment estimates for Adam; empty for plain gradient descent.
struct OptimizerState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

/// Applies one update of `grad` to `theta` with learning rate `lr`.
void optimizer_step(Optimizer kind, OptimizerState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad,
                    double lr);

/// Resumable training state carried between runs.
struct MetaTrainState {
  MlpParams best;     // lowest meta-loss seen so far
  MlpParams current;  // parameters after the last outer update
  OptimizerState optimizer;
  int epochs_done = 0;
  double best_loss = 0.0;
  int best_epoch = -1;  // -1 until the first epoch has run
};

struct MetaTrainResult {
  MlpParams params;               // lowest meta-loss seen
  std::vector<double> meta_loss;  // one entry per epoch of this run
  MetaTrainState state;
};

/// Mean query loss after inner adaptation over a task set.
double meta_loss(const MlpParams& params, std::span<const Task> tasks, double inner_lr, int inner_steps,
                 unsigned threads = 1);

/// First-order meta-pretraining. `resume` continues a previous run with the
/// same config and seed up to config.epochs in total; otherwise parameters
/// are freshly initialised.
MetaTrainResult meta_pretrain(const TrainingSet& data, const InputTransform& transform, const TrainConfig& config,
                              const MetaTrainState* resume = nullptr,
                              const std::function<void(int, double)>& on_epoch = {});
MetaTrainResult meta_pretrain(const SyntheticDataset& dataset, const TrainConfig& config);

struct AdaptConfig {
  double lr = 3e-4; // Adam from a pretrained start; 1e-3 knocks it off the base too early
  int iterations = 500;
  int patience = 25;
  Optimizer optimizer = Optimizer::adam;
};

struct AdaptResult {
  MlpParams params;
  int best_iteration = 0;  // 0 means the base parameters were kept
  double base_query_loss = 0.0;
  double best_query_loss = 0.0;
  std::vector<double> query_loss;  // after each iteration
};

/// Region-specific fine-tuning from the base parameters: full-batch steps on
/// the support loss, returning the iterate with the lowest query loss.
AdaptResult region_adapt(const MlpParams& base, const Batch& support, const Batch& query, const AdaptConfig& config);
/// Fixed number of full-batch steps without a query set.
MlpParams region_fit(const MlpParams& base, const Batch& data, const AdaptConfig& config, int iterations);

/// One in situ match-up: R_rs spectrum plus measured concentrations.
struct RegionSample {
  std::string timestamp;
  double tss = 0.0;
  double doc = 0.0;
  double tchla = 0.0;
  Spectrum rrs;
};

/// Transforms a region with the model's input transform; targets in log10.
Batch region_batch(const MlpParams& params, std::span<const RegionSample> region);

/// Linear-space predictions for a set of spectra.
std::vector<std::array<double, 3>> predict(const MlpParams& params, std::span<const Spectrum> spectra,
                                           unsigned threads = 1);

struct CvPrediction {
  std::size_t index = 0;
  int fold = 0;
  std::array<double, 3> predicted{};
  std::array<double, 3> measured{};
};

struct CvResult {
  std::vector<CvPrediction> predictions;  // ordered by record index
  std::array<RetrievalMetrics, 3> metrics;
  std::vector<int> best_iterations;       // per fold
};

/// Seeded fold assignment; record at shuffled position p goes to fold p % folds.
std::vector<int> assign_folds(std::size_t count, int folds, std::uint64_t seed);

CvResult cross_validate(const MlpParams& base, std::span<const RegionSample> region, int folds,
                        const AdaptConfig& config, std::uint64_t seed, unsigned threads = 1);

}  // namespace bgcmeta
