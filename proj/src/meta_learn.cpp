#include "bgcmeta/meta_learn.hpp"

#include "bgcmeta/dpgmm.hpp"
#include "bgcmeta/error.hpp"
#include "bgcmeta/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bgcmeta {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kTaskStream = 0x7461736bULL;

Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd mean = m.rowwise().mean();
  Eigen::VectorXd sd = ((m.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (!(sd[i] > 1e-12)) sd[i] = 1.0;
  }
  return ((m.colwise() - mean).array().colwise() / sd.array()).matrix();
}

Eigen::MatrixXd raw_spectra(const SyntheticDataset& ds) {
  Eigen::MatrixXd raw(kBandCount, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) raw.col(static_cast<Eigen::Index>(i)) = ds.records[i].rrs.values().matrix();
  return raw;
}

}  // namespace

Optimizer parse_optimizer(const std::string& name) {
  if (name == "gd" || name == "sgd" || name == "gradient_descent") return Optimizer::gradient_descent;
  if (name == "adam") return Optimizer::adam;
  throw InputError("unknown optimizer '" + name + "' (expected gd or adam)");
}

std::string to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "gd"; }

Batch TrainingSet::gather(std::span<const std::size_t> index) const {
  Batch b;
  b.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(index.size()));
  b.targets.resize(targets.rows(), static_cast<Eigen::Index>(index.size()));
  for (std::size_t j = 0; j < index.size(); ++j) {
    b.inputs.col(static_cast<Eigen::Index>(j)) = inputs.col(static_cast<Eigen::Index>(index[j]));
    b.targets.col(static_cast<Eigen::Index>(j)) = targets.col(static_cast<Eigen::Index>(index[j]));
  }
  return b;
}

InputTransform fit_input_transform(const SyntheticDataset& dataset) {
  return InputTransform::fit(raw_spectra(dataset));
}

TrainingSet make_training_set(const SyntheticDataset& ds, const InputTransform& transform) {
  TrainingSet t;
  const auto n = static_cast<Eigen::Index>(ds.size());
  t.inputs = transform.apply(raw_spectra(ds));
  t.targets.resize(3, n);
  Eigen::MatrixXd scores(kSiopScoreDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = ds.records[static_cast<std::size_t>(i)];
    t.targets(0, i) = std::log10(r.bgc.tss);
    t.targets(1, i) = std::log10(r.bgc.doc);
    t.targets(2, i) = std::log10(r.bgc.tchla);
    scores.col(i) = r.siop_scores();
  }
  t.siop = standardize_rows(scores);
  return t;
}

Task sample_task(const TrainingSet& data, std::size_t k, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (k < 1) throw InputError("task size must be at least 1");
  if (n < 2 * k) {
    throw InputError("dataset of " + std::to_string(n) + " records is too small for a task of 2x" + std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t anchor = pick(rng);

  const Eigen::VectorXd dist =
      (data.siop.colwise() - data.siop.col(static_cast<Eigen::Index>(anchor))).colwise().squaredNorm().transpose();
  std::vector<std::size_t> order;
  order.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != anchor) order.push_back(i);
  }
  const auto closer = [&](std::size_t a, std::size_t b) {
    const double da = dist[static_cast<Eigen::Index>(a)];
    const double db = dist[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  const auto take = static_cast<std::ptrdiff_t>(2 * k - 1);
  std::partial_sort(order.begin(), order.begin() + take, order.end(), closer);

  std::vector<std::size_t> members{anchor};
  members.insert(members.end(), order.begin(), order.begin() + take);
  std::shuffle(members.begin(), members.end(), rng);

  Task task;
  task.anchor = anchor;
  task.centre_siop = data.siop.col(static_cast<Eigen::Index>(anchor));
  task.support_index.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
  task.query_index.assign(members.begin() + static_cast<std::ptrdiff_t>(k), members.end());
  task.support = data.gather(task.support_index);
  task.query = data.gather(task.query_index);
  return task;
}

std::vector<Task> sample_tasks(const TrainingSet& data, std::size_t count, std::size_t k_min, std::size_t k_max,
                               std::uint64_t seed) {
  if (k_min < 1 || k_max < k_min) throw InputError("task size range must satisfy 1 <= k_min <= k_max");
  std::vector<Task> tasks;
  tasks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto task_seed = derive_seed(seed, i);
    std::mt19937_64 rng(task_seed);
    std::uniform_int_distribution<std::size_t> size(k_min, k_max);
    const std::size_t k = std::min(size(rng), data.size() / 2);
    tasks.push_back(sample_task(data, k, derive_seed(task_seed, 1)));
  }
  return tasks;
}

MlpParams inner_adapt(const MlpParams& params, const Batch& support, double lr, int steps) {
  if (steps < 1) throw InputError("inner adaptation needs at least one step");
  MlpParams phi = params;
  for (int s = 0; s < steps; ++s) {
    const auto lg = loss_grad(phi, support);
    phi.theta() -= lr * lg.grad;
  }
  return phi;
}

void optimizer_step(Optimizer kind, OptimizerState& state, Eigen::VectorXd& theta, const Eigen::VectorXd& grad,
                    double lr) {
  if (kind == Optimizer::gradient_descent) {
    theta -= lr * grad;
    ++state.step;
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (state.m.size() != theta.size()) {
    state.m = Eigen::VectorXd::Zero(theta.size());
    state.v = Eigen::VectorXd::Zero(theta.size());
    state.step = 0;
  }
  ++state.step;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  theta.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

double meta_loss(const MlpParams& params, std::span<const Task> tasks, double inner_lr, int inner_steps,
                 unsigned threads) {
  if (tasks.empty()) throw InputError("meta-loss over an empty task set");
  std::vector<double> losses(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    losses[i] = loss(inner_adapt(params, tasks[i].support, inner_lr, inner_steps), tasks[i].query);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(tasks.size());
}

MetaTrainResult meta_pretrain(const TrainingSet& data, const InputTransform& transform, const TrainConfig& config,
                              const MetaTrainState* resume, const std::function<void(int, double)>& on_epoch) {
  if (data.size() == 0) throw InputError("meta-pretraining needs a nonempty dataset");
  if (!(config.inner_lr >= 0.0) || !(config.outer_lr > 0.0)) throw InputError("learning rates must be positive");
  if (config.tasks < 1 || config.epochs < 0 || config.inner_steps < 1) throw InputError("invalid training config");

  MetaTrainState state;
  if (resume) {
    state = *resume;
    if (!(state.current.architecture() == config.architecture)) {
      throw InputError("resumed model architecture does not match the config");
    }
  } else {
    state.current = MlpParams::initialize(config.architecture, derive_seed(config.seed, kInitStream), transform,
                                          OutputTransform::fit(data.targets));
    state.best = state.current;
    state.best_loss = std::numeric_limits<double>::infinity();
  }

  auto tasks = sample_tasks(data, config.tasks, config.k_min, config.k_max, derive_seed(config.seed, kTaskStream));
  const Eigen::Index p = state.current.theta().size();
  std::vector<Eigen::VectorXd> grads(tasks.size());
  std::vector<double> losses(tasks.size());

  MetaTrainResult result;
  // epochs is the total; a resumed run only does what is left
  while (state.epochs_done < config.epochs) {
    const int epoch = state.epochs_done + 1;
    if (config.resample_tasks && epoch > 1) {
      tasks = sample_tasks(data, config.tasks, config.k_min, config.k_max,
                           derive_seed(derive_seed(config.seed, kTaskStream), static_cast<std::uint64_t>(epoch)));
    }
    const MlpParams& theta = state.current;
    parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
      const auto phi = inner_adapt(theta, tasks[i].support, config.inner_lr, config.inner_steps);
      auto lg = loss_grad(phi, tasks[i].query);
      losses[i] = lg.loss;
      grads[i] = std::move(lg.grad);
    });
    double j = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      j += losses[i];
      g += grads[i];
    }
    const double inv_b = 1.0 / static_cast<double>(tasks.size());
    j *= inv_b;
    g *= inv_b;
    if (!std::isfinite(j) || !g.allFinite()) {
      throw NumericalError("non-finite meta-loss at epoch " + std::to_string(epoch));
    }
    if (j < state.best_loss) {
      state.best_loss = j;
      state.best_epoch = epoch;
      state.best = state.current;
    }
    optimizer_step(config.optimizer, state.optimizer, state.current.theta(), g, config.outer_lr);
    state.epochs_done = epoch;
    result.meta_loss.push_back(j);
    if (on_epoch) on_epoch(epoch, j);
  }
  result.params = state.best;
  result.state = std::move(state);
  return result;
}

MetaTrainResult meta_pretrain(const SyntheticDataset& dataset, const TrainConfig& config) {
  const auto transform = fit_input_transform(dataset);
  return meta_pretrain(make_training_set(dataset, transform), transform, config);
}

AdaptResult region_adapt(const MlpParams& base, const Batch& support, const Batch& query, const AdaptConfig& config) {
  if (support.size() == 0 || query.size() == 0) throw InputError("region adaptation needs nonempty support and query");
  if (config.iterations < 0 || !(config.lr > 0.0) || config.patience < 1) throw InputError("invalid adaptation config");
  AdaptResult r;
  r.params = base;
  r.base_query_loss = loss(base, query);
  r.best_query_loss = r.base_query_loss;
  MlpParams phi = base;
  OptimizerState opt;
  int since_best = 0;
  for (int it = 1; it <= config.iterations; ++it) {
    const auto lg = loss_grad(phi, support);
    optimizer_step(config.optimizer, opt, phi.theta(), lg.grad, config.lr);
    const double q = loss(phi, query);
    if (!std::isfinite(q)) throw NumericalError("non-finite query loss at adaptation iteration " + std::to_string(it));
    r.query_loss.push_back(q);
    if (q < r.best_query_loss) {
      r.best_query_loss = q;
      r.best_iteration = it;
      r.params = phi;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return r;
}

MlpParams region_fit(const MlpParams& base, const Batch& data, const AdaptConfig& config, int iterations) {
  MlpParams phi = base;
  OptimizerState opt;
  for (int it = 0; it < iterations; ++it) {
    const auto lg = loss_grad(phi, data);
    optimizer_step(config.optimizer, opt, phi.theta(), lg.grad, config.lr);
  }
  return phi;
}

Batch region_batch(const MlpParams& params, std::span<const RegionSample> region) {
  Eigen::MatrixXd raw(kBandCount, static_cast<Eigen::Index>(region.size()));
  Batch b;
  b.targets.resize(3, static_cast<Eigen::Index>(region.size()));
  for (std::size_t i = 0; i < region.size(); ++i) {
    const auto& s = region[i];
    if (!(s.tss > 0.0 && s.doc > 0.0 && s.tchla > 0.0)) {
      throw InputError("region record " + std::to_string(i + 1) + ": concentrations must be positive");
    }
    const auto c = static_cast<Eigen::Index>(i);
    raw.col(c) = s.rrs.values().matrix();
    b.targets(0, c) = std::log10(s.tss);
    b.targets(1, c) = std::log10(s.doc);
    b.targets(2, c) = std::log10(s.tchla);
  }
  b.inputs = params.input().apply(raw);
  return b;
}

std::vector<std::array<double, 3>> predict(const MlpParams& params, std::span<const Spectrum> spectra,
                                           unsigned threads) {
  std::vector<std::array<double, 3>> out(spectra.size());
  parallel_for(spectra.size(), threads, [&](std::size_t i) {
    const Eigen::VectorXd y = params.predict_log(spectra[i]);
    out[i] = {std::pow(10.0, y[0]), std::pow(10.0, y[1]), std::pow(10.0, y[2])};
  });
  return out;
}

std::vector<int> assign_folds(std::size_t count, int folds, std::uint64_t seed) {
  if (folds < 1) throw InputError("fold count must be positive");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(count);
  for (std::size_t p = 0; p < count; ++p) fold[order[p]] = static_cast<int>(p % static_cast<std::size_t>(folds));
  return fold;
}

CvResult cross_validate(const MlpParams& base, std::span<const RegionSample> region, int folds,
                        const AdaptConfig& config, std::uint64_t seed, unsigned threads) {
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (region.size() < static_cast<std::size_t>(folds)) {
    throw InputError("region of " + std::to_string(region.size()) + " records is smaller than the fold count " +
                     std::to_string(folds));
  }
  const auto fold_of = assign_folds(region.size(), folds, seed);
  const Batch all = region_batch(base, region);

  CvResult cv;
  cv.predictions.resize(region.size());
  cv.best_iterations.resize(static_cast<std::size_t>(folds));
  parallel_for(static_cast<std::size_t>(folds), threads, [&](std::size_t f) {
    std::vector<Eigen::Index> sup, qry;
    for (std::size_t i = 0; i < region.size(); ++i) {
      (fold_of[i] == static_cast<int>(f) ? qry : sup).push_back(static_cast<Eigen::Index>(i));
    }
    const Batch support{all.inputs(Eigen::all, sup), all.targets(Eigen::all, sup)};
    const Batch query{all.inputs(Eigen::all, qry), all.targets(Eigen::all, qry)};
    const auto adapted = region_adapt(base, support, query, config);
    cv.best_iterations[f] = adapted.best_iteration;
    const Eigen::MatrixXd y = adapted.params.forward(query.inputs);
    for (std::size_t j = 0; j < qry.size(); ++j) {
      const auto i = static_cast<std::size_t>(qry[j]);
      auto& p = cv.predictions[i];
      p.index = i;
      p.fold = static_cast<int>(f);
      for (int v = 0; v < 3; ++v) p.predicted[static_cast<std::size_t>(v)] = std::pow(10.0, y(v, static_cast<Eigen::Index>(j)));
      p.measured = {region[i].tss, region[i].doc, region[i].tchla};
    }
  });

  for (std::size_t v = 0; v < 3; ++v) {
    std::vector<double> pred, meas;
    for (const auto& p : cv.predictions) {
      pred.push_back(p.predicted[v]);
      meas.push_back(p.measured[v]);
    }
    cv.metrics[v] = retrieval_metrics(pred, meas);
  }
  return cv;
}

}  // namespace bgcmeta
