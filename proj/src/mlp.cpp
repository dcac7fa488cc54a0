#include "bgcmeta/mlp.hpp"

#include "bgcmeta/error.hpp"

#include <cmath>
#include <random>
#include <string>

namespace bgcmeta {

namespace {

struct Offsets {
  Eigen::Index w1, b1, w2, b2, w3, b3, end;
};

Offsets offsets(const Architecture& a) {
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + Eigen::Index{a.hidden1} * a.inputs;
  o.w2 = o.b1 + a.hidden1;
  o.b2 = o.w2 + Eigen::Index{a.hidden2} * a.hidden1;
  o.w3 = o.b2 + a.hidden2;
  o.b3 = o.w3 + Eigen::Index{a.outputs} * a.hidden2;
  o.end = o.b3 + a.outputs;
  return o;
}

}  // namespace

Eigen::Index Architecture::parameter_count() const { return offsets(*this).end; }

InputTransform InputTransform::identity(int width) {
  return {Eigen::VectorXd::Zero(width), Eigen::VectorXd::Ones(width), 1e-5};
}

InputTransform InputTransform::fit(const Eigen::MatrixXd& raw, double offset) {
  if (raw.cols() < 1) throw InputError("input transform needs at least one spectrum");
  InputTransform t;
  t.offset = offset;
  const Eigen::ArrayXXd logs = (raw.array() + offset).log10();
  t.mean = logs.rowwise().mean().matrix();
  t.scale = ((logs.colwise() - t.mean.array()).square().rowwise().mean()).sqrt().matrix();
  for (Eigen::Index i = 0; i < t.scale.size(); ++i) {
    if (!(t.scale[i] > 1e-12)) t.scale[i] = 1.0;
  }
  return t;
}

Eigen::MatrixXd InputTransform::apply(const Eigen::MatrixXd& raw) const {
  if (raw.rows() != mean.size()) throw InputError("input transform: spectrum length mismatch");
  if (!raw.allFinite()) throw InputError("non-finite reflectance input");
  if ((raw.array() + offset <= 0.0).any()) throw InputError("reflectance below -offset cannot be log-transformed");
  return (((raw.array() + offset).log10().colwise() - mean.array()).colwise() / scale.array()).matrix();
}

OutputTransform OutputTransform::identity(int width) {
  return {Eigen::VectorXd::Zero(width), Eigen::VectorXd::Ones(width)};
}

OutputTransform OutputTransform::fit(const Eigen::MatrixXd& targets) {
  if (targets.cols() < 1) throw InputError("output transform needs at least one target");
  OutputTransform t;
  t.mean = targets.rowwise().mean();
  t.scale = ((targets.colwise() - t.mean).array().square().rowwise().mean()).sqrt().matrix();
  for (Eigen::Index i = 0; i < t.scale.size(); ++i) {
    if (!(t.scale[i] > 1e-12)) t.scale[i] = 1.0;
  }
  return t;
}

MlpParams::MlpParams(Architecture arch, Eigen::VectorXd theta, InputTransform input, OutputTransform output)
    : arch_(arch), theta_(std::move(theta)), input_(std::move(input)), output_(std::move(output)) {
  if (output_.mean.size() == 0 && output_.scale.size() == 0) output_ = OutputTransform::identity(arch_.outputs);
  if (output_.mean.size() != arch_.outputs || output_.scale.size() != arch_.outputs) {
    throw InputError("output transform width does not match the architecture");
  }
  if (!(output_.scale.array() > 0.0).all()) throw InputError("output transform scale must be positive");
  if (theta_.size() != arch_.parameter_count()) {
    throw InputError("parameter vector has " + std::to_string(theta_.size()) + " entries, architecture needs " +
                     std::to_string(arch_.parameter_count()));
  }
  if (input_.mean.size() != arch_.inputs || input_.scale.size() != arch_.inputs) {
    throw InputError("input transform width does not match the architecture");
  }
  if (!(input_.scale.array() > 0.0).all()) throw InputError("input transform scale must be positive");
  if (!theta_.allFinite()) throw NumericalError("non-finite network parameters");
}

MlpParams MlpParams::initialize(const Architecture& arch, std::uint64_t seed, InputTransform input,
                                OutputTransform output) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(arch.parameter_count());
  std::mt19937_64 rng(seed);
  const auto o = offsets(arch);
  auto fill = [&](Eigen::Index begin, int fan_in, int fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-s, s);
    for (Eigen::Index i = 0; i < Eigen::Index{fan_in} * fan_out; ++i) theta[begin + i] = u(rng);
  };
  fill(o.w1, arch.inputs, arch.hidden1);
  fill(o.w2, arch.hidden1, arch.hidden2);
  fill(o.w3, arch.hidden2, arch.outputs);
  return MlpParams(arch, std::move(theta), std::move(input), std::move(output));
}

Eigen::Map<const Eigen::MatrixXd> MlpParams::w1() const {
  return {theta_.data() + offsets(arch_).w1, arch_.hidden1, arch_.inputs};
}
Eigen::Map<const Eigen::VectorXd> MlpParams::b1() const { return {theta_.data() + offsets(arch_).b1, arch_.hidden1}; }
Eigen::Map<const Eigen::MatrixXd> MlpParams::w2() const {
  return {theta_.data() + offsets(arch_).w2, arch_.hidden2, arch_.hidden1};
}
Eigen::Map<const Eigen::VectorXd> MlpParams::b2() const { return {theta_.data() + offsets(arch_).b2, arch_.hidden2}; }
Eigen::Map<const Eigen::MatrixXd> MlpParams::w3() const {
  return {theta_.data() + offsets(arch_).w3, arch_.outputs, arch_.hidden2};
}
Eigen::Map<const Eigen::VectorXd> MlpParams::b3() const { return {theta_.data() + offsets(arch_).b3, arch_.outputs}; }
Eigen::Map<Eigen::VectorXd> MlpParams::b3() { return {theta_.data() + offsets(arch_).b3, arch_.outputs}; }

Eigen::MatrixXd MlpParams::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != arch_.inputs) throw InputError("network input has the wrong width");
  const Eigen::MatrixXd a1 = ((w1() * x).colwise() + b1()).array().tanh().matrix();
  const Eigen::MatrixXd a2 = ((w2() * a1).colwise() + b2()).array().tanh().matrix();
  return (((w3() * a2).colwise() + b3()).array().colwise() * output_.scale.array()).colwise() +
         output_.mean.array();
}

Eigen::VectorXd MlpParams::predict_log(const Spectrum& rrs) const {
  return forward(input_.apply(rrs.values().matrix()));
}

LossGrad loss_grad(const MlpParams& p, const Batch& batch) {
  const auto n = batch.size();
  if (n == 0) throw InputError("loss of an empty batch");
  const auto& a = p.architecture();
  const auto& x = batch.inputs;
  const Eigen::MatrixXd a1 = ((p.w1() * x).colwise() + p.b1()).array().tanh().matrix();
  const Eigen::MatrixXd a2 = ((p.w2() * a1).colwise() + p.b2()).array().tanh().matrix();
  const auto& out_t = p.output();
  const Eigen::MatrixXd y =
      ((((p.w3() * a2).colwise() + p.b3()).array().colwise() * out_t.scale.array()).colwise() + out_t.mean.array())
          .matrix();
  const Eigen::MatrixXd err = y - batch.targets;
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGrad out;
  out.loss = err.squaredNorm() * inv_n;
  out.grad.resize(a.parameter_count());
  const auto o = offsets(a);
  Eigen::Map<Eigen::MatrixXd> gw1(out.grad.data() + o.w1, a.hidden1, a.inputs);
  Eigen::Map<Eigen::VectorXd> gb1(out.grad.data() + o.b1, a.hidden1);
  Eigen::Map<Eigen::MatrixXd> gw2(out.grad.data() + o.w2, a.hidden2, a.hidden1);
  Eigen::Map<Eigen::VectorXd> gb2(out.grad.data() + o.b2, a.hidden2);
  Eigen::Map<Eigen::MatrixXd> gw3(out.grad.data() + o.w3, a.outputs, a.hidden2);
  Eigen::Map<Eigen::VectorXd> gb3(out.grad.data() + o.b3, a.outputs);

  const Eigen::MatrixXd dy = ((2.0 * inv_n * err).array().colwise() * out_t.scale.array()).matrix();
  gw3.noalias() = dy * a2.transpose();
  gb3 = dy.rowwise().sum();
  const Eigen::MatrixXd dz2 = ((p.w3().transpose() * dy).array() * (1.0 - a2.array().square())).matrix();
  gw2.noalias() = dz2 * a1.transpose();
  gb2 = dz2.rowwise().sum();
  const Eigen::MatrixXd dz1 = ((p.w2().transpose() * dz2).array() * (1.0 - a1.array().square())).matrix();
  gw1.noalias() = dz1 * x.transpose();
  gb1 = dz1.rowwise().sum();
  return out;
}

double loss(const MlpParams& p, const Batch& batch) {
  if (batch.size() == 0) throw InputError("loss of an empty batch");
  return (p.forward(batch.inputs) - batch.targets).squaredNorm() / static_cast<double>(batch.size());
}

}  // namespace bgcmeta
