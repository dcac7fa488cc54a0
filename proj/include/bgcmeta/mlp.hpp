#pragma once

#include "bgcmeta/spectral.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace bgcmeta {

/// Layer sizes of the two-hidden-layer tanh network.
struct Architecture {
  int inputs = kBandCount;
  int hidden1 = 64;
  int hidden2 = 64;
  int outputs = 3;

  Eigen::Index parameter_count() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Maps raw R_rs to network inputs: z-scored log10(R_rs + offset).
struct InputTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  double offset = 1e-5;

  /// Identity-like transform (mean 0, scale 1) of the given width.
  static InputTransform identity(int width);
  /// Statistics of log10(R_rs + offset) over the columns of `raw`.
  static InputTransform fit(const Eigen::MatrixXd& raw, double offset = 1e-5);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
};

/// Affine map from the last linear layer to log10 concentrations:
/// y = mean + scale * z, applied per output.
struct OutputTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static OutputTransform identity(int width);
  /// Per-row mean and population spread of log10 targets.
  static OutputTransform fit(const Eigen::MatrixXd& targets);
};

/// Network weights plus the input and output transforms. Targets and outputs are log10
/// concentrations.
///
/// Parameters live in one flat vector, laid out as W1 (hidden1 x inputs,
/// column-major), b1, W2, b2, W3, b3.
class MlpParams {
 public:
  MlpParams() = default;
  /// An empty `output` means the identity transform.
  MlpParams(Architecture arch, Eigen::VectorXd theta, InputTransform input, OutputTransform output = {});

  /// Glorot-uniform weights, zero biases.
  static MlpParams initialize(const Architecture& arch, std::uint64_t seed, InputTransform input,
                              OutputTransform output = {});

  const Architecture& architecture() const { return arch_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  Eigen::VectorXd& theta() { return theta_; }
  const InputTransform& input() const { return input_; }
  const OutputTransform& output() const { return output_; }

  Eigen::Map<const Eigen::MatrixXd> w1() const;
  Eigen::Map<const Eigen::VectorXd> b1() const;
  Eigen::Map<const Eigen::MatrixXd> w2() const;
  Eigen::Map<const Eigen::VectorXd> b2() const;
  Eigen::Map<const Eigen::MatrixXd> w3() const;
  Eigen::Map<const Eigen::VectorXd> b3() const;
  Eigen::Map<Eigen::VectorXd> b3();

  /// Network on already-transformed inputs (one column per sample).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
  /// log10 [TSS, DOC, TChl-a] for one raw R_rs spectrum.
  Eigen::VectorXd predict_log(const Spectrum& rrs) const;

 private:
  Architecture arch_;
  Eigen::VectorXd theta_;
  InputTransform input_;
  OutputTransform output_;
};

/// Transformed inputs and log10 targets, one column per sample.
struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  Eigen::Index size() const { return inputs.cols(); }
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// Mean over samples of the squared error summed over outputs, and its
/// exact gradient with respect to the flat parameter vector.
LossGrad loss_grad(const MlpParams& params, const Batch& batch);
double loss(const MlpParams& params, const Batch& batch);

}  // namespace bgcmeta
