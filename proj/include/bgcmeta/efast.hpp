#pragma once

#include "bgcmeta/bio_optics.hpp"
#include "bgcmeta/siop_library.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

namespace bgcmeta {

struct EfastConfig {
  int samples = 1025;     // per search curve, odd
  int interference = 4;   // M
  std::uint64_t seed = 0; // curve phases
};

struct ParameterRange {
  double lo = 0.0;
  double hi = 1.0;
  bool log_uniform = true;

  double map(double unit) const;
};

/// Evaluates a model on a batch of parameter points (P x n, one point per
/// column) and returns outputs (B x n), B independent responses.
using BatchModel = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// First-order and total indices, one row per response, one column per parameter.
struct EfastIndices {
  Eigen::MatrixXd s1;
  Eigen::MatrixXd st;
};

/// Driver and complementary frequencies for parameter count P.
int efast_driver_frequency(const EfastConfig& config);
std::vector<int> efast_complementary_frequencies(const EfastConfig& config, int parameters);

EfastIndices efast_indices(const BatchModel& model, std::span<const ParameterRange> ranges, const EfastConfig& config);

inline constexpr std::array<std::string_view, 3> kBgcNames = {"tss", "doc", "tchla"};

/// Per-band median SIOPs and per-BGC min/max ranges of a library.
SiopSet median_siops(const SpectralLibrary& library);
std::array<ParameterRange, 3> library_ranges(const SpectralLibrary& library);

struct ForwardSensitivitySetup {
  SiopSet siops;
  std::array<ParameterRange, 3> ranges;
  double temp = 22.0;
  double sal = 35.0;
};

/// EFAST of the forward model's R_rs at every band with respect to TSS, DOC
/// and TChl-a. Rows are bands (301), columns tss/doc/tchla.
EfastIndices forward_sensitivity(const ForwardSensitivitySetup& setup, const WaterIopTables& tables,
                                 const EfastConfig& config, unsigned threads = 1);

}  // namespace bgcmeta
