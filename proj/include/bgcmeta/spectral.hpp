#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace bgcmeta {

inline constexpr int kStartNm = 400;
inline constexpr int kEndNm = 700;
inline constexpr int kStepNm = 1;
inline constexpr int kBandCount = (kEndNm - kStartNm) / kStepNm + 1;

/// The fixed 400-700 nm, 1 nm wavelength grid every spectrum lives on.
class WavelengthGrid {
 public:
  static const WavelengthGrid& standard();

  int start_nm() const { return kStartNm; }
  int end_nm() const { return kEndNm; }
  int step_nm() const { return kStepNm; }
  std::size_t size() const { return kBandCount; }

  double wavelength(std::size_t band) const {
    return static_cast<double>(kStartNm + static_cast<int>(band) * kStepNm);
  }
  /// Band index of an integral wavelength; throws InputError off-grid.
  std::size_t index_of(int nm) const;
  const Eigen::ArrayXd& wavelengths() const { return wavelengths_; }

 private:
  WavelengthGrid();
  Eigen::ArrayXd wavelengths_;
};

/// Values sampled on the standard grid. Always 301 finite entries.
class Spectrum {
 public:
  Spectrum() : values_(Eigen::ArrayXd::Zero(kBandCount)) {}
  explicit Spectrum(Eigen::ArrayXd values);

  static Spectrum constant(double value);
  static Spectrum from_function(const std::function<double(double)>& f);

  const WavelengthGrid& grid() const { return WavelengthGrid::standard(); }
  const Eigen::ArrayXd& values() const { return values_; }
  std::size_t size() const { return kBandCount; }

  double operator[](std::size_t band) const { return values_[static_cast<Eigen::Index>(band)]; }
  /// Value at an integral wavelength in nm.
  double at_nm(int nm) const;

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

  friend bool operator==(const Spectrum& a, const Spectrum& b) {
    return (a.values_ == b.values_).all();
  }

 private:
  Eigen::ArrayXd values_;
};

struct SpectralSample {
  double wavelength_nm;
  double value;
};

/// Linear interpolation of sorted (wavelength, value) samples onto the
/// standard grid. Grid points outside the sampled range take the nearest
/// sampled value. Rejects fewer than two samples, unsorted input, and
/// coverage that stops more than 20 nm short of either grid end.
Spectrum resample(std::span<const SpectralSample> raw);

/// Trapezoidal quadrature of s(λ)·w(λ) over 400-700 nm.
double integrate(const Spectrum& s, const Spectrum& w);

}  // namespace bgcmeta
