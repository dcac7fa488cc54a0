#include "bgcmeta/spectral.hpp"

#include "bgcmeta/error.hpp"

#include <cmath>
#include <string>

namespace bgcmeta {

namespace {
constexpr double kMaxEdgeGapNm = 20.0;
}

WavelengthGrid::WavelengthGrid()
    : wavelengths_(Eigen::ArrayXd::LinSpaced(kBandCount, kStartNm, kEndNm)) {}

const WavelengthGrid& WavelengthGrid::standard() {
  static const WavelengthGrid grid;
  return grid;
}

std::size_t WavelengthGrid::index_of(int nm) const {
  if (nm < kStartNm || nm > kEndNm || (nm - kStartNm) % kStepNm != 0) {
    throw InputError("wavelength " + std::to_string(nm) + " nm is not on the 400-700 nm grid");
  }
  return static_cast<std::size_t>((nm - kStartNm) / kStepNm);
}

Spectrum::Spectrum(Eigen::ArrayXd values) : values_(std::move(values)) {
  if (values_.size() != kBandCount) {
    throw InputError("spectrum has " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(kBandCount));
  }
  if (!values_.isFinite().all()) {
    throw NumericalError("spectrum contains non-finite values");
  }
}

Spectrum Spectrum::constant(double value) {
  return Spectrum(Eigen::ArrayXd::Constant(kBandCount, value));
}

Spectrum Spectrum::from_function(const std::function<double(double)>& f) {
  const auto& wl = WavelengthGrid::standard().wavelengths();
  Eigen::ArrayXd v(kBandCount);
  for (Eigen::Index i = 0; i < kBandCount; ++i) v[i] = f(wl[i]);
  return Spectrum(std::move(v));
}

double Spectrum::at_nm(int nm) const {
  return values_[static_cast<Eigen::Index>(grid().index_of(nm))];
}

Spectrum resample(std::span<const SpectralSample> raw) {
  if (raw.size() < 2) {
    throw InputError("resample needs at least 2 samples, got " + std::to_string(raw.size()));
  }
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (!(raw[i].wavelength_nm > raw[i - 1].wavelength_nm)) {
      throw InputError("resample input must be strictly increasing in wavelength");
    }
  }
  for (const auto& s : raw) {
    if (!std::isfinite(s.wavelength_nm) || !std::isfinite(s.value)) {
      throw InputError("resample input contains non-finite values");
    }
  }
  if (raw.front().wavelength_nm - kStartNm > kMaxEdgeGapNm ||
      kEndNm - raw.back().wavelength_nm > kMaxEdgeGapNm) {
    throw InputError("raw spectrum misses more than 20 nm at a grid edge");
  }

  const auto& wl = WavelengthGrid::standard().wavelengths();
  Eigen::ArrayXd out(kBandCount);
  std::size_t j = 0;
  for (Eigen::Index i = 0; i < kBandCount; ++i) {
    const double x = wl[i];
    if (x <= raw.front().wavelength_nm) {
      out[i] = raw.front().value;
      continue;
    }
    if (x >= raw.back().wavelength_nm) {
      out[i] = raw.back().value;
      continue;
    }
    while (raw[j + 1].wavelength_nm < x) ++j;
    const auto& lo = raw[j];
    const auto& hi = raw[j + 1];
    if (x == hi.wavelength_nm) {
      out[i] = hi.value;
      continue;
    }
    const double t = (x - lo.wavelength_nm) / (hi.wavelength_nm - lo.wavelength_nm);
    out[i] = lo.value + t * (hi.value - lo.value);
  }
  return Spectrum(std::move(out));
}

double integrate(const Spectrum& s, const Spectrum& w) {
  const Eigen::ArrayXd f = s.values() * w.values();
  const double interior = f.segment(1, kBandCount - 2).sum();
  return kStepNm * (interior + 0.5 * (f[0] + f[kBandCount - 1]));
}

}  // namespace bgcmeta
