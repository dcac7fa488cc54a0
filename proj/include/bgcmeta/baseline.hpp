#pragma once

#include "bgcmeta/meta_learn.hpp"
#include "bgcmeta/spectral.hpp"

#include <array>
#include <span>

namespace bgcmeta {

/// log10(y) = c0 + c1 log10(R_rs(num) / R_rs(den))
struct BandRatioModel {
  int numerator_nm = 0;
  int denominator_nm = 0;
  double c0 = 0.0;
  double c1 = 0.0;

  double ratio(const Spectrum& rrs) const;
  double predict(const Spectrum& rrs) const;
};

struct BandPair {
  int numerator_nm;
  int denominator_nm;
};

/// Default band pairs for TSS, DOC and TChl-a.
inline constexpr std::array<BandPair, 3> kDefaultBandPairs = {{{650, 550}, {665, 440}, {700, 675}}};

BandRatioModel fit_band_ratio(std::span<const Spectrum> rrs, std::span<const double> target, BandPair bands);

/// Same fold assignment as the network cross-validation, one band-ratio
/// model per variable and fold.
CvResult band_ratio_cross_validate(std::span<const RegionSample> region, int folds, std::uint64_t seed,
                                   const std::array<BandPair, 3>& bands = kDefaultBandPairs);

}  // namespace bgcmeta
