#pragma once

#include "bgcmeta/spectral.hpp"

#include <array>
#include <filesystem>

namespace bgcmeta {

/// CIE 1931 2° colour-matching functions and the D65 illuminant on the grid.
struct CieTables {
  std::array<Spectrum, 3> cmf;  // xbar, ybar, zbar
  Spectrum d65;

  /// Reads `wavelength_nm,xbar,ybar,zbar,d65` and resamples onto the grid.
  static CieTables load(const std::filesystem::path& path);
  static CieTables bundled();
};

struct Chromaticity {
  double x = 0.0;
  double y = 0.0;
};

/// (X, Y) / (X + Y + Z) with tristimulus values integrated over 400-700 nm.
Chromaticity chromaticity(const Spectrum& rrs, const std::array<Spectrum, 3>& cmf, const Spectrum& illuminant);

}  // namespace bgcmeta
