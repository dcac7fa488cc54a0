#pragma once

#include "bgcmeta/spectral.hpp"

#include <filesystem>

namespace bgcmeta {

/// Directory holding the bundled reference tables. Honors the
/// BGCMETA_DATA_DIR environment variable, else the build-time data path.
std::filesystem::path default_data_dir();

/// Pure-water absorption reference with temperature and salinity corrections.
struct WaterIopTables {
  Spectrum a_w_ref;  // m^-1
  Spectrum psi_T;    // m^-1 degC^-1
  Spectrum psi_S;    // m^-1 per salinity unit
  double t_ref = 22.0;

  /// Reads `wavelength_nm,a_w_ref,psi_T,psi_S` and resamples onto the grid.
  static WaterIopTables load(const std::filesystem::path& path);
  static WaterIopTables bundled();
};

/// Biogeochemical state of a water sample.
struct BgcState {
  double tss = 1.0;    // mg/L
  double doc = 1.0;    // mg/L
  double tchla = 1.0;  // ug/L
  double temp = 22.0;  // degC
  double sal = 0.0;    // unitless

  /// Strict invariants: positive concentrations, sal >= 0, temp in [-2, 40].
  void validate() const;
};

/// Mass-specific inherent optical properties.
struct SiopSet {
  Spectrum a_d_star;   // NAP absorption, m^2 g^-1
  Spectrum a_y_star;   // CDOM absorption, m^2 g^-1
  Spectrum a_ph_star;  // phytoplankton absorption, m^2 mg^-1
  Spectrum b_bp_star;  // particulate backscatter, m^2 g^-1

  void validate() const;
};

struct RrsConstants {
  double g0 = 0.082;
  double g1 = 0.17;
  double k_up = 0.52;
  double k_q = 1.7;
};

Spectrum water_absorption(double temp, double sal, const WaterIopTables& tables);

/// a = a_w(T,S) + TSS a*_d + DOC a*_y + TChl-a a*_ph. Concentrations may be
/// zero (water-only limit) but not negative.
Spectrum total_absorption(const BgcState& bgc, const SiopSet& siops, const WaterIopTables& tables);

/// Pure seawater backscatter at one wavelength (nm).
double water_backscatter(double wavelength_nm, double sal);
Spectrum water_backscatter(double sal);

Spectrum total_backscatter(const BgcState& bgc, const SiopSet& siops);

/// u = b_b / (a + b_b)
Spectrum albedo(const Spectrum& a, const Spectrum& b_b);

double subsurface_rrs(double u, const RrsConstants& c = {});
Spectrum subsurface_rrs(const Spectrum& u, const RrsConstants& c = {});

/// Air-water interface transfer from r_rs(0-) to R_rs(0+).
double above_water_rrs(double r_rs, const RrsConstants& c = {});
Spectrum above_water_rrs(const Spectrum& r_rs, const RrsConstants& c = {});

/// Full forward model: (BGC, SIOPs, T, S) to above-water R_rs in sr^-1.
Spectrum forward(const BgcState& bgc, const SiopSet& siops, const WaterIopTables& tables,
                 const RrsConstants& c = {});

}  // namespace bgcmeta
