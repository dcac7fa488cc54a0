#include "bgcmeta/bio_optics.hpp"

#include "bgcmeta/csv.hpp"
#include "bgcmeta/error.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace bgcmeta {

namespace {

void require_nonnegative(double value, const char* name) {
  if (!(value >= 0.0)) {
    throw InputError(std::string(name) + " must be nonnegative, got " + std::to_string(value));
  }
}

Spectrum column_spectrum(const csv::Table& t, std::size_t wl_col, std::size_t col) {
  std::vector<SpectralSample> raw;
  raw.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    raw.push_back({t.number(r, wl_col), t.number(r, col)});
  }
  return resample(raw);
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("BGCMETA_DATA_DIR"); env && *env) return env;
  return BGCMETA_DATA_DIR;
}

WaterIopTables WaterIopTables::load(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto wl = t.column("wavelength_nm");
  WaterIopTables tables{column_spectrum(t, wl, t.column("a_w_ref")),
                        column_spectrum(t, wl, t.column("psi_T")),
                        column_spectrum(t, wl, t.column("psi_S"))};
  if (tables.a_w_ref.min() < 0.0) {
    throw InputError(path.string() + ": a_w_ref has negative values");
  }
  return tables;
}

WaterIopTables WaterIopTables::bundled() {
  static const WaterIopTables tables = load(default_data_dir() / "water_iops.csv");
  return tables;
}

void BgcState::validate() const {
  if (!(tss > 0.0) || !(doc > 0.0) || !(tchla > 0.0)) {
    throw InputError("TSS, DOC and TChl-a must be positive");
  }
  if (!(sal >= 0.0)) throw InputError("salinity must be nonnegative");
  if (!(temp >= -2.0 && temp <= 40.0)) {
    throw InputError("temperature " + std::to_string(temp) + " outside [-2, 40] degC");
  }
}

void SiopSet::validate() const {
  if (a_d_star.min() < 0.0 || a_y_star.min() < 0.0 || a_ph_star.min() < 0.0 ||
      b_bp_star.min() < 0.0) {
    throw InputError("SIOP spectra must be nonnegative");
  }
}

Spectrum water_absorption(double temp, double sal, const WaterIopTables& tables) {
  const Eigen::ArrayXd a = tables.a_w_ref.values() + (temp - tables.t_ref) * tables.psi_T.values() +
                           sal * tables.psi_S.values();
  return Spectrum(a.max(0.0));
}

Spectrum total_absorption(const BgcState& bgc, const SiopSet& siops, const WaterIopTables& tables) {
  require_nonnegative(bgc.tss, "TSS");
  require_nonnegative(bgc.doc, "DOC");
  require_nonnegative(bgc.tchla, "TChl-a");
  const auto a_w = water_absorption(bgc.temp, bgc.sal, tables);
  return Spectrum(a_w.values() + bgc.tss * siops.a_d_star.values() +
                  bgc.doc * siops.a_y_star.values() + bgc.tchla * siops.a_ph_star.values());
}

double water_backscatter(double wavelength_nm, double sal) {
  return 1.38e-4 * std::pow(wavelength_nm / 500.0, -4.32) * (1.0 + 0.3 * sal / 37.0);
}

Spectrum water_backscatter(double sal) {
  require_nonnegative(sal, "salinity");
  return Spectrum::from_function([sal](double nm) { return water_backscatter(nm, sal); });
}

Spectrum total_backscatter(const BgcState& bgc, const SiopSet& siops) {
  require_nonnegative(bgc.tss, "TSS");
  return Spectrum(water_backscatter(bgc.sal).values() + bgc.tss * siops.b_bp_star.values());
}

Spectrum albedo(const Spectrum& a, const Spectrum& b_b) {
  const Eigen::ArrayXd denom = a.values() + b_b.values();
  if (!(denom > 0.0).all()) throw NumericalError("albedo: a + b_b must be positive");
  if (b_b.min() < 0.0) throw InputError("albedo: b_b must be nonnegative");
  return Spectrum(b_b.values() / denom);
}

double subsurface_rrs(double u, const RrsConstants& c) {
  if (!(u >= 0.0 && u <= 1.0)) throw InputError("albedo u outside [0, 1]");
  return c.g0 * u + c.g1 * u * u;
}

Spectrum subsurface_rrs(const Spectrum& u, const RrsConstants& c) {
  if (u.min() < 0.0 || u.max() > 1.0) throw InputError("albedo u outside [0, 1]");
  const auto& v = u.values();
  return Spectrum(c.g0 * v + c.g1 * v.square());
}

double above_water_rrs(double r_rs, const RrsConstants& c) {
  const double denom = 1.0 - c.k_q * r_rs;
  if (!(r_rs >= 0.0) || !(denom > 0.0)) {
    throw InputError("subsurface r_rs " + std::to_string(r_rs) + " outside [0, 1/1.7)");
  }
  return c.k_up * r_rs / denom;
}

Spectrum above_water_rrs(const Spectrum& r_rs, const RrsConstants& c) {
  const auto& v = r_rs.values();
  const Eigen::ArrayXd denom = 1.0 - c.k_q * v;
  if (r_rs.min() < 0.0 || !(denom > 0.0).all()) {
    throw InputError("subsurface r_rs outside [0, 1/1.7)");
  }
  return Spectrum(c.k_up * v / denom);
}

Spectrum forward(const BgcState& bgc, const SiopSet& siops, const WaterIopTables& tables,
                 const RrsConstants& c) {
  const auto a = total_absorption(bgc, siops, tables);
  const auto b_b = total_backscatter(bgc, siops);
  return above_water_rrs(subsurface_rrs(albedo(a, b_b), c), c);
}

}  // namespace bgcmeta
