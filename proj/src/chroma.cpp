#include "bgcmeta/chroma.hpp"

#include "bgcmeta/bio_optics.hpp"
#include "bgcmeta/csv.hpp"
#include "bgcmeta/error.hpp"

#include <vector>

namespace bgcmeta {

CieTables CieTables::load(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::size_t wl = table.column("wavelength_nm");
  const auto column = [&](std::string_view name) {
    const std::size_t c = table.column(name);
    std::vector<SpectralSample> samples;
    samples.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) samples.push_back({table.number(r, wl), table.number(r, c)});
    return resample(samples);
  };
  return {{column("xbar"), column("ybar"), column("zbar")}, column("d65")};
}

CieTables CieTables::bundled() { return load(default_data_dir() / "cie_tables.csv"); }

Chromaticity chromaticity(const Spectrum& rrs, const std::array<Spectrum, 3>& cmf, const Spectrum& illuminant) {
  if (rrs.min() < 0.0) throw InputError("chromaticity needs a nonnegative spectrum");
  const Spectrum weighted(rrs.values() * illuminant.values());
  const double x = integrate(weighted, cmf[0]);
  const double y = integrate(weighted, cmf[1]);
  const double z = integrate(weighted, cmf[2]);
  const double sum = x + y + z;
  if (!(sum > 0.0)) throw InputError("chromaticity undefined for a black spectrum (X+Y+Z = 0)");
  return {x / sum, y / sum};
}

}  // namespace bgcmeta
