#include "bgcmeta/error.hpp"
#include "bgcmeta/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace bgcmeta;

TEST_CASE("grid is 400-700 nm at 1 nm") {
  const auto& g = WavelengthGrid::standard();
  CHECK(g.size() == 301);
  CHECK(g.wavelength(0) == 400.0);
  CHECK(g.wavelength(300) == 700.0);
  CHECK(g.index_of(550) == 150);
  CHECK_THROWS_AS(g.index_of(399), InputError);
}

TEST_CASE("resample: two flat points give a flat spectrum") {
  std::vector<SpectralSample> raw{{400, 1}, {700, 1}};
  auto s = resample(raw);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == 1.0);
}

TEST_CASE("resample: linear between endpoints") {
  std::vector<SpectralSample> raw{{400, 0}, {700, 3}};
  CHECK(resample(raw).at_nm(500) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("resample: 3 nm sine matches analytic") {
  std::vector<SpectralSample> raw;
  for (int nm = 400; nm <= 700; nm += 3) raw.push_back({double(nm), std::sin(nm / 20.0)});
  auto s = resample(raw);
  double worst = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    worst = std::max(worst, std::abs(s[i] - std::sin(s.grid().wavelength(i) / 20.0)));
  // linear interpolation bound: max t(h-t)/2 * |f''| with h=3, t=1 -> 1 * 1/400
  CHECK(worst <= 1.0 / 400 + 1e-12);
}

TEST_CASE("resample: edge handling and rejects") {
  // short by 10 nm on each side: held at the nearest value
  std::vector<SpectralSample> raw{{410, 2}, {690, 2}};
  auto s = resample(raw);
  CHECK(s.at_nm(400) == 2.0);
  CHECK(s.at_nm(700) == 2.0);

  std::vector<SpectralSample> one{{500, 1}};
  CHECK_THROWS_AS(resample(one), InputError);
  std::vector<SpectralSample> unsorted{{500, 1}, {450, 1}, {700, 1}};
  CHECK_THROWS_AS(resample(unsorted), InputError);
  std::vector<SpectralSample> narrow{{450, 1}, {700, 1}};
  CHECK_THROWS_AS(resample(narrow), InputError);
}

TEST_CASE("integrate: trapezoid oracles") {
  CHECK(integrate(Spectrum::constant(1), Spectrum::constant(1)) == doctest::Approx(300.0));
  CHECK(integrate(Spectrum::constant(1), Spectrum::constant(0)) == 0.0);
  auto ramp = Spectrum::from_function([](double nm) { return nm - 400; });
  CHECK(integrate(ramp, Spectrum::constant(1)) == doctest::Approx(45000.0).epsilon(1e-14));
}

TEST_CASE("spectrum rejects non-finite and wrong length") {
  Eigen::ArrayXd v = Eigen::ArrayXd::Ones(301);
  v[5] = std::nan("");
  CHECK_THROWS_AS(Spectrum{v}, NumericalError);
  CHECK_THROWS_AS(Spectrum{Eigen::ArrayXd::Ones(300)}, InputError);
}
