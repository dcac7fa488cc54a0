#include "bgcmeta/bio_optics.hpp"
#include "bgcmeta/csv.hpp"
#include "bgcmeta/error.hpp"
#include "bgcmeta/fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace bgcmeta;

namespace {

SiopSet flat_siops(double d, double y, double ph, double bp) {
  return {Spectrum::constant(d), Spectrum::constant(y), Spectrum::constant(ph), Spectrum::constant(bp)};
}

WaterIopTables zero_water() {
  return {Spectrum::constant(0), Spectrum::constant(0), Spectrum::constant(0), 22.0};
}

}  // namespace

TEST_CASE("water absorption corrections") {
  auto t = WaterIopTables::bundled();
  CHECK(water_absorption(22, 0, t) == t.a_w_ref);

  WaterIopTables unit = t;
  unit.psi_T = Spectrum::constant(0.001);
  auto aw = water_absorption(23, 0, unit);
  for (std::size_t i = 0; i < aw.size(); ++i) CHECK(aw[i] == doctest::Approx(t.a_w_ref[i] + 0.001).epsilon(1e-14));

  // hand evaluation straight from the table rows
  auto rows = csv::read(default_data_dir() / "water_iops.csv");
  auto a = water_absorption(25, 35, t);
  for (std::size_t r : {50u, 150u, 250u}) {
    const int nm = int(rows.number(r, 0));
    const double expect = rows.number(r, 1) + rows.number(r, 2) * 3 + rows.number(r, 3) * 35;
    CHECK(a.at_nm(nm) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("total absorption") {
  auto t = WaterIopTables::bundled();
  BgcState bgc{5, 2, 1, 22, 0};
  CHECK(total_absorption(bgc, flat_siops(0, 0, 0, 0), t) == t.a_w_ref);

  auto a = total_absorption(bgc, flat_siops(0.03, 0.3, 0.07, 0), t);
  CHECK(t.a_w_ref.at_nm(550) == doctest::Approx(0.0565));
  CHECK(a.at_nm(550) == doctest::Approx(0.8765).epsilon(1e-12));

  auto s = flat_siops(0.05, 0, 0, 0);
  auto a1 = total_absorption({3, 1, 1, 22, 0}, s, zero_water());
  auto a2 = total_absorption({6, 1, 1, 22, 0}, s, zero_water());
  CHECK(a2.at_nm(480) == doctest::Approx(2 * a1.at_nm(480)));

  CHECK_THROWS_AS(total_absorption({-1, 1, 1, 22, 0}, s, t), InputError);
}

TEST_CASE("water backscatter") {
  CHECK(water_backscatter(500, 0) == 1.38e-4);
  CHECK(water_backscatter(500, 37) == doctest::Approx(1.794e-4).epsilon(1e-12));
  CHECK(water_backscatter(600, 35) == doctest::Approx(8.06e-5).epsilon(2e-3));
}

TEST_CASE("total backscatter") {
  auto bw = water_backscatter(0.0);
  CHECK(total_backscatter({0, 1, 1, 22, 0}, flat_siops(0, 0, 0, 0.01)).at_nm(500) ==
        doctest::Approx(bw.at_nm(500)));
  auto bb = total_backscatter({10, 1, 1, 22, 0}, flat_siops(0, 0, 0, 0.008));
  CHECK(bb.at_nm(550) == doctest::Approx(0.08 + 1.38e-4 * std::pow(550.0 / 500.0, -4.32)).epsilon(1e-13));

  auto lo = total_backscatter({2, 1, 1, 22, 0}, flat_siops(0, 0, 0, 0.008));
  for (std::size_t i = 0; i < bb.size(); ++i) CHECK(bb[i] >= lo[i]);
}

TEST_CASE("albedo and reflectance") {
  auto a = Spectrum::constant(0.3);
  auto u = albedo(a, a);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == 0.5);
  CHECK(albedo(a, Spectrum::constant(0)).max() == 0.0);
  CHECK(albedo(Spectrum::constant(0.9), Spectrum::constant(0.1)).at_nm(600) == doctest::Approx(0.1).epsilon(1e-15));

  CHECK(subsurface_rrs(0.0) == 0.0);
  CHECK(std::abs(subsurface_rrs(0.5) - 0.0835) <= 1e-12);
  CHECK(subsurface_rrs(1.0) == doctest::Approx(0.252));

  CHECK(above_water_rrs(0.0) == 0.0);
  CHECK(std::abs(above_water_rrs(0.0835) - 0.050603) <= 1e-6);
  double prev = -1;
  for (double r = 0; r < 0.25; r += 0.01) {
    const double R = above_water_rrs(r);
    CHECK(R > prev);
    prev = R;
  }
}

TEST_CASE("forward model: pure water composed by hand") {
  auto t = WaterIopTables::bundled();
  auto rrs = forward({1, 1, 1, 22, 0}, flat_siops(0, 0, 0, 0), t);
  for (int nm : {420, 550, 680}) {
    const double bb = 1.38e-4 * std::pow(nm / 500.0, -4.32);
    const double u = bb / (t.a_w_ref.at_nm(nm) + bb);
    const double r = 0.082 * u + 0.17 * u * u;
    CHECK(rrs.at_nm(nm) == doctest::Approx(0.52 * r / (1 - 1.7 * r)).epsilon(1e-12));
  }
}

TEST_CASE("forward model over the fixture library") {
  auto t = WaterIopTables::bundled();
  auto lib = make_fixture_library();
  for (std::size_t i = 0; i < lib.size(); ++i) {
    auto r = forward(lib.record(i).bgc(), lib.siop(i), t);
    CHECK(r.values().allFinite());
    CHECK(r.min() >= 0.0);
  }
  // more sediment, brighter red
  auto bgc = lib.record(0).bgc();
  auto base = forward(bgc, lib.siop(0), t).at_nm(650);
  bgc.tss *= 3;
  CHECK(forward(bgc, lib.siop(0), t).at_nm(650) > base);
}
