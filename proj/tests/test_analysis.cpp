#include "bgcmeta/baseline.hpp"
#include "bgcmeta/chroma.hpp"
#include "bgcmeta/efast.hpp"
#include "bgcmeta/error.hpp"
#include "bgcmeta/fixtures.hpp"
#include "bgcmeta/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace bgcmeta;

TEST_CASE("retrieval metrics oracles") {
  std::vector<double> meas{1, 10, 100};
  auto m = retrieval_metrics(meas, meas);
  CHECK(std::abs(*m.r2 - 1) <= 1e-10);
  CHECK(std::abs(m.bias - 1) <= 1e-10);
  CHECK(std::abs(m.rmse - 1) <= 1e-10);
  CHECK(std::abs(m.mae - 1) <= 1e-10);
  CHECK(m.n == 3);

  std::vector<double> over{10, 100, 1000};
  m = retrieval_metrics(over, meas);
  CHECK(std::abs(m.bias - 10) <= 1e-10);
  CHECK(std::abs(m.rmse - 10) <= 1e-10);
  CHECK(std::abs(m.mae - 10) <= 1e-10);
  CHECK(std::abs(*m.r2 + 0.5) <= 1e-10);
}

TEST_CASE("metrics drop nonpositive pairs and need two") {
  std::vector<double> p{1, -1, 10, 100}, q{1, 5, 0, 100};
  auto m = retrieval_metrics(p, q);
  CHECK(m.n == 2);
  CHECK(m.n_excluded == 2);
  std::vector<double> flat{5, 5, 5};
  CHECK_FALSE(retrieval_metrics(flat, flat).r2.has_value());
  std::vector<double> one{1}, two{1, 2};
  CHECK_THROWS_AS(retrieval_metrics(one, one), InputError);
  CHECK_THROWS_AS(retrieval_metrics(one, two), InputError);
}

TEST_CASE("two-sample KS") {
  std::vector<double> a{0.3, 0.1, 0.7, 0.2};
  auto r = ks_two_sample(a, a);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(1.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> x(1000), y(1000);
  for (int i = 0; i < 1000; ++i) {
    x[i] = u(rng);
    y[i] = u(rng) + 0.5;
  }
  r = ks_two_sample(x, y);
  CHECK(r.statistic == doctest::Approx(0.5).epsilon(0.1));
  CHECK(r.p_value < 1e-10);

  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(1.36) == doctest::Approx(0.0494).epsilon(0.01));
}

TEST_CASE("EFAST frequencies") {
  EfastConfig c;
  CHECK(efast_driver_frequency(c) == 128);
  auto w = efast_complementary_frequencies(c, 3);
  CHECK(w == std::vector<int>{1, 16});
  std::array<ParameterRange, 2> r{ParameterRange{1, 2}, ParameterRange{1, 2}};
  BatchModel f = [](const Eigen::MatrixXd& p) { return Eigen::MatrixXd(p.row(0)); };
  c.samples = 64;
  CHECK_THROWS_AS(efast_indices(f, r, c), InputError);
  c.samples = 1025;
  r[1].lo = 0.0;
  CHECK_THROWS_AS(efast_indices(f, r, c), InputError);
}

TEST_CASE("EFAST on a one-variable sine") {
  std::array<ParameterRange, 3> r;
  for (auto& x : r) x = {-std::numbers::pi, std::numbers::pi, false};
  BatchModel f = [](const Eigen::MatrixXd& p) { return Eigen::MatrixXd(3.0 * p.row(0).array().sin().matrix()); };
  auto ix = efast_indices(f, r, {});
  CHECK(ix.s1(0, 0) > 0.95);
  CHECK(ix.st(0, 0) > 0.95);
  for (int k = 1; k < 3; ++k) {
    CHECK(ix.s1(0, k) < 0.02);
    CHECK(ix.st(0, k) < 0.05);
  }

  BatchModel flat = [](const Eigen::MatrixXd& p) { return Eigen::MatrixXd::Ones(1, p.cols()); };
  auto z = efast_indices(flat, r, {});
  CHECK(z.st.isZero());
}

TEST_CASE("forward model is insensitive to DOC without CDOM") {
  auto lib = make_fixture_library();
  ForwardSensitivitySetup setup{median_siops(lib), library_ranges(lib)};
  setup.siops.a_y_star = Spectrum::constant(0.0);
  EfastConfig c;
  c.samples = 257;
  auto ix = forward_sensitivity(setup, WaterIopTables::bundled(), c, 2);
  REQUIRE(ix.st.rows() == 301);
  CHECK(ix.st.col(1).maxCoeff() < 0.02);
  CHECK((ix.s1.array() <= ix.st.array() + 0.02).all());
}

TEST_CASE("chromaticity white points") {
  auto cie = CieTables::bundled();
  auto flat = Spectrum::constant(0.01);
  auto e = chromaticity(flat, cie.cmf, Spectrum::constant(1.0));
  CHECK(std::abs(e.x - 1.0 / 3) <= 1e-3);
  CHECK(std::abs(e.y - 1.0 / 3) <= 1e-3);
  auto d = chromaticity(flat, cie.cmf, cie.d65);
  CHECK(std::abs(d.x - 0.3127) <= 0.004);
  CHECK(std::abs(d.y - 0.3290) <= 0.004);

  auto shape = Spectrum::from_function([](double nm) { return 0.002 + 0.01 * std::exp(-std::pow((nm - 560) / 40, 2)); });
  auto base = chromaticity(shape, cie.cmf, cie.d65);
  auto scaled = chromaticity(Spectrum(shape.values() * 8.0), cie.cmf, cie.d65);
  CHECK(scaled.x == base.x);
  CHECK(scaled.y == base.y);
  auto odd = chromaticity(Spectrum(shape.values() * 3.7), cie.cmf, cie.d65);
  CHECK(odd.x == doctest::Approx(base.x).epsilon(1e-14));
  // green water sits on the green side of the white point
  CHECK(base.y > d.y);

  CHECK_THROWS_AS(chromaticity(Spectrum::constant(0), cie.cmf, cie.d65), InputError);
  CHECK_THROWS_AS(chromaticity(Spectrum::constant(-1), cie.cmf, cie.d65), InputError);
}

TEST_CASE("band ratio baseline") {
  std::vector<Spectrum> rrs;
  std::vector<double> y;
  for (int i = 0; i < 8; ++i) {
    const double k = 0.5 + 0.3 * i;
    auto s = Spectrum::from_function([k](double nm) { return 0.004 * std::pow(nm / 550.0, k); });
    rrs.push_back(s);
    y.push_back(std::pow(10.0, 0.7 - 1.3 * std::log10(s.at_nm(650) / s.at_nm(550))));
  }
  auto m = fit_band_ratio(rrs, y, {650, 550});
  CHECK(std::abs(m.c0 - 0.7) < 1e-6);
  CHECK(std::abs(m.c1 + 1.3) < 1e-6);
  CHECK(m.predict(rrs[3]) == doctest::Approx(y[3]));

  std::vector<Spectrum> same(5, Spectrum::constant(0.01));
  std::vector<double> t{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(fit_band_ratio(same, t, {650, 550}), InputError);
  std::vector<Spectrum> two(rrs.begin(), rrs.begin() + 2);
  std::vector<double> t2{1, 2};
  CHECK_THROWS_AS(fit_band_ratio(two, t2, {650, 550}), InputError);
}

TEST_CASE("band ratio cross-validation covers every record") {
  std::vector<RegionSample> region;
  for (int i = 0; i < 20; ++i) {
    const double k = 0.2 + 0.1 * i;
    auto s = Spectrum::from_function([k](double nm) { return 0.003 * std::exp(k * (nm - 550) / 100); });
    region.push_back({"", 1.0 + i, 2.0 + 0.1 * i, 0.5 + 0.2 * i, s});
  }
  auto cv = band_ratio_cross_validate(region, 5, 1);
  REQUIRE(cv.predictions.size() == 20);
  auto folds = assign_folds(20, 5, 1);
  for (std::size_t i = 0; i < 20; ++i) CHECK(cv.predictions[i].fold == folds[i]);
  CHECK(cv.metrics[0].n == 20);
}
