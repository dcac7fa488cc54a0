#include "bgcmeta/error.hpp"
#include "bgcmeta/fixtures.hpp"
#include "bgcmeta/pca.hpp"
#include "bgcmeta/synth.hpp"

#include <doctest.h>

#include <random>

using namespace bgcmeta;

namespace {

Eigen::MatrixXd gaussian_data(int m, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd d(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) d(i, j) = g(rng) * (1.0 + i % 4);
  return d;
}

double reconstruction_error(const PcaBasis& b, const Eigen::MatrixXd& d) {
  double e = 0;
  for (int j = 0; j < d.cols(); ++j) e += (b.reconstruct(b.project(d.col(j))) - d.col(j)).squaredNorm();
  return e;
}

}  // namespace

TEST_CASE("rank-1 data is captured by one component") {
  Eigen::VectorXd shape = Eigen::VectorXd::LinSpaced(30, 1, 2);
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(30, 0.5);
  Eigen::MatrixXd d(30, 12);
  for (int j = 0; j < 12; ++j) d.col(j) = mean + (j - 5.5) * shape;
  auto b = fit_pca(d, 5);
  for (int k = 1; k < 5; ++k) CHECK(b.explained_variance[k] < 1e-20 * b.explained_variance[0]);
  PcaBasis one = b;
  one.components = b.components.leftCols(1);
  one.explained_variance = b.explained_variance.head(1);
  CHECK(reconstruction_error(one, d) < 1e-20 * d.squaredNorm());
}

TEST_CASE("basis properties") {
  auto d = gaussian_data(20, 60, 3);
  auto b = fit_pca(d, 5);
  CHECK((b.components.transpose() * b.components - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
  for (int k = 1; k < 5; ++k) CHECK(b.explained_variance[k] <= b.explained_variance[k - 1]);
  for (int k = 0; k < 5; ++k) {
    Eigen::Index at;
    b.components.col(k).cwiseAbs().maxCoeff(&at);
    CHECK(b.components(at, k) > 0);
  }

  Eigen::VectorXd s(5);
  s << 0.3, -1.2, 2.0, 0.01, -0.5;
  CHECK((b.project(b.reconstruct(s)) - s).norm() < 1e-10);
  CHECK(b.project(b.mean).norm() < 1e-12);
  CHECK(b.reconstruct(Eigen::VectorXd::Zero(5)) == b.mean);

  PcaBasis one = fit_pca(d, 1);
  CHECK(reconstruction_error(b, d) <= reconstruction_error(one, d));
}

TEST_CASE("pca rejects bad input") {
  CHECK_THROWS_AS(fit_pca(gaussian_data(5, 3, 1), 5), InputError);
  CHECK_THROWS_AS(fit_pca(gaussian_data(5, 10, 1), 0), InputError);
}

TEST_CASE("phytoplankton peaks survive five components") {
  auto lib = make_fixture_library();
  auto bases = fit_siop_bases(lib);
  auto peak = [](const Eigen::VectorXd& v, int lo, int hi) {
    Eigen::Index at;
    v.segment(lo - 400, hi - lo + 1).maxCoeff(&at);
    return int(at) + lo;
  };
  for (std::size_t i = 0; i < lib.size(); i += 13) {
    Eigen::VectorXd x = lib.siop(i).a_ph_star.values().log10().matrix();
    Eigen::VectorXd r = bases.a_ph.reconstruct(bases.a_ph.project(x));
    CHECK(std::abs(peak(x, 410, 470) - peak(r, 410, 470)) <= 5);
    CHECK(std::abs(peak(x, 640, 700) - peak(r, 640, 700)) <= 5);
  }
}
