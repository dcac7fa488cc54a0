#include "bgcmeta/error.hpp"
#include "bgcmeta/mlp.hpp"

#include <doctest.h>

#include <random>

using namespace bgcmeta;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  Eigen::MatrixXd m(r, c);
  for (auto& v : m.reshaped()) v = g(rng);
  return m;
}

MlpParams random_net(const Architecture& arch, std::mt19937_64& rng) {
  auto p = MlpParams::initialize(arch, rng(), InputTransform::identity(arch.inputs));
  OutputTransform out{random_matrix(arch.outputs, 1, rng), (random_matrix(arch.outputs, 1, rng).array().abs() + 0.2).matrix()};
  Eigen::VectorXd theta = random_matrix(int(arch.parameter_count()), 1, rng, 0.5);
  return {arch, theta, p.input(), out};
}

}  // namespace

TEST_CASE("parameter layout") {
  Architecture a{7, 5, 4, 3};
  CHECK(a.parameter_count() == 7 * 5 + 5 + 5 * 4 + 4 + 4 * 3 + 3);
  Architecture full;
  CHECK(full.parameter_count() == 301 * 64 + 64 + 64 * 64 + 64 + 64 * 3 + 3);
  CHECK_THROWS_AS(MlpParams(a, Eigen::VectorXd::Zero(10), InputTransform::identity(7)), InputError);
}

TEST_CASE("zero weights output the biases") {
  Architecture a{6, 4, 4, 3};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(a.parameter_count());
  theta.tail(3) << 0.5, -1.0, 2.0;
  MlpParams p(a, theta, InputTransform::identity(6));
  std::mt19937_64 rng(1);
  auto y = p.forward(random_matrix(6, 4, rng));
  for (int j = 0; j < 4; ++j) CHECK(y.col(j) == theta.tail(3));
}

TEST_CASE("forward is deterministic and finite for reflectance inputs") {
  Architecture a;
  Eigen::MatrixXd raw = Eigen::MatrixXd::Constant(301, 5, 0.004);
  raw.col(1).setConstant(0.05);
  raw.col(2).setZero();
  auto p = MlpParams::initialize(a, 9, InputTransform::fit(raw));
  auto x = p.input().apply(raw);
  CHECK(p.forward(x) == p.forward(x));
  CHECK(p.forward(x).allFinite());
  auto y = p.predict_log(Spectrum::constant(0.01));
  CHECK(y.size() == 3);
  CHECK(y.allFinite());
}

TEST_CASE("loss is zero at the targets and order-free") {
  std::mt19937_64 rng(3);
  Architecture a{5, 6, 6, 3};
  auto p = random_net(a, rng);
  Batch b{random_matrix(5, 8, rng), Eigen::MatrixXd()};
  b.targets = p.forward(b.inputs);
  auto lg = loss_grad(p, b);
  CHECK(lg.loss == 0.0);
  CHECK(lg.grad.norm() == 0.0);

  b.targets = random_matrix(3, 8, rng);
  Batch rev{b.inputs.rowwise().reverse(), b.targets.rowwise().reverse()};
  CHECK(loss(p, rev) == doctest::Approx(loss(p, b)).epsilon(1e-14));
  CHECK(loss_grad(p, b).loss == doctest::Approx(loss(p, b)).epsilon(1e-14));
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Architecture a{9, 7, 5, 3};
    auto p = random_net(a, rng);
    Batch b{random_matrix(9, 6, rng), random_matrix(3, 6, rng)};
    auto g = loss_grad(p, b).grad;
    Eigen::VectorXd fd(g.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      MlpParams plus = p, minus = p;
      plus.theta()[i] += h;
      minus.theta()[i] -= h;
      fd[i] = (loss(plus, b) - loss(minus, b)) / (2 * h);
    }
    CHECK((g - fd).norm() / (g.norm() + fd.norm()) < 1e-4);
  }
}

TEST_CASE("transforms") {
  Eigen::MatrixXd raw(2, 3);
  raw << 0.001, 0.01, 0.1, 0.02, 0.02, 0.02;
  auto t = InputTransform::fit(raw);
  auto x = t.apply(raw);
  CHECK(x.row(0).mean() == doctest::Approx(0.0).scale(1));
  CHECK(x.row(1).isZero());  // constant band: spread floor keeps it finite

  Eigen::MatrixXd targets(3, 4);
  targets << 0, 1, 2, 3, 1, 1, 1, 1, -1, 1, -1, 1;
  auto o = OutputTransform::fit(targets);
  CHECK(o.mean[0] == doctest::Approx(1.5));
  CHECK(o.scale[2] == doctest::Approx(1.0));
  CHECK(o.scale[1] > 0.0);
}
