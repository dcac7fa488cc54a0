#include "bgcmeta/dpgmm.hpp"

#include "bgcmeta/error.hpp"

#include <Eigen/Cholesky>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace bgcmeta {

namespace {

using boost::math::digamma;

const double kLn2Pi = std::log(2.0 * std::numbers::pi);

struct Stats {
  Eigen::VectorXd counts;               // N_k
  std::vector<Eigen::VectorXd> means;   // x̄_k
  std::vector<Eigen::MatrixXd> scatter; // S_k
};

// q(mu_k, Lambda_k) = N(mu | m, (beta Lambda)^-1) W(Lambda | W, nu), stored via W^-1.
struct GaussWishart {
  double beta = 1.0;
  double nu = 1.0;
  Eigen::VectorXd m;
  Eigen::MatrixXd winv;
  Eigen::LLT<Eigen::MatrixXd> llt;  // of winv
  double ln_det_w = 0.0;
  double e_ln_lambda = 0.0;

  void refresh() {
    llt.compute(winv);
    if (llt.info() != Eigen::Success) throw NumericalError("DP-GMM: scale matrix lost positive definiteness");
    const auto d = static_cast<int>(m.size());
    ln_det_w = -2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    e_ln_lambda = d * std::log(2.0) + ln_det_w;
    for (int i = 1; i <= d; ++i) e_ln_lambda += digamma(0.5 * (nu + 1 - i));
  }
  // tr(W A)
  double trace_w(const Eigen::MatrixXd& a) const { return llt.solve(a).trace(); }
  // vᵀ W v
  double quad_w(const Eigen::VectorXd& v) const { return llt.matrixL().solve(v).squaredNorm(); }
};

double log_wishart_norm(double ln_det_w, double nu, int d) {
  double s = -0.5 * nu * ln_det_w - 0.5 * nu * d * std::log(2.0) -
             0.25 * d * (d - 1) * std::log(std::numbers::pi);
  for (int i = 1; i <= d; ++i) s -= std::lgamma(0.5 * (nu + 1 - i));
  return s;
}

struct Sticks {
  // Beta(a_k, b_k) for the first C-1 sticks; the last stick is 1.
  Eigen::VectorXd a, b;

  Eigen::VectorXd expected_log_weights() const {
    const auto c = a.size() + 1;
    Eigen::VectorXd out(c);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < c - 1; ++k) {
      const double ab = digamma(a[k] + b[k]);
      out[k] = acc + digamma(a[k]) - ab;
      acc += digamma(b[k]) - ab;
    }
    out[c - 1] = acc;
    return out;
  }

  std::vector<double> expected_weights() const {
    const auto c = a.size() + 1;
    std::vector<double> w(static_cast<std::size_t>(c));
    double rest = 1.0;
    for (Eigen::Index k = 0; k < c - 1; ++k) {
      const double ev = a[k] / (a[k] + b[k]);
      w[static_cast<std::size_t>(k)] = rest * ev;
      rest *= 1.0 - ev;
    }
    w.back() = rest;
    return w;
  }
};

Stats sufficient_stats(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp) {
  const auto c = resp.cols();
  const auto d = x.rows();
  Stats s;
  s.counts = resp.colwise().sum().transpose();
  s.means.resize(static_cast<std::size_t>(c));
  s.scatter.resize(static_cast<std::size_t>(c));
  for (Eigen::Index k = 0; k < c; ++k) {
    const double nk = s.counts[k];
    auto& mean = s.means[static_cast<std::size_t>(k)];
    auto& scat = s.scatter[static_cast<std::size_t>(k)];
    if (nk <= std::numeric_limits<double>::min() * 1e10) {
      mean = Eigen::VectorXd::Zero(d);
      scat = Eigen::MatrixXd::Zero(d, d);
      continue;
    }
    mean = x * resp.col(k) / nk;
    const Eigen::MatrixXd centred = x.colwise() - mean;
    scat = centred * resp.col(k).asDiagonal() * centred.transpose() / nk;
  }
  return s;
}

struct Prior {
  double alpha = 1.0;
  double beta = 1.0;
  double nu = 1.0;
  Eigen::VectorXd m;
  Eigen::MatrixXd winv;
  double ln_det_w = 0.0;
};

void update_params(const Stats& s, const Prior& p, std::vector<GaussWishart>& q, Sticks& sticks) {
  const auto c = s.counts.size();
  for (Eigen::Index k = 0; k < c; ++k) {
    const double nk = s.counts[k];
    auto& g = q[static_cast<std::size_t>(k)];
    const auto& xbar = s.means[static_cast<std::size_t>(k)];
    g.beta = p.beta + nk;
    g.nu = p.nu + nk;
    g.m = (p.beta * p.m + nk * xbar) / g.beta;
    const Eigen::VectorXd diff = xbar - p.m;
    g.winv = p.winv + nk * s.scatter[static_cast<std::size_t>(k)] +
             (p.beta * nk / (p.beta + nk)) * diff * diff.transpose();
    g.refresh();
  }
  sticks.a.resize(c - 1);
  sticks.b.resize(c - 1);
  double tail = s.counts.sum();
  for (Eigen::Index k = 0; k < c - 1; ++k) {
    tail -= s.counts[k];
    sticks.a[k] = 1.0 + s.counts[k];
    sticks.b[k] = p.alpha + std::max(tail, 0.0);
  }
}

Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& x, const std::vector<GaussWishart>& q,
                                 const Sticks& sticks) {
  const auto n = x.cols();
  const auto d = static_cast<double>(x.rows());
  const auto c = static_cast<Eigen::Index>(q.size());
  const Eigen::VectorXd eln_pi = sticks.expected_log_weights();
  Eigen::MatrixXd logr(n, c);
  for (Eigen::Index k = 0; k < c; ++k) {
    const auto& g = q[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd z = g.llt.matrixL().solve(x.colwise() - g.m);
    const Eigen::VectorXd maha = z.colwise().squaredNorm().transpose();
    logr.col(k) = ((eln_pi[k] + 0.5 * g.e_ln_lambda - 0.5 * d * kLn2Pi - 0.5 * d / g.beta) -
                   0.5 * g.nu * maha.array())
                      .matrix();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logr.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logr.row(i).array() - mx).exp();
    logr.row(i) = (e / e.sum()).matrix().transpose();
  }
  return logr;
}

double elbo(const Eigen::MatrixXd& resp, const Stats& s, const Prior& p,
            const std::vector<GaussWishart>& q, const Sticks& sticks) {
  const int d = static_cast<int>(p.m.size());
  const auto c = static_cast<Eigen::Index>(q.size());
  const Eigen::VectorXd eln_pi = sticks.expected_log_weights();
  const double ln_b0 = log_wishart_norm(p.ln_det_w, p.nu, d);
  double total = 0.0;
  for (Eigen::Index k = 0; k < c; ++k) {
    const auto& g = q[static_cast<std::size_t>(k)];
    const double nk = s.counts[k];
    const auto& xbar = s.means[static_cast<std::size_t>(k)];
    // E[ln p(X | Z, mu, Lambda)]
    total += 0.5 * nk *
             (g.e_ln_lambda - d / g.beta - g.nu * g.trace_w(s.scatter[static_cast<std::size_t>(k)]) -
              g.nu * g.quad_w(xbar - g.m) - d * kLn2Pi);
    // E[ln p(Z | v)]
    total += nk * eln_pi[k];
    // E[ln p(mu, Lambda)]
    total += 0.5 * (d * std::log(p.beta / (2.0 * std::numbers::pi)) + g.e_ln_lambda - d * p.beta / g.beta -
                    p.beta * g.nu * g.quad_w(g.m - p.m)) +
             ln_b0 + 0.5 * (p.nu - d - 1) * g.e_ln_lambda - 0.5 * g.nu * g.trace_w(p.winv);
    // -E[ln q(mu, Lambda)]
    const double entropy_w = -log_wishart_norm(g.ln_det_w, g.nu, d) - 0.5 * (g.nu - d - 1) * g.e_ln_lambda +
                             0.5 * g.nu * d;
    total -= 0.5 * g.e_ln_lambda + 0.5 * d * std::log(g.beta / (2.0 * std::numbers::pi)) - 0.5 * d - entropy_w;
  }
  for (Eigen::Index k = 0; k < c - 1; ++k) {
    const double a = sticks.a[k];
    const double b = sticks.b[k];
    const double ab = digamma(a + b);
    const double eln_v = digamma(a) - ab;
    const double eln_1mv = digamma(b) - ab;
    // E[ln p(v_k)] with v_k ~ Beta(1, alpha)
    total += std::log(p.alpha) + (p.alpha - 1.0) * eln_1mv;
    // -E[ln q(v_k)]
    total -= std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * eln_v + (b - 1.0) * eln_1mv;
  }
  // -E[ln q(Z)]
  for (Eigen::Index i = 0; i < resp.size(); ++i) {
    const double r = resp.data()[i];
    if (r > 0.0) total -= r * std::log(r);
  }
  return total;
}

// k-means++ seeding followed by Lloyd iterations; returns hard responsibilities.
Eigen::MatrixXd kmeans_init(const Eigen::MatrixXd& x, Eigen::Index c, int iterations, std::uint64_t seed) {
  const auto n = x.cols();
  std::mt19937_64 rng(derive_seed(seed, 0x6b6d65616e73ULL));
  Eigen::MatrixXd centres(x.rows(), c);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centres.col(0) = x.col(pick(rng));
  Eigen::VectorXd best = (x.colwise() - centres.col(0)).colwise().squaredNorm().transpose();
  for (Eigen::Index k = 1; k < c; ++k) {
    const double total = best.sum();
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= best[i];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centres.col(k) = x.col(chosen);
    best = best.cwiseMin((x.colwise() - centres.col(k)).colwise().squaredNorm().transpose());
  }

  std::vector<Eigen::Index> label(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      (centres.colwise() - x.col(i)).colwise().squaredNorm().minCoeff(&arg);
      if (arg != label[static_cast<std::size_t>(i)]) changed = true;
      label[static_cast<std::size_t>(i)] = arg;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x.rows(), c);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(label[static_cast<std::size_t>(i)]) += x.col(i);
      counts[label[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      if (counts[k] > 0) centres.col(k) = sums.col(k) / counts[k];
    }
    if (!changed && it > 0) break;
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, label[static_cast<std::size_t>(i)]) = 1.0;
  return resp;
}

Eigen::MatrixXd random_init(Eigen::Index n, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x72616e64ULL));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd resp(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) resp(i, k) = u(rng);
    resp.row(i) /= resp.row(i).sum();
  }
  return resp;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over a mix of both words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(index));
}

double GmmModel::log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto d = static_cast<double>(x.size());
  std::vector<double> terms;
  terms.reserve(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto& l = cholesky[k];
    const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(x - means[k]);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    terms.push_back(std::log(weights[k]) - 0.5 * (d * kLn2Pi + log_det + z.squaredNorm()));
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

void GmmModel::factorize(double jitter) {
  cholesky.clear();
  for (auto& cov : covariances) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    double added = jitter;
    for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
      if (attempt >= 12) throw NumericalError("covariance regularization failure after jitter");
      cov.diagonal().array() += added;
      added *= 10.0;
      llt.compute(cov);
    }
    cholesky.emplace_back(llt.matrixL());
  }
}

DpGmmFit fit_dpgmm(const Eigen::MatrixXd& data, const DpGmmConfig& config) {
  const auto d = data.rows();
  const auto n = data.cols();
  if (n < d) {
    throw InputError("DP-GMM needs at least as many samples as dimensions (" + std::to_string(n) + " < " +
                     std::to_string(d) + ")");
  }
  if (!data.allFinite()) throw InputError("DP-GMM input contains non-finite values");
  if (config.max_components < 1) throw InputError("DP-GMM needs at least one component");
  const auto c = std::min<Eigen::Index>(config.max_components, n);

  Prior prior;
  prior.alpha = config.weight_concentration > 0.0 ? config.weight_concentration : 1.0 / config.max_components;
  prior.beta = 1.0;
  prior.nu = static_cast<double>(d);
  prior.m = data.rowwise().mean();
  const Eigen::MatrixXd centred = data.colwise() - prior.m;
  // scale chosen so the prior expected component covariance is the data covariance
  prior.winv = prior.nu * centred * centred.transpose() / static_cast<double>(n - 1 > 0 ? n - 1 : 1);
  prior.winv.diagonal().array() += config.jitter;
  {
    Eigen::LLT<Eigen::MatrixXd> llt(prior.winv);
    if (llt.info() != Eigen::Success) throw NumericalError("DP-GMM: data covariance is not positive definite");
    prior.ln_det_w = -2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }

  std::vector<GaussWishart> q(static_cast<std::size_t>(c));
  for (auto& g : q) g.m = prior.m;
  Sticks sticks;
  Eigen::MatrixXd resp = config.init == DpGmmInit::kmeans ? kmeans_init(data, c, config.kmeans_iterations, config.seed)
                                                          : random_init(n, c, config.seed);

  DpGmmFit fit;
  for (int it = 0; it < config.max_iterations; ++it) {
    const Stats s = sufficient_stats(data, resp);
    update_params(s, prior, q, sticks);
    const double bound = elbo(resp, s, prior, q, sticks);
    if (!std::isfinite(bound)) throw NumericalError("DP-GMM: non-finite ELBO at iteration " + std::to_string(it));
    fit.elbo.push_back(bound);
    fit.iterations = it + 1;
    if (fit.elbo.size() > 1 &&
        std::abs(bound - fit.elbo[fit.elbo.size() - 2]) / static_cast<double>(n) < config.tolerance) {
      fit.converged = true;
      break;
    }
    resp = responsibilities(data, q, sticks);
  }

  const auto weights = sticks.expected_weights();
  double kept = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < config.prune_weight) continue;
    kept += weights[k];
    fit.model.weights.push_back(weights[k]);
    fit.model.means.push_back(q[k].m);
    fit.model.covariances.push_back(q[k].winv / q[k].nu);
  }
  if (fit.model.weights.empty()) throw NumericalError("DP-GMM: every component was pruned");
  for (auto& w : fit.model.weights) w /= kept;
  fit.model.truncation = static_cast<int>(c);
  fit.model.factorize(config.jitter);
  return fit;
}

Eigen::VectorXd sample_gmm_one(const GmmModel& model, std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 rng(derive_seed(seed, index));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double u = uniform(rng);
  std::size_t k = 0;
  for (; k + 1 < model.weights.size(); ++k) {
    u -= model.weights[k];
    if (u < 0.0) break;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(model.dimension());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return model.means[k] + model.cholesky[k].triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd sample_gmm(const GmmModel& model, std::size_t count, std::uint64_t seed) {
  if (model.components() == 0) throw InputError("sampling from an empty mixture");
  Eigen::MatrixXd out(model.dimension(), static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) out.col(static_cast<Eigen::Index>(k)) = sample_gmm_one(model, seed, k);
  return out;
}

}  // namespace bgcmeta
