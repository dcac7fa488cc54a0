#include "bgcmeta/metrics.hpp"

#include "bgcmeta/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace bgcmeta {

RetrievalMetrics retrieval_metrics(std::span<const double> predicted, std::span<const double> measured) {
  if (predicted.size() != measured.size()) throw InputError("metrics: predicted and measured differ in length");
  std::vector<double> lp, lm;
  RetrievalMetrics m;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double p = predicted[i];
    const double y = measured[i];
    if (!(p > 0.0) || !(y > 0.0) || !std::isfinite(p) || !std::isfinite(y)) {
      ++m.n_excluded;
      continue;
    }
    lp.push_back(std::log10(p));
    lm.push_back(std::log10(y));
  }
  m.n = lp.size();
  if (m.n < 2) throw InputError("metrics need at least 2 valid pairs, got " + std::to_string(m.n));

  const double n = static_cast<double>(m.n);
  double mean_meas = 0.0;
  for (double v : lm) mean_meas += v;
  mean_meas /= n;
  double ss_res = 0.0, ss_tot = 0.0, sum_diff = 0.0, sum_abs = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    const double d = lp[i] - lm[i];
    ss_res += d * d;
    ss_tot += (lm[i] - mean_meas) * (lm[i] - mean_meas);
    sum_diff += d;
    sum_abs += std::abs(d);
  }
  if (ss_tot > 0.0) m.r2 = 1.0 - ss_res / ss_tot;
  m.bias = std::pow(10.0, sum_diff / n);
  m.rmse = std::pow(10.0, std::sqrt(ss_res / n));
  m.mae = std::pow(10.0, sum_abs / n);
  return m;
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double en = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
  return r;
}

}  // namespace bgcmeta
