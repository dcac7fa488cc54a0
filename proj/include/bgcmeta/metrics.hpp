#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace bgcmeta {

/// Log10-space retrieval scores. bias, rmse and mae are multiplicative
/// factors (10 raised to the log-space statistic).
struct RetrievalMetrics {
  std::optional<double> r2;  // empty when measured logs have zero variance
  double bias = 1.0;
  double rmse = 1.0;
  double mae = 1.0;
  std::size_t n = 0;
  std::size_t n_excluded = 0;  // pairs dropped for a nonpositive value
};

/// Pairs with a nonpositive or non-finite value on either side are
/// excluded; at least two valid pairs must remain.
RetrievalMetrics retrieval_metrics(std::span<const double> predicted, std::span<const double> measured);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

}  // namespace bgcmeta
