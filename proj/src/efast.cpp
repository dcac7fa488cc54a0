#include "bgcmeta/efast.hpp"

#include "bgcmeta/error.hpp"
#include "bgcmeta/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bgcmeta {

double ParameterRange::map(double unit) const {
  if (log_uniform) return std::exp(std::log(lo) + unit * (std::log(hi) - std::log(lo)));
  return lo + unit * (hi - lo);
}

int efast_driver_frequency(const EfastConfig& config) {
  return (config.samples - 1) / (2 * config.interference);
}

std::vector<int> efast_complementary_frequencies(const EfastConfig& config, int parameters) {
  const int max_freq = efast_driver_frequency(config) / (2 * config.interference);
  const int count = parameters - 1;
  std::vector<int> freq(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return freq;
  if (max_freq >= count) {
    for (int j = 0; j < count; ++j) {
      const double t = count == 1 ? 0.0 : static_cast<double>(j) / (count - 1);
      freq[static_cast<std::size_t>(j)] = static_cast<int>(std::floor(1.0 + t * (max_freq - 1)));
    }
  } else {
    for (int j = 0; j < count; ++j) freq[static_cast<std::size_t>(j)] = j % max_freq + 1;
  }
  return freq;
}

EfastIndices efast_indices(const BatchModel& model, std::span<const ParameterRange> ranges, const EfastConfig& config) {
  const int n = config.samples;
  const int m = config.interference;
  if (n < 65 || n % 2 == 0) throw InputError("EFAST sample count must be odd and at least 65");
  if (m < 1) throw InputError("EFAST interference factor must be positive");
  const int p = static_cast<int>(ranges.size());
  if (p < 1) throw InputError("EFAST needs at least one parameter");
  for (const auto& r : ranges) {
    if (!(r.hi >= r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi) || (r.log_uniform && !(r.lo > 0.0))) {
      throw InputError("EFAST ranges must be finite, ordered and positive for log-uniform sampling");
    }
  }
  const int omega = efast_driver_frequency(config);
  if (omega < 2 * m) throw InputError("EFAST sample count too small for the interference factor");
  const auto others = efast_complementary_frequencies(config, p);
  const int half = (n - 1) / 2;

  // DFT basis for frequencies 1..half.
  Eigen::MatrixXd cos_t(n, half), sin_t(n, half);
  for (int s = 0; s < n; ++s) {
    for (int k = 1; k <= half; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(k) * s) % n) / n;
      cos_t(s, k - 1) = std::cos(angle);
      sin_t(s, k - 1) = std::sin(angle);
    }
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  EfastIndices out;
  for (int i = 0; i < p; ++i) {
    std::vector<int> freq(static_cast<std::size_t>(p));
    for (int j = 0, o = 0; j < p; ++j) freq[static_cast<std::size_t>(j)] = j == i ? omega : others[static_cast<std::size_t>(o++)];
    const double phase = phase_dist(rng);

    Eigen::MatrixXd x(p, n);
    for (int s = 0; s < n; ++s) {
      const double arg = 2.0 * std::numbers::pi * s / n;
      for (int j = 0; j < p; ++j) {
        const double g = 0.5 + std::asin(std::sin(freq[static_cast<std::size_t>(j)] * arg + phase)) / std::numbers::pi;
        x(j, s) = ranges[static_cast<std::size_t>(j)].map(std::clamp(g, 0.0, 1.0));
      }
    }
    const Eigen::MatrixXd y = model(x);
    if (y.cols() != n) throw InputError("EFAST model returned the wrong number of evaluations");
    if (!y.allFinite()) throw NumericalError("EFAST model produced non-finite output");
    if (i == 0) {
      out.s1 = Eigen::MatrixXd::Zero(y.rows(), p);
      out.st = Eigen::MatrixXd::Zero(y.rows(), p);
    }
    const Eigen::ArrayXXd sp = (((y * cos_t).array().square() + (y * sin_t).array().square()) / (double(n) * n));

    const bool degenerate = ranges[static_cast<std::size_t>(i)].hi == ranges[static_cast<std::size_t>(i)].lo;
    for (Eigen::Index b = 0; b < y.rows(); ++b) {
      const double v = 2.0 * sp.row(b).sum();
      // variance at round-off level of the output means a flat response
      if (degenerate || !(v > 1e-14 * y.row(b).array().square().mean())) continue;
      double d1 = 0.0;
      for (int h = 1; h <= m && h * omega <= half; ++h) d1 += sp(b, h * omega - 1);
      const double dt = 2.0 * sp.row(b).head(omega / 2).sum();
      out.s1(b, i) = 2.0 * d1 / v;
      out.st(b, i) = 1.0 - dt / v;
    }
  }
  return out;
}

SiopSet median_siops(const SpectralLibrary& library) {
  if (library.empty()) throw InputError("median SIOPs of an empty library");
  const std::size_t n = library.size();
  const auto median_of = [&](auto member) {
    Eigen::ArrayXd out(kBandCount);
    std::vector<double> column(n);
    for (Eigen::Index b = 0; b < kBandCount; ++b) {
      for (std::size_t i = 0; i < n; ++i) column[i] = (library.siop(i).*member).values()[b];
      out[b] = summarize(column).median;
    }
    return Spectrum(out);
  };
  return {median_of(&SiopSet::a_d_star), median_of(&SiopSet::a_y_star), median_of(&SiopSet::a_ph_star),
          median_of(&SiopSet::b_bp_star)};
}

std::array<ParameterRange, 3> library_ranges(const SpectralLibrary& library) {
  std::array<ParameterRange, 3> out;
  for (std::size_t j = 0; j < 3; ++j) {
    const auto values = library_variable(library, kBgcNames[j]);
    const auto s = summarize(values);
    out[j] = {s.min, s.max, true};
  }
  return out;
}

EfastIndices forward_sensitivity(const ForwardSensitivitySetup& setup, const WaterIopTables& tables,
                                 const EfastConfig& config, unsigned threads) {
  setup.siops.validate();
  const BatchModel model = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd y(kBandCount, x.cols());
    parallel_for(static_cast<std::size_t>(x.cols()), threads, [&](std::size_t c) {
      const auto col = static_cast<Eigen::Index>(c);
      const BgcState bgc{x(0, col), x(1, col), x(2, col), setup.temp, setup.sal};
      y.col(col) = forward(bgc, setup.siops, tables).values().matrix();
    });
    return y;
  };
  return efast_indices(model, setup.ranges, config);
}

}  // namespace bgcmeta
