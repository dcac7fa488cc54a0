#include "bgcmeta/fixtures.hpp"

#include "bgcmeta/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace bgcmeta {

namespace {

struct WaterType {
  double weight;
  double log_tss, log_doc, log_chl;
  double temp, temp_sd;
  double sal, sal_sd;
  double s_y;
  double log_ad;
};

constexpr WaterType kWaterTypes[] = {
    {0.35, -0.05, 0.05, -0.35, 25.0, 3.0, 34.0, 2.5, 0.0175, -1.55},
    {0.40, 0.55, 0.40, 0.30, 22.0, 3.5, 24.0, 5.0, 0.0160, -1.35},
    {0.25, 1.25, 0.80, 0.75, 19.0, 3.5, 8.0, 5.0, 0.0150, -1.20},
};

double clamp_log(double log_value, double lo, double hi) {
  return std::clamp(std::pow(10.0, log_value), lo, hi);
}

Spectrum phyto_shape(double red_ratio, double blue_width) {
  const auto raw = [&](double l) {
    return 0.08 + std::exp(-0.5 * std::pow((l - 438.0) / blue_width, 2)) +
           0.35 * std::exp(-0.5 * std::pow((l - 490.0) / 22.0, 2)) +
           red_ratio * std::exp(-0.5 * std::pow((l - 675.0) / 11.0, 2));
  };
  const double at440 = raw(440.0);
  return Spectrum::from_function([&](double l) { return raw(l) / at440; });
}

}  // namespace

SpectralLibrary make_fixture_library(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InputError("fixture library needs at least one record");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::discrete_distribution<int> pick({kWaterTypes[0].weight, kWaterTypes[1].weight, kWaterTypes[2].weight});
  const auto& grid = WavelengthGrid::standard();

  std::vector<LibraryRecord> records;
  records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const WaterType& w = kWaterTypes[pick(rng)];
    const double shared = z(rng);
    LibraryRecord r;
    r.tss = clamp_log(w.log_tss + 0.30 * z(rng) + 0.12 * shared, 0.1333, 69.83);
    r.doc = clamp_log(w.log_doc + 0.18 * z(rng) + 0.05 * shared, 0.24, 14.25);
    r.tchla = clamp_log(w.log_chl + 0.28 * z(rng) + 0.10 * shared, 0.0589, 22.04);
    r.temp = std::clamp(w.temp + w.temp_sd * z(rng), 12.13, 31.40);
    r.sal = std::clamp(w.sal + w.sal_sd * z(rng), 0.08, 39.4);

    const double a_y_star = std::pow(10.0, -0.60 + 0.15 * z(rng));
    r.a_y_440 = a_y_star * r.doc;
    r.s_y = std::max(0.008, w.s_y + 0.0015 * z(rng));
    const double b_bp_star = std::pow(10.0, -1.95 + 0.18 * z(rng));
    r.b_bp_550 = b_bp_star * r.tss;
    r.s_bbp = std::clamp(1.0 + 0.3 * z(rng), 0.0, 2.5);

    const double a_d_star = clamp_log(w.log_ad + 0.20 * z(rng), 0.0018, 0.2573);
    const double s_d = std::max(0.006, 0.0110 + 0.0010 * z(rng));
    const double a_ph_star = clamp_log(-1.30 + 0.20 * z(rng) - 0.08 * std::log10(r.tchla), 0.0099, 0.4004);
    const Spectrum shape = phyto_shape(std::clamp(0.45 + 0.08 * z(rng), 0.2, 0.8), 28.0 + 3.0 * z(rng));

    // Smooth measurement-like wiggle, zero at 440 nm so the 440 values stay as drawn.
    auto wiggle = [&] {
      const double c1 = 0.02 * z(rng), c2 = 0.01 * z(rng);
      return [c1, c2](double l) {
        return std::exp(c1 * std::sin(2.0 * std::numbers::pi * (l - 440.0) / 160.0) +
                        c2 * std::sin(2.0 * std::numbers::pi * (l - 440.0) / 90.0));
      };
    };
    const auto w_d = wiggle();
    const auto w_ph = wiggle();
    Eigen::ArrayXd a_d(kBandCount), a_ph(kBandCount);
    for (Eigen::Index b = 0; b < kBandCount; ++b) {
      const double l = grid.wavelength(static_cast<std::size_t>(b));
      a_d[b] = r.tss * a_d_star * std::exp(-s_d * (l - 440.0)) * w_d(l);
      a_ph[b] = r.tchla * a_ph_star * shape.values()[b] * w_ph(l);
    }
    r.a_d = Spectrum(a_d);
    r.a_ph = Spectrum(a_ph);
    records.push_back(std::move(r));
  }
  return SpectralLibrary(std::move(records));
}

RegionSplit carve_region(const SyntheticDataset& dataset, std::size_t count, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  if (count == 0 || count >= n) throw InputError("region size must be between 1 and the dataset size - 1");
  Eigen::MatrixXd scores(kSiopScoreDim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) scores.col(static_cast<Eigen::Index>(i)) = dataset.records[i].siop_scores();
  const Eigen::VectorXd mean = scores.rowwise().mean();
  Eigen::VectorXd sd = ((scores.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  for (Eigen::Index k = 0; k < sd.size(); ++k) {
    if (!(sd[k] > 1e-12)) sd[k] = 1.0;
  }
  const Eigen::MatrixXd zs = ((scores.colwise() - mean).array().colwise() / sd.array()).matrix();

  std::mt19937_64 rng(seed);
  const std::size_t anchor = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  const Eigen::VectorXd dist =
      (zs.colwise() - zs.col(static_cast<Eigen::Index>(anchor))).colwise().squaredNorm().transpose();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[static_cast<Eigen::Index>(a)] < dist[static_cast<Eigen::Index>(b)];
  });

  std::vector<bool> in_region(n, false);
  for (std::size_t j = 0; j < count; ++j) in_region[order[j]] = true;

  RegionSplit split;
  split.remainder.bases = dataset.bases;
  split.remainder.clamps = dataset.clamps;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = dataset.records[i];
    if (in_region[i]) {
      split.region.push_back({"synthetic-" + std::to_string(i), rec.bgc.tss, rec.bgc.doc, rec.bgc.tchla, rec.rrs});
    } else {
      split.remainder.records.push_back(rec);
    }
  }
  return split;
}

}  // namespace bgcmeta
