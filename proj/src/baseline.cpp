#include "bgcmeta/baseline.hpp"

#include "bgcmeta/error.hpp"

#include <cmath>
#include <string>

namespace bgcmeta {

double BandRatioModel::ratio(const Spectrum& rrs) const {
  const double num = rrs.at_nm(numerator_nm);
  const double den = rrs.at_nm(denominator_nm);
  if (!(den > 0.0) || !(num > 0.0)) {
    throw InputError("band ratio " + std::to_string(numerator_nm) + "/" + std::to_string(denominator_nm) +
                     " needs positive reflectance in both bands");
  }
  return num / den;
}

double BandRatioModel::predict(const Spectrum& rrs) const {
  return std::pow(10.0, c0 + c1 * std::log10(ratio(rrs)));
}

BandRatioModel fit_band_ratio(std::span<const Spectrum> rrs, std::span<const double> target, BandPair bands) {
  if (rrs.size() != target.size()) throw InputError("band-ratio fit: spectra and targets differ in length");
  if (rrs.size() < 3) throw InputError("band-ratio fit needs at least 3 records");
  BandRatioModel model{bands.numerator_nm, bands.denominator_nm, 0.0, 0.0};
  const auto n = static_cast<double>(rrs.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(rrs.size()), ys(rrs.size());
  for (std::size_t i = 0; i < rrs.size(); ++i) {
    if (!(target[i] > 0.0)) throw InputError("band-ratio fit: target " + std::to_string(i + 1) + " is not positive");
    xs[i] = std::log10(model.ratio(rrs[i]));
    ys[i] = std::log10(target[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 1e-24 * std::max(1.0, mx * mx))) {
    throw InputError("band-ratio fit: the ratio is constant across records, slope undefined");
  }
  model.c1 = sxy / sxx;
  model.c0 = my - model.c1 * mx;
  return model;
}

CvResult band_ratio_cross_validate(std::span<const RegionSample> region, int folds, std::uint64_t seed,
                                   const std::array<BandPair, 3>& bands) {
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (region.size() < static_cast<std::size_t>(folds)) throw InputError("region is smaller than the fold count");
  const auto fold_of = assign_folds(region.size(), folds, seed);
  CvResult cv;
  cv.predictions.resize(region.size());
  cv.best_iterations.assign(static_cast<std::size_t>(folds), 0);
  for (int f = 0; f < folds; ++f) {
    std::vector<Spectrum> spectra;
    std::array<std::vector<double>, 3> targets;
    for (std::size_t i = 0; i < region.size(); ++i) {
      if (fold_of[i] == f) continue;
      spectra.push_back(region[i].rrs);
      targets[0].push_back(region[i].tss);
      targets[1].push_back(region[i].doc);
      targets[2].push_back(region[i].tchla);
    }
    std::array<BandRatioModel, 3> models;
    for (std::size_t v = 0; v < 3; ++v) models[v] = fit_band_ratio(spectra, targets[v], bands[v]);
    for (std::size_t i = 0; i < region.size(); ++i) {
      if (fold_of[i] != f) continue;
      auto& p = cv.predictions[i];
      p.index = i;
      p.fold = f;
      for (std::size_t v = 0; v < 3; ++v) p.predicted[v] = models[v].predict(region[i].rrs);
      p.measured = {region[i].tss, region[i].doc, region[i].tchla};
    }
  }
  for (std::size_t v = 0; v < 3; ++v) {
    std::vector<double> pred, meas;
    for (const auto& p : cv.predictions) {
      pred.push_back(p.predicted[v]);
      meas.push_back(p.measured[v]);
    }
    cv.metrics[v] = retrieval_metrics(pred, meas);
  }
  return cv;
}

}  // namespace bgcmeta
