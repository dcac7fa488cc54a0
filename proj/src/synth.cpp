#include "bgcmeta/synth.hpp"

#include "bgcmeta/error.hpp"
#include "bgcmeta/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace bgcmeta {

namespace {

constexpr double kInactiveSpread = 1e-9;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

Eigen::VectorXd log10_spectrum(const Spectrum& s, const char* name) {
  if (!(s.values() > 0.0).all()) {
    throw InputError(std::string("log10 of a nonpositive ") + name + " value");
  }
  return s.values().log10().matrix();
}

Spectrum exp10_spectrum(const Eigen::VectorXd& log_values) {
  return Spectrum(Eigen::pow(10.0, log_values.array()));
}

double checked_log10(double x, const char* name) {
  if (!(x > 0.0)) throw InputError(std::string(name) + " must be positive to take log10");
  return std::log10(x);
}

}  // namespace

SiopBases fit_siop_bases(const SpectralLibrary& library, int components) {
  const auto n = static_cast<Eigen::Index>(library.size());
  Eigen::MatrixXd ad(kBandCount, n), ay(kBandCount, n), aph(kBandCount, n), bbp(kBandCount, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = library.siop(static_cast<std::size_t>(i));
    ad.col(i) = log10_spectrum(s.a_d_star, "a*_d");
    ay.col(i) = log10_spectrum(s.a_y_star, "a*_y");
    aph.col(i) = log10_spectrum(s.a_ph_star, "a*_ph");
    bbp.col(i) = log10_spectrum(s.b_bp_star, "b*_bp");
  }
  return {fit_pca(ad, components), fit_pca(ay, components), fit_pca(aph, components), fit_pca(bbp, components)};
}

Eigen::VectorXd siop_scores(const SiopSet& siops, const SiopBases& bases) {
  const auto p = bases.a_d.rank();
  Eigen::VectorXd out(4 * p);
  out.segment(0, p) = bases.a_d.project(log10_spectrum(siops.a_d_star, "a*_d"));
  out.segment(p, p) = bases.a_y.project(log10_spectrum(siops.a_y_star, "a*_y"));
  out.segment(2 * p, p) = bases.a_ph.project(log10_spectrum(siops.a_ph_star, "a*_ph"));
  out.segment(3 * p, p) = bases.b_bp.project(log10_spectrum(siops.b_bp_star, "b*_bp"));
  return out;
}

Eigen::VectorXd assemble_feature(const BgcState& bgc, const SiopSet& siops, const SiopBases& bases) {
  Eigen::VectorXd v(kFeatureDim);
  v[feature::kTss] = checked_log10(bgc.tss, "TSS");
  v[feature::kDoc] = checked_log10(bgc.doc, "DOC");
  v[feature::kTchla] = checked_log10(bgc.tchla, "TChl-a");
  v.segment(feature::kScores, kSiopScoreDim) = siop_scores(siops, bases);
  v[feature::kTemp] = bgc.temp;
  v[feature::kSal] = bgc.sal;
  return v;
}

Eigen::MatrixXd assemble_features(const SpectralLibrary& library, const SiopBases& bases) {
  Eigen::MatrixXd y(kFeatureDim, static_cast<Eigen::Index>(library.size()));
  for (std::size_t i = 0; i < library.size(); ++i) {
    y.col(static_cast<Eigen::Index>(i)) = assemble_feature(library.record(i).bgc(), library.siop(i), bases);
  }
  return y;
}

PhysicalSample invert_features(const Eigen::Ref<const Eigen::VectorXd>& f, const SiopBases& bases,
                               const FeatureClamps& clamps) {
  if (f.size() != kFeatureDim) throw InputError("feature vector must have 25 entries");
  if (!f.allFinite()) throw InputError("feature vector contains non-finite values");
  const auto p = kPcaComponents;
  PhysicalSample out;
  out.bgc.tss = std::pow(10.0, f[feature::kTss]);
  out.bgc.doc = std::pow(10.0, f[feature::kDoc]);
  out.bgc.tchla = std::pow(10.0, f[feature::kTchla]);
  out.bgc.temp = std::clamp(f[feature::kTemp], clamps.temp_min, clamps.temp_max);
  out.bgc.sal = std::clamp(f[feature::kSal], clamps.sal_min, clamps.sal_max);
  out.siops.a_d_star = exp10_spectrum(bases.a_d.reconstruct(f.segment(feature::kNap, p)));
  out.siops.a_y_star = exp10_spectrum(bases.a_y.reconstruct(f.segment(feature::kCdom, p)));
  out.siops.a_ph_star = exp10_spectrum(bases.a_ph.reconstruct(f.segment(feature::kPhyto, p)));
  out.siops.b_bp_star = exp10_spectrum(bases.b_bp.reconstruct(f.segment(feature::kBackscatter, p)));
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& data) {
  Standardizer s;
  const auto n = static_cast<double>(data.cols());
  s.mean = data.rowwise().mean();
  s.scale = ((data.colwise() - s.mean).array().square().rowwise().sum() / n).sqrt().matrix();
  for (Eigen::Index d = 0; d < data.rows(); ++d) {
    if (s.scale[d] > kInactiveSpread * std::max(1.0, std::abs(s.mean[d]))) {
      s.active.push_back(static_cast<int>(d));
    } else {
      s.scale[d] = 1.0;
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::forward(const Eigen::MatrixXd& data) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(active.size()), data.cols());
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto d = active[i];
    out.row(static_cast<Eigen::Index>(i)) = (data.row(d).array() - mean[d]) / scale[d];
  }
  return out;
}

Eigen::VectorXd Standardizer::inverse(const Eigen::Ref<const Eigen::VectorXd>& active_values) const {
  Eigen::VectorXd out = mean;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto d = active[i];
    out[d] = mean[d] + scale[d] * active_values[static_cast<Eigen::Index>(i)];
  }
  return out;
}

Eigen::VectorXd SynthModel::sample(std::uint64_t seed, std::uint64_t index) const {
  return standardizer.inverse(sample_gmm_one(gmm, seed, index));
}

Eigen::MatrixXd SynthModel::sample_features(std::size_t count, std::uint64_t seed) const {
  Eigen::MatrixXd out(kFeatureDim, static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) out.col(static_cast<Eigen::Index>(k)) = sample(seed, k);
  return out;
}

SynthModel fit_synth_model(const SpectralLibrary& library, const DpGmmConfig& config) {
  if (library.size() < static_cast<std::size_t>(kFeatureDim)) {
    throw InputError("synthetic data generation needs at least 25 library records, got " +
                     std::to_string(library.size()));
  }
  SynthModel model;
  model.bases = fit_siop_bases(library);
  const Eigen::MatrixXd features = assemble_features(library, model.bases);
  model.standardizer = Standardizer::fit(features);
  auto fit = fit_dpgmm(model.standardizer.forward(features), config);
  model.gmm = std::move(fit.model);
  model.gmm_config = config;
  model.elbo = std::move(fit.elbo);
  return model;
}

SiopSet SyntheticDataset::siops(std::size_t i) const {
  return invert_features(records.at(i).features, bases, clamps).siops;
}

SyntheticDataset generate_dataset(const SynthModel& model, const SynthOptions& options,
                                  const WaterIopTables& tables) {
  if (options.noise_fraction < 0.0) throw InputError("noise fraction must be nonnegative");
  SyntheticDataset ds;
  ds.bases = model.bases;
  ds.clamps = options.clamps;
  ds.records.resize(options.count);
  const std::uint64_t noise_seed = derive_seed(options.seed, kNoiseStream);
  parallel_for(options.count, options.threads, [&](std::size_t k) {
    Eigen::VectorXd f = model.sample(options.seed, k);
    const auto phys = invert_features(f, model.bases, options.clamps);
    Spectrum rrs = forward(phys.bgc, phys.siops, tables);
    if (options.noise_fraction > 0.0) {
      std::mt19937_64 rng(derive_seed(noise_seed, k));
      std::normal_distribution<double> normal(0.0, options.noise_fraction);
      Eigen::ArrayXd noisy = rrs.values();
      for (Eigen::Index b = 0; b < noisy.size(); ++b) noisy[b] = std::max(0.0, noisy[b] * (1.0 + normal(rng)));
      rrs = Spectrum(std::move(noisy));
    }
    ds.records[k] = SyntheticRecord{phys.bgc, std::move(f), std::move(rrs)};
  });
  return ds;
}

SyntheticDataset generate_dataset(const SpectralLibrary& library, const SynthOptions& options,
                                  const WaterIopTables& tables, SynthModel* fitted) {
  DpGmmConfig cfg = options.gmm;
  cfg.seed = options.seed;
  auto model = fit_synth_model(library, cfg);
  auto ds = generate_dataset(model, options, tables);
  if (fitted) *fitted = std::move(model);
  return ds;
}

}  // namespace bgcmeta
