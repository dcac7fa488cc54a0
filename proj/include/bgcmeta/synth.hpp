#pragma once

#include "bgcmeta/bio_optics.hpp"
#include "bgcmeta/dpgmm.hpp"
#include "bgcmeta/pca.hpp"
#include "bgcmeta/siop_library.hpp"

#include <cstdint>
#include <vector>

namespace bgcmeta {

inline constexpr int kPcaComponents = 5;
inline constexpr int kSiopScoreDim = 4 * kPcaComponents;
inline constexpr int kFeatureDim = 5 + kSiopScoreDim;

/// Positions inside a feature vector:
/// [log10 TSS, log10 DOC, log10 TChl-a, a*_d x5, a*_y x5, a*_ph x5, b*_bp x5, T, S]
namespace feature {
inline constexpr int kTss = 0;
inline constexpr int kDoc = 1;
inline constexpr int kTchla = 2;
inline constexpr int kScores = 3;
inline constexpr int kNap = kScores;
inline constexpr int kCdom = kNap + kPcaComponents;
inline constexpr int kPhyto = kCdom + kPcaComponents;
inline constexpr int kBackscatter = kPhyto + kPcaComponents;
inline constexpr int kTemp = kBackscatter + kPcaComponents;
inline constexpr int kSal = kTemp + 1;
}  // namespace feature

/// One PCA basis per SIOP family, each fitted on log10 spectra.
struct SiopBases {
  PcaBasis a_d;
  PcaBasis a_y;
  PcaBasis a_ph;
  PcaBasis b_bp;
};

SiopBases fit_siop_bases(const SpectralLibrary& library, int components = kPcaComponents);

/// The 20 PC scores of a SIOP set, family order d, y, ph, bp.
Eigen::VectorXd siop_scores(const SiopSet& siops, const SiopBases& bases);

Eigen::VectorXd assemble_feature(const BgcState& bgc, const SiopSet& siops, const SiopBases& bases);
/// 25 x N feature matrix, one library record per column.
Eigen::MatrixXd assemble_features(const SpectralLibrary& library, const SiopBases& bases);

struct FeatureClamps {
  double sal_min = 0.0;
  double sal_max = 42.0;
  double temp_min = -2.0;
  double temp_max = 40.0;
};

struct PhysicalSample {
  BgcState bgc;
  SiopSet siops;
};

/// Back to physical space: 10^x for concentrations and SIOP spectra,
/// T and S passed through with clamping.
PhysicalSample invert_features(const Eigen::Ref<const Eigen::VectorXd>& features, const SiopBases& bases,
                               const FeatureClamps& clamps = {});

/// Per-dimension z-scoring. Dimensions with (numerically) zero spread are
/// inactive: they are left out of the mixture fit and restored at their mean.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<int> active;

  static Standardizer fit(const Eigen::MatrixXd& data);
  /// Active dimensions only, z-scored.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& data) const;
  Eigen::VectorXd inverse(const Eigen::Ref<const Eigen::VectorXd>& active_values) const;
};

/// Everything needed to draw new feature vectors.
struct SynthModel {
  SiopBases bases;
  Standardizer standardizer;
  GmmModel gmm;
  DpGmmConfig gmm_config;
  std::vector<double> elbo;

  /// Feature vector for draw `index` of a run seeded with `seed`.
  Eigen::VectorXd sample(std::uint64_t seed, std::uint64_t index) const;
  /// 25 x count matrix of draws.
  Eigen::MatrixXd sample_features(std::size_t count, std::uint64_t seed) const;
};

SynthModel fit_synth_model(const SpectralLibrary& library, const DpGmmConfig& config);

struct SynthOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  double noise_fraction = 0.0;  // Gaussian noise sigma as a fraction of R_rs; 0 disables
  unsigned threads = 1;
  FeatureClamps clamps;
  DpGmmConfig gmm;
};

struct SyntheticRecord {
  BgcState bgc;
  Eigen::VectorXd features;  // the drawn feature vector (length 25)
  Spectrum rrs;

  Eigen::VectorXd siop_scores() const { return features.segment(feature::kScores, kSiopScoreDim); }
};

/// Synthetic BGC / SIOP / R_rs records. SIOP spectra are regenerated from
/// the stored scores through the bases, so they are not kept per record.
struct SyntheticDataset {
  SiopBases bases;
  FeatureClamps clamps;
  std::vector<SyntheticRecord> records;

  std::size_t size() const { return records.size(); }
  SiopSet siops(std::size_t i) const;
};

SyntheticDataset generate_dataset(const SynthModel& model, const SynthOptions& options,
                                  const WaterIopTables& tables);
/// Fits the model on the library, then samples and simulates.
SyntheticDataset generate_dataset(const SpectralLibrary& library, const SynthOptions& options,
                                  const WaterIopTables& tables, SynthModel* fitted = nullptr);

}  // namespace bgcmeta
