#pragma once

#include "bgcmeta/bio_optics.hpp"
#include "bgcmeta/spectral.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bgcmeta {

/// One field sample of the bio-optical spectral library.
struct LibraryRecord {
  double temp = 22.0;
  double sal = 0.0;
  double tss = 1.0;
  double doc = 1.0;
  double tchla = 1.0;
  double a_y_440 = 0.0;   // m^-1
  double s_y = 0.0;       // nm^-1
  double b_bp_550 = 0.0;  // m^-1
  double s_bbp = 0.0;
  Spectrum a_d;   // m^-1
  Spectrum a_ph;  // m^-1

  void validate() const;
  BgcState bgc() const { return {tss, doc, tchla, temp, sal}; }
};

// Mass-specific coefficients from measured IOPs.
Spectrum derive_cdom_siop(double a_y_440, double s_y, double doc);
Spectrum derive_bbp_siop(double b_bp_550, double s_bbp, double tss);
Spectrum derive_nap_siop(const Spectrum& a_d, double tss);
Spectrum derive_ph_siop(const Spectrum& a_ph, double tchla);
SiopSet derive_siops(const LibraryRecord& record);

/// Library records with their derived SIOPs, index-aligned.
class SpectralLibrary {
 public:
  SpectralLibrary() = default;
  explicit SpectralLibrary(std::vector<LibraryRecord> records);

  /// Parses library.csv. Rows with empty/NaN fields are dropped and a
  /// warning naming the line is appended to `warnings` (if given).
  static SpectralLibrary load(const std::filesystem::path& path,
                              std::vector<std::string>* warnings = nullptr);
  static SpectralLibrary parse(std::istream& in, const std::string& source,
                               std::vector<std::string>* warnings = nullptr);
  void save(std::ostream& out) const;

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<LibraryRecord>& records() const { return records_; }
  const std::vector<SiopSet>& siops() const { return siops_; }
  const LibraryRecord& record(std::size_t i) const { return records_.at(i); }
  const SiopSet& siop(std::size_t i) const { return siops_.at(i); }

 private:
  std::vector<LibraryRecord> records_;
  std::vector<SiopSet> siops_;
};

struct SummaryStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population (divide by N)
};

SummaryStats summarize(std::span<const double> values);

struct NamedStats {
  std::string variable;
  SummaryStats stats;
};

/// Statistics for T, S, TSS, DOC, TChl-a, a*_y(440), b*_bp(550), a*_d(440)
/// and a*_ph(440), in that order.
std::vector<NamedStats> summary_stats(const SpectralLibrary& library);

/// Variables of the library correlation matrix, raw (not log) values.
inline constexpr std::array<std::string_view, 9> kCorrelationVariables = {
    "temp", "sal", "tss", "doc", "tchla", "a_y_440", "b_bp_550", "a_d_440", "a_ph_440"};

/// Column of one of kCorrelationVariables across the library.
std::vector<double> library_variable(const SpectralLibrary& library, std::string_view name);

/// Pearson r; empty when either input has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

using CorrelationMatrix = std::array<std::array<std::optional<double>, 9>, 9>;
CorrelationMatrix correlation_matrix(const SpectralLibrary& library);

}  // namespace bgcmeta
