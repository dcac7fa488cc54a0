#include "bgcmeta/siop_library.hpp"

#include "bgcmeta/csv.hpp"
#include "bgcmeta/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

namespace bgcmeta {

namespace {

constexpr std::array<std::string_view, 9> kScalarColumns = {
    "temp", "sal", "tss", "doc", "tchla", "a_y_440", "s_y", "b_bp_550", "s_bbp"};

std::string band_column(std::string_view prefix, int nm) {
  return std::string(prefix) + "_" + std::to_string(nm);
}

bool is_missing(const std::string& cell) {
  if (cell.empty()) return true;
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "nan" || lower == "na" || lower == "null";
}

}  // namespace

void LibraryRecord::validate() const {
  if (!(tss > 0.0 && doc > 0.0 && tchla > 0.0)) {
    throw InputError("library record: concentrations must be positive");
  }
  if (!(s_y > 0.0)) throw InputError("library record: s_y must be positive");
  if (!(a_y_440 >= 0.0 && b_bp_550 >= 0.0)) {
    throw InputError("library record: a_y_440 and b_bp_550 must be nonnegative");
  }
  if (a_d.min() < 0.0 || a_ph.min() < 0.0) {
    throw InputError("library record: absorption spectra must be nonnegative");
  }
}

Spectrum derive_cdom_siop(double a_y_440, double s_y, double doc) {
  if (!(doc > 0.0)) throw InputError("derive_cdom_siop: DOC must be positive");
  return Spectrum::from_function(
      [&](double nm) { return a_y_440 * std::exp(-s_y * (nm - 440.0)) / doc; });
}

Spectrum derive_bbp_siop(double b_bp_550, double s_bbp, double tss) {
  if (!(tss > 0.0)) throw InputError("derive_bbp_siop: TSS must be positive");
  return Spectrum::from_function(
      [&](double nm) { return b_bp_550 * std::pow(nm / 550.0, -s_bbp) / tss; });
}

Spectrum derive_nap_siop(const Spectrum& a_d, double tss) {
  if (!(tss > 0.0)) throw InputError("derive_nap_siop: TSS must be positive");
  return Spectrum(a_d.values() / tss);
}

Spectrum derive_ph_siop(const Spectrum& a_ph, double tchla) {
  if (!(tchla > 0.0)) throw InputError("derive_ph_siop: TChl-a must be positive");
  return Spectrum(a_ph.values() / tchla);
}

SiopSet derive_siops(const LibraryRecord& r) {
  return {derive_nap_siop(r.a_d, r.tss), derive_cdom_siop(r.a_y_440, r.s_y, r.doc),
          derive_ph_siop(r.a_ph, r.tchla), derive_bbp_siop(r.b_bp_550, r.s_bbp, r.tss)};
}

SpectralLibrary::SpectralLibrary(std::vector<LibraryRecord> records) : records_(std::move(records)) {
  siops_.reserve(records_.size());
  for (const auto& r : records_) {
    r.validate();
    siops_.push_back(derive_siops(r));
  }
}

SpectralLibrary SpectralLibrary::load(const std::filesystem::path& path,
                                      std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse(in, path.string(), warnings);
}

SpectralLibrary SpectralLibrary::parse(std::istream& in, const std::string& source,
                                       std::vector<std::string>* warnings) {
  const auto t = csv::parse(in, source);
  std::array<std::size_t, kScalarColumns.size()> scalar{};
  for (std::size_t i = 0; i < kScalarColumns.size(); ++i) scalar[i] = t.column(kScalarColumns[i]);
  std::vector<std::size_t> ad_cols, aph_cols;
  for (int nm = kStartNm; nm <= kEndNm; nm += kStepNm) {
    ad_cols.push_back(t.column(band_column("a_d", nm)));
    aph_cols.push_back(t.column(band_column("a_ph", nm)));
  }

  std::vector<LibraryRecord> records;
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    const auto& cells = t.rows[row];
    const bool missing = std::any_of(cells.begin(), cells.end(), is_missing);
    if (missing) {
      if (warnings) {
        warnings->push_back(source + ":" + std::to_string(t.line_numbers[row]) +
                            ": record with missing fields dropped");
      }
      continue;
    }
    std::array<double, kScalarColumns.size()> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.number(row, scalar[i]);
    Eigen::ArrayXd ad(kBandCount), aph(kBandCount);
    for (Eigen::Index b = 0; b < kBandCount; ++b) {
      ad[b] = t.number(row, ad_cols[static_cast<std::size_t>(b)]);
      aph[b] = t.number(row, aph_cols[static_cast<std::size_t>(b)]);
    }
    LibraryRecord rec{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8],
                      Spectrum(std::move(ad)), Spectrum(std::move(aph))};
    try {
      rec.validate();
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(t.line_numbers[row]) + " (row " +
                       std::to_string(row + 1) + "): " + e.what());
    }
    records.push_back(std::move(rec));
  }
  return SpectralLibrary(std::move(records));
}

void SpectralLibrary::save(std::ostream& out) const {
  csv::Writer w(out);
  std::vector<std::string> header(kScalarColumns.begin(), kScalarColumns.end());
  for (int nm = kStartNm; nm <= kEndNm; nm += kStepNm) header.push_back(band_column("a_d", nm));
  for (int nm = kStartNm; nm <= kEndNm; nm += kStepNm) header.push_back(band_column("a_ph", nm));
  w.row(header);
  for (const auto& r : records_) {
    std::vector<double> v = {r.temp, r.sal, r.tss, r.doc, r.tchla, r.a_y_440, r.s_y, r.b_bp_550, r.s_bbp};
    for (double x : r.a_d.values()) v.push_back(x);
    for (double x : r.a_ph.values()) v.push_back(x);
    w.numbers(v);
  }
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw InputError("summary statistics of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  SummaryStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : sorted) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(n));
  return s;
}

std::vector<NamedStats> summary_stats(const SpectralLibrary& library) {
  if (library.empty()) throw InputError("summary statistics of an empty library");
  const std::size_t n = library.size();
  const auto i440 = static_cast<Eigen::Index>(WavelengthGrid::standard().index_of(440));
  const auto i550 = static_cast<Eigen::Index>(WavelengthGrid::standard().index_of(550));
  std::vector<double> cols[9];
  for (auto& c : cols) c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = library.record(i);
    const auto& s = library.siop(i);
    cols[0].push_back(r.temp);
    cols[1].push_back(r.sal);
    cols[2].push_back(r.tss);
    cols[3].push_back(r.doc);
    cols[4].push_back(r.tchla);
    cols[5].push_back(s.a_y_star.values()[i440]);
    cols[6].push_back(s.b_bp_star.values()[i550]);
    cols[7].push_back(s.a_d_star.values()[i440]);
    cols[8].push_back(s.a_ph_star.values()[i440]);
  }
  static constexpr std::array<const char*, 9> names = {
      "temp", "sal", "tss", "doc", "tchla", "a_y_star_440", "b_bp_star_550", "a_d_star_440", "a_ph_star_440"};
  std::vector<NamedStats> out;
  for (std::size_t k = 0; k < names.size(); ++k) out.push_back({names[k], summarize(cols[k])});
  return out;
}

std::vector<double> library_variable(const SpectralLibrary& library, std::string_view name) {
  std::vector<double> v;
  v.reserve(library.size());
  for (const auto& r : library.records()) {
    if (name == "temp") v.push_back(r.temp);
    else if (name == "sal") v.push_back(r.sal);
    else if (name == "tss") v.push_back(r.tss);
    else if (name == "doc") v.push_back(r.doc);
    else if (name == "tchla") v.push_back(r.tchla);
    else if (name == "a_y_440") v.push_back(r.a_y_440);
    else if (name == "b_bp_550") v.push_back(r.b_bp_550);
    else if (name == "a_d_440") v.push_back(r.a_d.at_nm(440));
    else if (name == "a_ph_440") v.push_back(r.a_ph.at_nm(440));
    else throw InputError("unknown library variable '" + std::string(name) + "'");
  }
  return v;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("pearson: samples differ in length");
  if (x.size() < 2) throw InputError("pearson: need at least two pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const SpectralLibrary& library) {
  if (library.size() < 3) throw InputError("correlation matrix needs at least 3 records");
  std::array<std::vector<double>, 9> cols;
  for (std::size_t k = 0; k < cols.size(); ++k) cols[k] = library_variable(library, kCorrelationVariables[k]);
  CorrelationMatrix m;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = i; j < 9; ++j) {
      const auto r = i == j ? (pearson(cols[i], cols[i]) ? std::optional<double>(1.0) : std::nullopt)
                            : pearson(cols[i], cols[j]);
      m[i][j] = r;
      m[j][i] = r;
    }
  }
  return m;
}

}  // namespace bgcmeta
