#pragma once

#include "bgcmeta/meta_learn.hpp"
#include "bgcmeta/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bgcmeta::io {

/// "rrs_400" ... "rrs_700"
std::vector<std::string> rrs_columns();
std::vector<std::string> score_columns();

/// `k,tss,doc,tchla,temp,sal`, 20 score columns, 301 rrs columns.
void write_synthetic(std::ostream& out, const SyntheticDataset& ds, const std::vector<std::string>& comments);
/// Records carry BGC, scores and R_rs; the bases are not stored in the CSV.
SyntheticDataset read_synthetic(const std::filesystem::path& path);

/// `timestamp,tss,doc,tchla` + 301 rrs columns.
void write_region(std::ostream& out, const std::vector<RegionSample>& region, const std::vector<std::string>& comments);
std::vector<RegionSample> read_region(const std::filesystem::path& path);

struct SpectraTable {
  std::vector<std::string> labels;  // timestamp column if present, else 1-based row number
  std::vector<Spectrum> spectra;
};

/// Any CSV with exactly the 301 rrs columns.
SpectraTable read_spectra(const std::filesystem::path& path);

nlohmann::json gmm_to_json(const SynthModel& model);

nlohmann::json model_to_json(const MlpParams& params, const MetaTrainState* state);
struct LoadedModel {
  MlpParams params;
  std::optional<MetaTrainState> state;
  nlohmann::json document;
};
LoadedModel model_from_json(const nlohmann::json& j, const std::string& source);
LoadedModel read_model(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed JSON plus trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace bgcmeta::io
