#pragma once

#include "bgcmeta/efast.hpp"
#include "bgcmeta/meta_learn.hpp"
#include "bgcmeta/synth.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>

namespace bgcmeta {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "BGCMETA_CONFIG";

struct PathsConfig {
  std::filesystem::path library;
  std::filesystem::path water_iops;  // empty: bundled table
  std::filesystem::path cie_tables;  // empty: bundled table
  std::filesystem::path region;
  std::filesystem::path output_dir = "out";
};

struct PipelineConfig {
  PathsConfig paths;
  SynthOptions synth;             // threads is a runtime setting, not part of the config
  std::size_t holdout_region = 0; // records carved out of the synthetic set as a region
  TrainConfig train;
  AdaptConfig adapt;
  int folds = 10;
  std::uint64_t cv_seed = 0;
  EfastConfig efast;
  double efast_temp = 22.0;
  double efast_sal = 35.0;
  std::optional<std::array<ParameterRange, 3>> efast_ranges;  // default: library min/max

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  /// Range and consistency checks; throws InputError.
  void validate() const;
  /// to_json() without the output directory, which never affects results.
  nlohmann::json canonical_json() const;
  /// FNV-1a of the canonical JSON, as 16 hex digits.
  std::string hash() const;

  std::filesystem::path output(const std::string& name) const { return paths.output_dir / name; }
  WaterIopTables water_tables() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
/// Config from $BGCMETA_CONFIG if set, else defaults.
PipelineConfig default_config();

std::string fnv1a_hex(const std::string& text);

}  // namespace bgcmeta
