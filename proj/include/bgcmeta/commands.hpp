#pragma once

#include "bgcmeta/config.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace bgcmeta {

struct CommandContext {
  PipelineConfig config;
  unsigned threads = 1;
  std::ostream* log = &std::cerr;
};

namespace fs = std::filesystem;

/// Demo spectral library written to `output_dir/library.csv`.
fs::path cmd_fixture(const CommandContext& ctx, std::size_t count, std::uint64_t seed);

/// R_rs for each input row, to `output_dir/simulated_rrs.csv`. Input rows
/// carry either library columns (measured IOPs) or SIOP spectra
/// (`a_d_star_*`, `a_y_star_*`, `a_ph_star_*`, `b_bp_star_*`) plus
/// `tss,doc,tchla,temp,sal`.
fs::path cmd_simulate(const CommandContext& ctx, const fs::path& input);

/// synthetic.csv and gmm.json (plus region.csv when a holdout is configured).
void cmd_synth(const CommandContext& ctx);

/// model.json and training_log.csv from a synthetic dataset.
void cmd_pretrain(const CommandContext& ctx, const fs::path& synthetic, const std::optional<fs::path>& resume);

/// Cross-validated adaptation: cv_predictions.csv, metrics.json,
/// baseline_metrics.json and adapted_model.json.
void cmd_adapt(const CommandContext& ctx, const fs::path& region, const fs::path& model);

fs::path cmd_predict(const CommandContext& ctx, const fs::path& model, const fs::path& rrs);

fs::path cmd_evaluate(const CommandContext& ctx, const fs::path& predicted, const fs::path& measured);

/// `model` selects the response; only "forward" (the bio-optical model) is available.
fs::path cmd_sensitivity(const CommandContext& ctx, const std::string& model);

/// `illuminant` is "d65" or "equal".
fs::path cmd_chroma(const CommandContext& ctx, const fs::path& rrs, const std::string& illuminant);

}  // namespace bgcmeta
