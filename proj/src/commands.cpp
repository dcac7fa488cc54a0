#include "bgcmeta/commands.hpp"

#include "bgcmeta/baseline.hpp"
#include "bgcmeta/chroma.hpp"
#include "bgcmeta/csv.hpp"
#include "bgcmeta/efast.hpp"
#include "bgcmeta/error.hpp"
#include "bgcmeta/fixtures.hpp"
#include "bgcmeta/io.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace bgcmeta {

using nlohmann::json;

namespace {

std::string stamp(const CommandContext& ctx, const char* command, std::uint64_t seed) {
  return std::string("bgcmeta ") + command + " config_hash=" + ctx.config.hash() + " seed=" + std::to_string(seed);
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void prepare_output_dir(const CommandContext& ctx) { fs::create_directories(ctx.config.paths.output_dir); }

SpectralLibrary load_library(const CommandContext& ctx) {
  const auto& path = ctx.config.paths.library;
  if (path.empty()) throw InputError("config: paths.library is not set");
  std::vector<std::string> warnings;
  auto lib = SpectralLibrary::load(path, &warnings);
  for (const auto& w : warnings) *ctx.log << "warning: " << w << '\n';
  if (lib.empty()) throw InputError(path.string() + ": no usable library records");
  return lib;
}

json metrics_json(const std::array<RetrievalMetrics, 3>& metrics) {
  json arr = json::array();
  for (std::size_t v = 0; v < 3; ++v) {
    const auto& m = metrics[v];
    arr.push_back({{"variable", kBgcNames[v]},
                   {"n", m.n},
                   {"n_excluded", m.n_excluded},
                   {"r2", m.r2 ? json(*m.r2) : json(nullptr)},
                   {"bias", m.bias},
                   {"rmse", m.rmse},
                   {"mae", m.mae}});
  }
  return arr;
}

Spectrum spectrum_columns(const csv::Table& t, std::size_t row, const std::string& prefix) {
  Eigen::ArrayXd v(kBandCount);
  for (int nm = kStartNm; nm <= kEndNm; nm += kStepNm) {
    v[(nm - kStartNm) / kStepNm] = t.number(row, t.column(prefix + std::to_string(nm)));
  }
  return Spectrum(std::move(v));
}

std::string row_where(const csv::Table& t, std::size_t row) {
  return t.source + ":" + std::to_string(t.line_numbers[row]) + " (row " + std::to_string(row + 1) + ")";
}

std::array<std::vector<double>, 3> read_bgc_columns(const fs::path& path, std::size_t& rows) {
  const auto t = csv::read(path);
  std::array<std::vector<double>, 3> out;
  for (std::size_t v = 0; v < 3; ++v) {
    const std::size_t c = t.column(kBgcNames[v]);
    for (std::size_t r = 0; r < t.rows.size(); ++r) out[v].push_back(t.number(r, c));
  }
  rows = t.rows.size();
  return out;
}

}  // namespace

fs::path cmd_fixture(const CommandContext& ctx, std::size_t count, std::uint64_t seed) {
  prepare_output_dir(ctx);
  const auto lib = make_fixture_library(count, seed);
  const fs::path path = ctx.config.output("library.csv");
  auto out = open_output(path);
  out << "# bgcmeta fixture count=" << count << " seed=" << seed << '\n';
  lib.save(out);
  *ctx.log << "wrote " << lib.size() << " library records to " << path.string() << '\n';
  return path;
}

fs::path cmd_simulate(const CommandContext& ctx, const fs::path& input) {
  prepare_output_dir(ctx);
  const auto tables = ctx.config.water_tables();
  const auto t = csv::read(input);
  const bool library_format = t.has_column("a_y_440");
  std::vector<Spectrum> result;
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    try {
      BgcState bgc{t.number(row, t.column("tss")), t.number(row, t.column("doc")), t.number(row, t.column("tchla")),
                   t.number(row, t.column("temp")), t.number(row, t.column("sal"))};
      SiopSet siops;
      if (library_format) {
        LibraryRecord rec{bgc.temp, bgc.sal, bgc.tss, bgc.doc, bgc.tchla,
                          t.number(row, t.column("a_y_440")), t.number(row, t.column("s_y")),
                          t.number(row, t.column("b_bp_550")), t.number(row, t.column("s_bbp")),
                          spectrum_columns(t, row, "a_d_"), spectrum_columns(t, row, "a_ph_")};
        rec.validate();
        siops = derive_siops(rec);
      } else {
        siops = {spectrum_columns(t, row, "a_d_star_"), spectrum_columns(t, row, "a_y_star_"),
                 spectrum_columns(t, row, "a_ph_star_"), spectrum_columns(t, row, "b_bp_star_")};
      }
      bgc.validate();
      siops.validate();
      result.push_back(forward(bgc, siops, tables));
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.rfind(t.source, 0) == 0) throw;
      throw InputError(row_where(t, row) + ": " + msg);
    }
  }
  const fs::path path = ctx.config.output("simulated_rrs.csv");
  auto out = open_output(path);
  csv::Writer w(out);
  w.comment(stamp(ctx, "simulate", 0));
  std::vector<std::string> header = {"row"};
  for (auto& c : io::rrs_columns()) header.push_back(std::move(c));
  w.row(header);
  for (std::size_t i = 0; i < result.size(); ++i) {
    const auto& v = result[i].values();
    w.row(std::to_string(i + 1), std::vector<double>(v.data(), v.data() + v.size()));
  }
  *ctx.log << "wrote " << result.size() << " spectra to " << path.string() << '\n';
  return path;
}

void cmd_synth(const CommandContext& ctx) {
  prepare_output_dir(ctx);
  const auto& cfg = ctx.config;
  const auto library = load_library(ctx);
  SynthOptions opts = cfg.synth;
  opts.threads = ctx.threads;
  SynthModel model;
  auto ds = generate_dataset(library, opts, cfg.water_tables(), &model);
  *ctx.log << "fitted mixture with " << model.gmm.components() << " components after " << model.elbo.size()
           << " sweeps\n";

  const std::string tag = stamp(ctx, "synth", cfg.synth.seed);
  if (cfg.holdout_region > 0) {
    auto split = carve_region(ds, cfg.holdout_region, derive_seed(cfg.synth.seed, 0x726567ULL));
    auto out = open_output(cfg.output("region.csv"));
    io::write_region(out, split.region, {tag});
    ds = std::move(split.remainder);
    *ctx.log << "held out " << split.region.size() << " records as region.csv\n";
  }
  {
    auto out = open_output(cfg.output("synthetic.csv"));
    io::write_synthetic(out, ds, {tag});
  }
  json g = io::gmm_to_json(model);
  g["seed"] = cfg.synth.seed;
  g["config_hash"] = cfg.hash();
  g["config"] = cfg.canonical_json();
  io::write_json(cfg.output("gmm.json"), g);
  *ctx.log << "wrote " << ds.size() << " synthetic records to " << cfg.output("synthetic.csv").string() << '\n';
}

void cmd_pretrain(const CommandContext& ctx, const fs::path& synthetic, const std::optional<fs::path>& resume) {
  prepare_output_dir(ctx);
  const auto& cfg = ctx.config;
  const auto ds = io::read_synthetic(synthetic);
  TrainConfig tc = cfg.train;
  tc.threads = ctx.threads;

  std::optional<io::LoadedModel> previous;
  InputTransform transform;
  if (resume) {
    previous = io::read_model(*resume);
    if (!previous->state) throw InputError(resume->string() + ": model has no training state to resume from");
    transform = previous->params.input();
  } else {
    transform = fit_input_transform(ds);
  }
  const auto data = make_training_set(ds, transform);
  const auto result = meta_pretrain(data, transform, tc, previous ? &*previous->state : nullptr,
                                    [&](int epoch, double j) {
                                      if (epoch == 1 || epoch % 10 == 0) *ctx.log << "epoch " << epoch << " meta-loss " << j << '\n';
                                    });

  json m = io::model_to_json(result.params, &result.state);
  m["seed"] = cfg.train.seed;
  m["config_hash"] = cfg.hash();
  m["config"] = cfg.canonical_json();
  io::write_json(cfg.output("model.json"), m);

  const fs::path log_path = cfg.output("training_log.csv");
  const int first_epoch = result.state.epochs_done - static_cast<int>(result.meta_loss.size()) + 1;
  std::ofstream out;
  if (resume && fs::exists(log_path)) {
    out.open(log_path, std::ios::binary | std::ios::app);
  } else {
    out = open_output(log_path);
    csv::Writer(out).comment(stamp(ctx, "pretrain", cfg.train.seed));
    out << "epoch,meta_loss\n";
  }
  csv::Writer w(out);
  for (std::size_t e = 0; e < result.meta_loss.size(); ++e) {
    w.row(std::to_string(first_epoch + static_cast<int>(e)), std::vector<double>{result.meta_loss[e]});
  }
  *ctx.log << "best meta-loss " << result.state.best_loss << " at epoch " << result.state.best_epoch << '\n';
}

void cmd_adapt(const CommandContext& ctx, const fs::path& region_path, const fs::path& model_path) {
  prepare_output_dir(ctx);
  const auto& cfg = ctx.config;
  const auto region = io::read_region(region_path);
  const auto base = io::read_model(model_path).params;
  const auto cv = cross_validate(base, region, cfg.folds, cfg.adapt, cfg.cv_seed, ctx.threads);
  const std::string tag = stamp(ctx, "adapt", cfg.cv_seed);

  {
    auto out = open_output(cfg.output("cv_predictions.csv"));
    csv::Writer w(out);
    w.comment(tag);
    w.row({"index", "timestamp", "fold", "tss_pred", "doc_pred", "tchla_pred", "tss_meas", "doc_meas", "tchla_meas"});
    for (const auto& p : cv.predictions) {
      std::vector<std::string> cells = {std::to_string(p.index + 1), region[p.index].timestamp, std::to_string(p.fold + 1)};
      for (double v : p.predicted) cells.push_back(csv::format_double(v));
      for (double v : p.measured) cells.push_back(csv::format_double(v));
      w.row(cells);
    }
  }

  const double mean_best = std::accumulate(cv.best_iterations.begin(), cv.best_iterations.end(), 0.0) /
                           static_cast<double>(cv.best_iterations.size());
  const int final_iterations = static_cast<int>(std::lround(mean_best));
  json metrics = {{"config_hash", cfg.hash()},
                  {"seed", cfg.cv_seed},
                  {"folds", cfg.folds},
                  {"best_iterations", cv.best_iterations},
                  {"metrics", metrics_json(cv.metrics)}};
  io::write_json(cfg.output("metrics.json"), metrics);

  try {
    const auto baseline = band_ratio_cross_validate(region, cfg.folds, cfg.cv_seed);
    json b = {{"config_hash", cfg.hash()}, {"seed", cfg.cv_seed}, {"model", "band_ratio"}, {"metrics", metrics_json(baseline.metrics)}};
    json bands = json::array();
    for (const auto& pair : kDefaultBandPairs) bands.push_back({pair.numerator_nm, pair.denominator_nm});
    b["bands"] = bands;
    io::write_json(cfg.output("baseline_metrics.json"), b);
  } catch (const InputError& e) {
    *ctx.log << "warning: band-ratio baseline skipped: " << e.what() << '\n';
  }

  const Batch all = region_batch(base, region);
  const auto adapted = region_fit(base, all, cfg.adapt, final_iterations);
  json m = io::model_to_json(adapted, nullptr);
  m["seed"] = cfg.cv_seed;
  m["config_hash"] = cfg.hash();
  m["config"] = cfg.canonical_json();
  m["adaptation"] = {{"region", region_path.string()}, {"records", region.size()}, {"iterations", final_iterations}};
  io::write_json(cfg.output("adapted_model.json"), m);

  for (std::size_t v = 0; v < 3; ++v) {
    const auto& mm = cv.metrics[v];
    *ctx.log << kBgcNames[v] << ": r2=" << (mm.r2 ? csv::format_double(*mm.r2) : "n/a") << " bias=" << mm.bias
             << " rmse=" << mm.rmse << " mae=" << mm.mae << " n=" << mm.n << '\n';
  }
}

fs::path cmd_predict(const CommandContext& ctx, const fs::path& model, const fs::path& rrs) {
  prepare_output_dir(ctx);
  const auto params = io::read_model(model).params;
  const auto table = io::read_spectra(rrs);
  const auto pred = predict(params, table.spectra, ctx.threads);
  const fs::path path = ctx.config.output("predictions.csv");
  auto out = open_output(path);
  csv::Writer w(out);
  w.comment("bgcmeta predict model=" + model.filename().string() + " config_hash=" + ctx.config.hash());
  w.row({"label", "tss", "doc", "tchla"});
  for (std::size_t i = 0; i < pred.size(); ++i) w.row(table.labels[i], {pred[i][0], pred[i][1], pred[i][2]});
  return path;
}

fs::path cmd_evaluate(const CommandContext& ctx, const fs::path& predicted, const fs::path& measured) {
  prepare_output_dir(ctx);
  std::size_t np = 0, nm = 0;
  const auto pred = read_bgc_columns(predicted, np);
  const auto meas = read_bgc_columns(measured, nm);
  if (np != nm) {
    throw InputError("evaluate: " + predicted.string() + " has " + std::to_string(np) + " rows but " +
                     measured.string() + " has " + std::to_string(nm));
  }
  std::array<RetrievalMetrics, 3> metrics;
  for (std::size_t v = 0; v < 3; ++v) metrics[v] = retrieval_metrics(pred[v], meas[v]);
  const fs::path path = ctx.config.output("evaluation.json");
  io::write_json(path, {{"config_hash", ctx.config.hash()}, {"metrics", metrics_json(metrics)}});
  return path;
}

fs::path cmd_sensitivity(const CommandContext& ctx, const std::string& model) {
  if (model != "forward") throw InputError("unknown sensitivity model '" + model + "' (available: forward)");
  prepare_output_dir(ctx);
  const auto& cfg = ctx.config;
  const auto library = load_library(ctx);
  ForwardSensitivitySetup setup{median_siops(library), cfg.efast_ranges.value_or(library_ranges(library)),
                                cfg.efast_temp, cfg.efast_sal};
  const auto idx = forward_sensitivity(setup, cfg.water_tables(), cfg.efast, ctx.threads);
  const fs::path path = cfg.output("sensitivity.csv");
  auto out = open_output(path);
  csv::Writer w(out);
  w.comment(stamp(ctx, "sensitivity", cfg.efast.seed));
  w.row({"wavelength_nm", "param", "s1", "st"});
  const auto& grid = WavelengthGrid::standard();
  for (Eigen::Index b = 0; b < idx.s1.rows(); ++b) {
    for (Eigen::Index p = 0; p < 3; ++p) {
      w.row({std::to_string(static_cast<int>(grid.wavelength(static_cast<std::size_t>(b)))),
             std::string(kBgcNames[static_cast<std::size_t>(p)]), csv::format_double(idx.s1(b, p)),
             csv::format_double(idx.st(b, p))});
    }
  }
  return path;
}

fs::path cmd_chroma(const CommandContext& ctx, const fs::path& rrs, const std::string& illuminant) {
  prepare_output_dir(ctx);
  const auto cie =
      ctx.config.paths.cie_tables.empty() ? CieTables::bundled() : CieTables::load(ctx.config.paths.cie_tables);
  Spectrum illum;
  if (illuminant == "d65") {
    illum = cie.d65;
  } else if (illuminant == "equal") {
    illum = Spectrum::constant(1.0);
  } else {
    throw InputError("unknown illuminant '" + illuminant + "' (expected d65 or equal)");
  }
  const auto table = io::read_spectra(rrs);
  const fs::path path = ctx.config.output("chromaticity.csv");
  auto out = open_output(path);
  csv::Writer w(out);
  w.comment("bgcmeta chroma illuminant=" + illuminant);
  w.row({"label", "x", "y"});
  for (std::size_t i = 0; i < table.spectra.size(); ++i) {
    try {
      const auto c = chromaticity(table.spectra[i], cie.cmf, illum);
      w.row(table.labels[i], {c.x, c.y});
    } catch (const InputError& e) {
      throw InputError(rrs.string() + " (row " + std::to_string(i + 1) + "): " + e.what());
    }
  }
  return path;
}

}  // namespace bgcmeta
