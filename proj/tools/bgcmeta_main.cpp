#include "bgcmeta/commands.hpp"
#include "bgcmeta/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> library, region, output_dir, water_iops, cie_tables;
  std::optional<std::size_t> count, holdout;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::optional<int> epochs;
  std::optional<std::size_t> tasks;
  std::optional<std::string> optimizer, adapt_optimizer;
  std::optional<int> iterations, folds, samples, interference;
  bool resample_tasks = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "Pipeline config JSON (default: $BGCMETA_CONFIG)");
  app->add_option("-o,--output-dir", o.output_dir, "Output directory");
  app->add_option("--library", o.library, "Spectral library CSV");
  app->add_option("--water-iops", o.water_iops, "Pure-water IOP table CSV");
  app->add_option("--seed", o.seed, "Seed for this command's stage");
}

bgcmeta::PipelineConfig build_config(const Overrides& o, const std::string& stage) {
  auto cfg = o.config.empty() ? bgcmeta::default_config() : bgcmeta::load_config(o.config);
  auto& p = cfg.paths;
  if (o.library) p.library = *o.library;
  if (o.region) p.region = *o.region;
  if (o.output_dir) p.output_dir = *o.output_dir;
  if (o.water_iops) p.water_iops = *o.water_iops;
  if (o.cie_tables) p.cie_tables = *o.cie_tables;
  if (o.count) cfg.synth.count = *o.count;
  if (o.holdout) cfg.holdout_region = *o.holdout;
  if (o.noise) cfg.synth.noise_fraction = *o.noise;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.tasks) cfg.train.tasks = *o.tasks;
  if (o.optimizer) cfg.train.optimizer = bgcmeta::parse_optimizer(*o.optimizer);
  if (o.adapt_optimizer) cfg.adapt.optimizer = bgcmeta::parse_optimizer(*o.adapt_optimizer);
  if (o.resample_tasks) cfg.train.resample_tasks = true;
  if (o.iterations) cfg.adapt.iterations = *o.iterations;
  if (o.folds) cfg.folds = *o.folds;
  if (o.samples) cfg.efast.samples = *o.samples;
  if (o.interference) cfg.efast.interference = *o.interference;
  if (o.seed) {
    if (stage == "synth") cfg.synth.seed = *o.seed;
    if (stage == "pretrain") cfg.train.seed = *o.seed;
    if (stage == "adapt") cfg.cv_seed = *o.seed;
    if (stage == "sensitivity") cfg.efast.seed = *o.seed;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-aware meta-learning for coastal water-quality retrieval from hyperspectral reflectance"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 1;
  app.add_option("-j,--threads", threads, "Worker threads (1 gives byte-reproducible output)")->check(CLI::PositiveNumber);

  Overrides o;
  std::string input, model, rrs, predicted, measured, illuminant = "d65", sens_model = "forward", synthetic;
  std::optional<std::string> resume;
  std::size_t fixture_count = 247;
  std::uint64_t fixture_seed = 7;

  auto* fixture = app.add_subcommand("fixture", "Write a demonstration spectral library");
  add_common(fixture, o);
  fixture->add_option("-n,--count", fixture_count, "Number of records");
  fixture->add_option("--fixture-seed", fixture_seed, "Seed of the demo library");

  auto* simulate = app.add_subcommand("simulate", "Forward-model R_rs for BGC + SIOP rows");
  add_common(simulate, o);
  simulate->add_option("input", input, "Input CSV")->required()->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "Fit the mixture model and generate a synthetic dataset");
  add_common(synth, o);
  synth->add_option("-n,--count", o.count, "Number of synthetic records");
  synth->add_option("--noise", o.noise, "Gaussian R_rs noise as a fraction of the signal");
  synth->add_option("--holdout-region", o.holdout, "Carve this many records out as region.csv");

  auto* pretrain = app.add_subcommand("pretrain", "Meta-pretrain the base model");
  add_common(pretrain, o);
  pretrain->add_option("--synthetic", synthetic, "Synthetic dataset (default: <output-dir>/synthetic.csv)");
  pretrain->add_option("--resume", resume, "Continue from a model.json with training state")->check(CLI::ExistingFile);
  pretrain->add_option("--epochs", o.epochs, "Total epochs (a resumed run continues up to this count)");
  pretrain->add_option("--tasks", o.tasks, "Tasks per meta-batch");
  pretrain->add_option("--optimizer", o.optimizer, "gd or adam");
  pretrain->add_flag("--resample-tasks", o.resample_tasks, "Draw a fresh task set every epoch");

  auto* adapt = app.add_subcommand("adapt", "Region adaptation with k-fold cross-validation");
  add_common(adapt, o);
  adapt->add_option("--region", o.region, "Region CSV (default: paths.region)");
  adapt->add_option("--model", model, "Base model.json (default: <output-dir>/model.json)");
  adapt->add_option("--iterations", o.iterations, "Maximum adaptation iterations");
  adapt->add_option("--folds", o.folds, "Cross-validation folds");
  adapt->add_option("--optimizer", o.adapt_optimizer, "gd or adam");

  auto* predict = app.add_subcommand("predict", "Predict TSS, DOC and TChl-a from R_rs spectra");
  add_common(predict, o);
  predict->add_option("model", model, "model.json")->required()->check(CLI::ExistingFile);
  predict->add_option("rrs", rrs, "CSV with rrs_400..rrs_700 columns")->required()->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("evaluate", "Log-space retrieval metrics of predictions");
  add_common(evaluate, o);
  evaluate->add_option("predicted", predicted, "CSV with tss,doc,tchla")->required()->check(CLI::ExistingFile);
  evaluate->add_option("measured", measured, "CSV with tss,doc,tchla")->required()->check(CLI::ExistingFile);

  auto* sensitivity = app.add_subcommand("sensitivity", "EFAST indices of R_rs with respect to the BGC parameters");
  add_common(sensitivity, o);
  sensitivity->add_option("--model", sens_model, "Response model (forward)");
  sensitivity->add_option("--samples", o.samples, "Samples per search curve (odd)");
  sensitivity->add_option("--interference", o.interference, "Interference factor M");

  auto* chroma = app.add_subcommand("chroma", "CIE 1931 chromaticity of R_rs spectra");
  add_common(chroma, o);
  chroma->add_option("rrs", rrs, "CSV with rrs_400..rrs_700 columns")->required()->check(CLI::ExistingFile);
  chroma->add_option("--illuminant", illuminant, "d65 or equal");
  chroma->add_option("--cie-tables", o.cie_tables, "CIE table CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    bgcmeta::CommandContext ctx{build_config(o, name), threads, &std::cerr};
    const auto out = [&](const std::string& file) { return ctx.config.output(file); };

    if (name == "fixture") {
      bgcmeta::cmd_fixture(ctx, fixture_count, fixture_seed);
    } else if (name == "simulate") {
      bgcmeta::cmd_simulate(ctx, input);
    } else if (name == "synth") {
      bgcmeta::cmd_synth(ctx);
    } else if (name == "pretrain") {
      std::optional<bgcmeta::fs::path> r;
      if (resume) r = *resume;
      bgcmeta::cmd_pretrain(ctx, synthetic.empty() ? out("synthetic.csv") : bgcmeta::fs::path(synthetic), r);
    } else if (name == "adapt") {
      const auto region = ctx.config.paths.region;
      if (region.empty()) throw bgcmeta::InputError("no region given (--region or paths.region)");
      bgcmeta::cmd_adapt(ctx, region, model.empty() ? out("model.json") : bgcmeta::fs::path(model));
    } else if (name == "predict") {
      bgcmeta::cmd_predict(ctx, model, rrs);
    } else if (name == "evaluate") {
      bgcmeta::cmd_evaluate(ctx, predicted, measured);
    } else if (name == "sensitivity") {
      bgcmeta::cmd_sensitivity(ctx, sens_model);
    } else if (name == "chroma") {
      bgcmeta::cmd_chroma(ctx, rrs, illuminant);
    }
  } catch (const bgcmeta::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bgcmeta::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
