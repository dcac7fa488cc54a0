#include "bgcmeta/config.hpp"

#include "bgcmeta/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace bgcmeta {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config field '") + key + "': " + e.what());
  }
}

void read_path(const json& j, const char* key, std::filesystem::path& out) {
  std::string s = out.string();
  read(j, key, s);
  out = s;
}

void read_optimizer(const json& j, const char* key, Optimizer& out) {
  std::string s = to_string(out);
  read(j, key, s);
  out = parse_optimizer(s);
}

void check(bool ok, const std::string& what) {
  if (!ok) throw InputError("config: " + what);
}

}  // namespace

json PipelineConfig::to_json() const {
  json j;
  j["paths"] = {{"library", paths.library.string()},
                {"water_iops", paths.water_iops.string()},
                {"cie_tables", paths.cie_tables.string()},
                {"region", paths.region.string()},
                {"output_dir", paths.output_dir.string()}};
  j["synth"] = {{"count", synth.count},
                {"seed", synth.seed},
                {"noise", synth.noise_fraction},
                {"holdout_region", holdout_region},
                {"sal_range", {synth.clamps.sal_min, synth.clamps.sal_max}},
                {"temp_range", {synth.clamps.temp_min, synth.clamps.temp_max}}};
  j["gmm"] = {{"max_components", synth.gmm.max_components},
              {"weight_concentration", synth.gmm.weight_concentration},
              {"max_iterations", synth.gmm.max_iterations},
              {"tolerance", synth.gmm.tolerance},
              {"jitter", synth.gmm.jitter},
              {"prune_weight", synth.gmm.prune_weight},
              {"init", synth.gmm.init == DpGmmInit::kmeans ? "kmeans" : "random"},
              {"kmeans_iterations", synth.gmm.kmeans_iterations}};
  j["train"] = {{"inner_lr", train.inner_lr},
                {"outer_lr", train.outer_lr},
                {"inner_steps", train.inner_steps},
                {"epochs", train.epochs},
                {"tasks", train.tasks},
                {"k_min", train.k_min},
                {"k_max", train.k_max},
                {"seed", train.seed},
                {"resample_tasks", train.resample_tasks},
                {"optimizer", to_string(train.optimizer)},
                {"hidden", {train.architecture.hidden1, train.architecture.hidden2}}};
  j["adapt"] = {{"lr", adapt.lr},
                {"iterations", adapt.iterations},
                {"patience", adapt.patience},
                {"optimizer", to_string(adapt.optimizer)}};
  j["cv"] = {{"folds", folds}, {"seed", cv_seed}};
  j["efast"] = {{"samples", efast.samples},
                {"interference", efast.interference},
                {"seed", efast.seed},
                {"temp", efast_temp},
                {"sal", efast_sal}};
  if (efast_ranges) {
    json r;
    for (std::size_t i = 0; i < 3; ++i) r[std::string(kBgcNames[i])] = {(*efast_ranges)[i].lo, (*efast_ranges)[i].hi};
    j["efast"]["ranges"] = r;
  }
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  PipelineConfig c;
  const json empty = json::object();
  const auto section = [&](const char* name) -> const json& {
    if (!j.contains(name)) return empty;
    if (!j.at(name).is_object()) throw InputError(std::string("config section '") + name + "' must be an object");
    return j.at(name);
  };
  const json& p = section("paths");
  read_path(p, "library", c.paths.library);
  read_path(p, "water_iops", c.paths.water_iops);
  read_path(p, "cie_tables", c.paths.cie_tables);
  read_path(p, "region", c.paths.region);
  read_path(p, "output_dir", c.paths.output_dir);

  const json& s = section("synth");
  read(s, "count", c.synth.count);
  read(s, "seed", c.synth.seed);
  read(s, "noise", c.synth.noise_fraction);
  read(s, "holdout_region", c.holdout_region);
  std::array<double, 2> sal{c.synth.clamps.sal_min, c.synth.clamps.sal_max};
  std::array<double, 2> temp{c.synth.clamps.temp_min, c.synth.clamps.temp_max};
  read(s, "sal_range", sal);
  read(s, "temp_range", temp);
  c.synth.clamps = {sal[0], sal[1], temp[0], temp[1]};

  const json& g = section("gmm");
  read(g, "max_components", c.synth.gmm.max_components);
  read(g, "weight_concentration", c.synth.gmm.weight_concentration);
  read(g, "max_iterations", c.synth.gmm.max_iterations);
  read(g, "tolerance", c.synth.gmm.tolerance);
  read(g, "jitter", c.synth.gmm.jitter);
  read(g, "prune_weight", c.synth.gmm.prune_weight);
  read(g, "kmeans_iterations", c.synth.gmm.kmeans_iterations);
  if (g.contains("init")) {
    std::string init;
    read(g, "init", init);
    if (init != "random" && init != "kmeans") throw InputError("config: gmm.init must be random or kmeans");
    c.synth.gmm.init = init == "kmeans" ? DpGmmInit::kmeans : DpGmmInit::random;
  }

  const json& t = section("train");
  read(t, "inner_lr", c.train.inner_lr);
  read(t, "outer_lr", c.train.outer_lr);
  read(t, "inner_steps", c.train.inner_steps);
  read(t, "epochs", c.train.epochs);
  read(t, "tasks", c.train.tasks);
  read(t, "k_min", c.train.k_min);
  read(t, "k_max", c.train.k_max);
  read(t, "seed", c.train.seed);
  read(t, "resample_tasks", c.train.resample_tasks);
  read_optimizer(t, "optimizer", c.train.optimizer);
  std::array<int, 2> hidden{c.train.architecture.hidden1, c.train.architecture.hidden2};
  read(t, "hidden", hidden);
  c.train.architecture.hidden1 = hidden[0];
  c.train.architecture.hidden2 = hidden[1];

  const json& a = section("adapt");
  read(a, "lr", c.adapt.lr);
  read(a, "iterations", c.adapt.iterations);
  read(a, "patience", c.adapt.patience);
  read_optimizer(a, "optimizer", c.adapt.optimizer);

  const json& cv = section("cv");
  read(cv, "folds", c.folds);
  read(cv, "seed", c.cv_seed);

  const json& e = section("efast");
  read(e, "samples", c.efast.samples);
  read(e, "interference", c.efast.interference);
  read(e, "seed", c.efast.seed);
  read(e, "temp", c.efast_temp);
  read(e, "sal", c.efast_sal);
  if (e.contains("ranges") && !e.at("ranges").is_null()) {
    std::array<ParameterRange, 3> ranges;
    for (std::size_t i = 0; i < 3; ++i) {
      std::array<double, 2> r{};
      const std::string name(kBgcNames[i]);
      if (!e.at("ranges").contains(name)) throw InputError("config: efast.ranges needs an entry for " + name);
      read(e.at("ranges"), name.c_str(), r);
      ranges[i] = {r[0], r[1], true};
    }
    c.efast_ranges = ranges;
  }
  return c;
}

void PipelineConfig::validate() const {
  check(synth.count >= 1, "synth.count must be at least 1");
  check(synth.noise_fraction >= 0.0 && synth.noise_fraction < 1.0, "synth.noise must be in [0, 1)");
  check(synth.clamps.sal_min <= synth.clamps.sal_max && synth.clamps.temp_min <= synth.clamps.temp_max,
        "synth clamp ranges must be ordered");
  check(holdout_region < synth.count, "synth.holdout_region must be smaller than synth.count");
  check(synth.gmm.max_components >= 1, "gmm.max_components must be positive");
  check(synth.gmm.max_iterations >= 1, "gmm.max_iterations must be positive");
  check(synth.gmm.tolerance > 0.0 && synth.gmm.jitter > 0.0, "gmm tolerance and jitter must be positive");
  check(synth.gmm.prune_weight >= 0.0 && synth.gmm.prune_weight < 1.0, "gmm.prune_weight must be in [0, 1)");
  check(train.inner_lr >= 0.0 && train.outer_lr > 0.0, "train learning rates must be positive");
  check(train.inner_steps >= 1, "train.inner_steps must be at least 1");
  check(train.epochs >= 0 && train.tasks >= 1, "train.epochs must be >= 0 and train.tasks >= 1");
  check(train.k_min >= 1 && train.k_max >= train.k_min, "train task sizes need 1 <= k_min <= k_max");
  check(train.architecture.hidden1 >= 1 && train.architecture.hidden2 >= 1, "train.hidden sizes must be positive");
  check(adapt.lr > 0.0 && adapt.iterations >= 0 && adapt.patience >= 1, "adapt settings out of range");
  check(folds >= 2, "cv.folds must be at least 2");
  check(efast.samples >= 65 && efast.samples % 2 == 1, "efast.samples must be odd and at least 65");
  check(efast.interference >= 1, "efast.interference must be positive");
  check(efast_temp >= -2.0 && efast_temp <= 40.0 && efast_sal >= 0.0, "efast temp/sal out of range");
  if (efast_ranges) {
    for (const auto& r : *efast_ranges) check(r.lo > 0.0 && r.hi >= r.lo, "efast ranges must be positive and ordered");
  }
  for (const auto* path : {&paths.water_iops, &paths.cie_tables}) {
    check(path->empty() || std::filesystem::exists(*path), "file not found: " + path->string());
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json PipelineConfig::canonical_json() const {
  json j = to_json();
  j["paths"].erase("output_dir");
  return j;
}

std::string PipelineConfig::hash() const { return fnv1a_hex(canonical_json().dump()); }

WaterIopTables PipelineConfig::water_tables() const {
  return paths.water_iops.empty() ? WaterIopTables::bundled() : WaterIopTables::load(paths.water_iops);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return PipelineConfig::from_json(j);
}

PipelineConfig default_config() {
  if (const char* env = std::getenv(kConfigEnv); env && *env) return load_config(env);
  return {};
}

}  // namespace bgcmeta
