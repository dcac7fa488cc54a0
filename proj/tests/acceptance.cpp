// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code
// is the number of failures.
#include "bgcmeta/bio_optics.hpp"
#include "bgcmeta/chroma.hpp"
#include "bgcmeta/commands.hpp"
#include "bgcmeta/csv.hpp"
#include "bgcmeta/fixtures.hpp"
#include "bgcmeta/io.hpp"
#include "bgcmeta/metrics.hpp"
#include "bgcmeta/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace bgcmeta;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
std::vector<int> selected;  // empty: all criteria

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

void run(int id, const char* title, double limit_s, const std::function<Verdict()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(secs < limit_s, "runtime " + fmt(secs, 3) + " s < " + fmt(limit_s) + " s");
  if (!v.pass) ++failures;
  std::printf("criterion %d %s: %s (%s)\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> log10_of(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(std::log10(x));
  return out;
}

// The nine parameter pairs compared between library and synthetic data.
enum Var { kTss, kDoc, kChl, kAd440, kBbp550, kAy440, kAph440, kVarCount };
constexpr std::pair<Var, Var> kPairs[] = {{kTss, kDoc},     {kTss, kChl},      {kDoc, kChl},
                                          {kTss, kAd440},   {kTss, kBbp550},   {kAd440, kBbp550},
                                          {kDoc, kAy440},   {kChl, kAph440},   {kAy440, kAph440}};
constexpr const char* kVarNames[] = {"tss", "doc", "tchla", "a_d440", "b_bp550", "a_y440", "a_ph440"};

using Columns = std::array<std::vector<double>, kVarCount>;

Columns library_columns(const SpectralLibrary& lib) {
  Columns c;
  for (const auto& r : lib.records()) {
    c[kTss].push_back(r.tss);
    c[kDoc].push_back(r.doc);
    c[kChl].push_back(r.tchla);
    c[kAd440].push_back(r.a_d.at_nm(440));
    c[kBbp550].push_back(r.b_bp_550);
    c[kAy440].push_back(r.a_y_440);
    c[kAph440].push_back(r.a_ph.at_nm(440));
  }
  return c;
}

Columns synthetic_columns(const SyntheticDataset& ds) {
  Columns c;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& b = ds.records[i].bgc;
    const auto s = ds.siops(i);
    c[kTss].push_back(b.tss);
    c[kDoc].push_back(b.doc);
    c[kChl].push_back(b.tchla);
    c[kAd440].push_back(b.tss * s.a_d_star.at_nm(440));
    c[kBbp550].push_back(b.tss * s.b_bp_star.at_nm(550));
    c[kAy440].push_back(b.doc * s.a_y_star.at_nm(440));
    c[kAph440].push_back(b.tchla * s.a_ph_star.at_nm(440));
  }
  return c;
}

double mean_over(const csv::Table& t, const std::string& param, int lo, int hi, const char* col) {
  double sum = 0;
  int n = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double nm = t.number(r, 0);
    if (t.rows[r][1] == param && nm >= lo && nm <= hi) {
      sum += t.number(r, t.column(col));
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  const fs::path work = fs::temp_directory_path() / ("bgcmeta_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(work);
  std::ostringstream log;

  auto context = [&](const std::string& sub) {
    CommandContext ctx;
    ctx.config.paths.output_dir = work / sub;
    ctx.log = &log;
    ctx.threads = 1;
    return ctx;
  };

  run(1, "forward-model point values", 1.0, [] {
    Verdict v;
    const double bbw = water_backscatter(500, 0);
    v.require(bbw == 1.38e-4, "b_bw(500,0)=" + fmt(bbw, 17));
    const double r = subsurface_rrs(0.5);
    v.require(std::abs(r - 0.0835) <= 1e-12, "r_rs(0.5)=" + fmt(r, 17));
    const double R = above_water_rrs(0.0835);
    v.require(std::abs(R - 0.050603) <= 1e-6, "R_rs(0.0835)=" + fmt(R, 10));
    return v;
  });

  run(2, "analytic gradients vs central differences", 30.0, [] {
    Verdict v;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    const Architecture arch;
    double worst = 0;
    for (int point = 0; point < 20; ++point) {
      Eigen::VectorXd theta(arch.parameter_count());
      for (auto& x : theta) x = g(rng) * 0.2;
      OutputTransform out{Eigen::Vector3d(g(rng), g(rng), g(rng)), Eigen::Vector3d(0.5, 0.3, 0.8)};
      MlpParams p(arch, theta, InputTransform::identity(arch.inputs), out);
      Batch b{Eigen::MatrixXd(arch.inputs, 8), Eigen::MatrixXd(3, 8)};
      for (auto& x : b.inputs.reshaped()) x = g(rng);
      for (auto& x : b.targets.reshaped()) x = g(rng);
      const Eigen::VectorXd grad = loss_grad(p, b).grad;
      // every output-layer weight plus a random draw of the rest
      std::vector<Eigen::Index> coords;
      for (Eigen::Index i = theta.size() - 195; i < theta.size(); ++i) coords.push_back(i);
      std::uniform_int_distribution<Eigen::Index> pick(0, theta.size() - 196);
      for (int k = 0; k < 300; ++k) coords.push_back(pick(rng));
      Eigen::VectorXd a(coords.size()), fd(coords.size());
      const double h = 1e-6;
      for (std::size_t k = 0; k < coords.size(); ++k) {
        MlpParams plus = p, minus = p;
        plus.theta()[coords[k]] += h;
        minus.theta()[coords[k]] -= h;
        a[k] = grad[coords[k]];
        fd[k] = (loss(plus, b) - loss(minus, b)) / (2 * h);
      }
      worst = std::max(worst, (a - fd).norm() / (a.norm() + fd.norm()));
    }
    v.require(worst < 1e-4, "20 points, worst relative error " + fmt(worst, 3));
    return v;
  });

  // shared fixture library
  auto base_ctx = context("fixture");
  const fs::path library_path = cmd_fixture(base_ctx, 247, 7);
  const auto library = SpectralLibrary::load(library_path);

  run(3, "synthetic data fidelity", 300.0, [&] {
    Verdict v;
    auto ctx = context("synth");
    ctx.config.paths.library = library_path;
    ctx.config.synth.count = 10000;
    cmd_synth(ctx);
    auto ds = io::read_synthetic(ctx.config.output("synthetic.csv"));
    ds.bases = fit_siop_bases(library);
    v.require(ds.size() == 10000, "K=" + std::to_string(ds.size()));

    const auto lib = library_columns(library);
    const auto syn = synthetic_columns(ds);
    double worst_ks = 0;
    std::string ks_text;
    for (int k = 0; k < 3; ++k) {
      const auto r = ks_two_sample(log10_of(syn[k]), log10_of(lib[k]));
      worst_ks = std::max(worst_ks, r.statistic);
      ks_text += std::string(k ? " " : "") + kVarNames[k] + "=" + fmt(r.statistic, 3);
    }
    v.require(worst_ks <= 0.25, "KS D " + ks_text);

    double worst_r = 0;
    std::string r_text;
    for (auto [x, y] : kPairs) {
      const double rs = *pearson(log10_of(syn[x]), log10_of(syn[y]));
      const double rl = *pearson(log10_of(lib[x]), log10_of(lib[y]));
      worst_r = std::max(worst_r, std::abs(rs - rl));
      r_text += std::string(r_text.empty() ? "" : " ") + kVarNames[x] + "/" + kVarNames[y] + "=" + fmt(rs - rl, 2);
    }
    v.require(worst_r <= 0.15, "max |dr| " + fmt(worst_r, 3) + " (" + r_text + ")");
    return v;
  });

  // standard pipeline fixture: 10000 draws with a 300-record region held out
  auto pipe = context("pipeline");
  pipe.config.paths.library = library_path;
  pipe.config.holdout_region = 300;
  bool pipeline_ready = false;
  auto prepare_pipeline = [&] {
    if (pipeline_ready) return;
    cmd_synth(pipe);
    cmd_pretrain(pipe, pipe.config.output("synthetic.csv"), std::nullopt);
    pipeline_ready = true;
  };

  run(4, "meta-learning efficacy", 900.0, [&] {
    Verdict v;
    prepare_pipeline();
    const auto log_table = csv::read(pipe.config.output("training_log.csv"));
    const auto epochs = log_table.rows.size();
    const double j1 = log_table.number(0, 1);
    const double je = log_table.number(epochs - 1, 1);
    v.require(epochs == 200 && je < j1, "frozen-task meta-loss J(1)=" + fmt(j1) + " J(" + std::to_string(epochs) +
                                             ")=" + fmt(je));

    // held-out tasks: fresh draws from the same fitted mixture
    const auto model = io::read_model(pipe.config.output("model.json")).params;
    SynthOptions held = pipe.config.synth;
    held.count = 3000;
    held.seed = 0x5eed;
    const auto ds = generate_dataset(library, held, pipe.config.water_tables());
    const auto data = make_training_set(ds, model.input());
    const auto& tc = pipe.config.train;
    const auto tasks = sample_tasks(data, 100, tc.k_min, tc.k_max, 0x7e57);
    int improved = 0;
    for (const auto& t : tasks) {
      const double before = loss(model, t.query);
      const double after = loss(inner_adapt(model, t.support, tc.inner_lr, tc.inner_steps), t.query);
      improved += after < before;
    }
    v.require(improved >= 90, std::to_string(improved) + "/100 held-out tasks improved by adaptation");
    return v;
  });

  run(5, "closed-loop region retrieval", 600.0, [&] {
    Verdict v;
    prepare_pipeline();
    cmd_adapt(pipe, pipe.config.output("region.csv"), pipe.config.output("model.json"));
    const auto m = io::read_json(pipe.config.output("metrics.json"))["metrics"];
    const auto b = io::read_json(pipe.config.output("baseline_metrics.json"))["metrics"];
    const double limit[3] = {1.6, 1.8, 1.8};
    for (int k = 0; k < 3; ++k) {
      const double rmse = m[k]["rmse"];
      const double base = b[k]["rmse"];
      v.require(rmse <= limit[k], std::string(kVarNames[k]) + " rmse " + fmt(rmse) + " <= " + fmt(limit[k]));
      v.require(rmse <= base, std::string(kVarNames[k]) + " rmse <= band-ratio " + fmt(base));
    }
    return v;
  });

  run(6, "forward-model sensitivity pattern", 300.0, [&] {
    Verdict v;
    auto ctx = context("sensitivity");
    ctx.config.paths.library = library_path;
    const auto t = csv::read(cmd_sensitivity(ctx, "forward"));
    const double tss_red = mean_over(t, "tss", 600, 700, "st"), tss_blue = mean_over(t, "tss", 400, 500, "st");
    v.require(tss_red > tss_blue, "TSS S_T red " + fmt(tss_red, 3) + " > blue " + fmt(tss_blue, 3));
    const double doc_red = mean_over(t, "doc", 600, 700, "st"), doc_blue = mean_over(t, "doc", 400, 500, "st");
    v.require(doc_blue > doc_red, "DOC S_T blue " + fmt(doc_blue, 3) + " > red " + fmt(doc_red, 3));

    std::vector<double> chl(kBandCount), s1(t.rows.size()), st(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      s1[r] = t.number(r, 2);
      st[r] = t.number(r, 3);
      if (t.rows[r][1] == "tchla") chl[std::size_t(t.number(r, 0)) - kStartNm] = st[r];
    }
    int peak = -1;
    for (int nm = 665; nm <= 690; ++nm) {
      const auto i = std::size_t(nm - kStartNm);
      if (chl[i] > chl[i - 1] && chl[i] >= chl[i + 1]) peak = nm;
    }
    v.require(peak > 0, "TChl-a S_T local maximum at " + std::to_string(peak) + " nm");
    double excess = -1;
    for (std::size_t r = 0; r < s1.size(); ++r) excess = std::max(excess, s1[r] - st[r]);
    v.require(excess <= 0.02, "max(S1 - S_T) " + fmt(excess, 3));
    return v;
  });

  run(7, "chromaticity", 1.0, [] {
    Verdict v;
    const auto cie = CieTables::bundled();
    const auto flat = Spectrum::constant(0.01);
    const auto e = chromaticity(flat, cie.cmf, Spectrum::constant(1.0));
    v.require(std::abs(e.x - 1.0 / 3) <= 1e-3 && std::abs(e.y - 1.0 / 3) <= 1e-3,
              "equal-energy (" + fmt(e.x, 5) + ", " + fmt(e.y, 5) + ")");
    const auto d = chromaticity(flat, cie.cmf, cie.d65);
    v.require(std::abs(d.x - 0.3127) <= 0.004 && std::abs(d.y - 0.3290) <= 0.004,
              "D65 (" + fmt(d.x, 5) + ", " + fmt(d.y, 5) + ")");
    bool exact = true;
    for (double s : {0.25, 2.0, 1024.0}) {
      const auto c = chromaticity(Spectrum::constant(0.01 * s), cie.cmf, cie.d65);
      exact = exact && c.x == d.x && c.y == d.y;
    }
    v.require(exact, "scale invariance exact");
    return v;
  });

  run(8, "metrics oracle", 1.0, [] {
    Verdict v;
    const std::vector<double> meas{1, 10, 100}, over{10, 100, 1000};
    const auto p = retrieval_metrics(meas, meas);
    v.require(std::abs(*p.r2 - 1) <= 1e-10 && std::abs(p.bias - 1) <= 1e-10 && std::abs(p.rmse - 1) <= 1e-10 &&
                  std::abs(p.mae - 1) <= 1e-10,
              "perfect prediction all ones");
    const auto o = retrieval_metrics(over, meas);
    v.require(std::abs(o.bias - 10) <= 1e-10 && std::abs(o.rmse - 10) <= 1e-10 && std::abs(o.mae - 10) <= 1e-10 &&
                  std::abs(*o.r2 + 0.5) <= 1e-10,
              "10x over-prediction bias=" + fmt(o.bias, 12) + " r2=" + fmt(*o.r2, 12));
    return v;
  });

  run(9, "determinism with one thread", 900.0, [&] {
    Verdict v;
    prepare_pipeline();
    auto again = context("pipeline_again");
    again.config = pipe.config;
    again.config.paths.output_dir = work / "pipeline_again";
    cmd_synth(again);
    for (const char* f : {"synthetic.csv", "region.csv", "gmm.json"})
      v.require(slurp(pipe.config.output(f)) == slurp(again.config.output(f)), std::string(f) + " identical");
    cmd_pretrain(again, again.config.output("synthetic.csv"), std::nullopt);
    for (const char* f : {"model.json", "training_log.csv"})
      v.require(slurp(pipe.config.output(f)) == slurp(again.config.output(f)), std::string(f) + " identical");
    return v;
  });

  fs::remove_all(work);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
