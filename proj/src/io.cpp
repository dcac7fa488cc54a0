#include "bgcmeta/io.hpp"

#include "bgcmeta/csv.hpp"
#include "bgcmeta/error.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace bgcmeta::io {

using nlohmann::json;

namespace {

json vec(const Eigen::Ref<const Eigen::VectorXd>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

json basis(const PcaBasis& b) {
  return {{"mean", vec(b.mean)}, {"components", mat(b.components)}, {"explained_variance", vec(b.explained_variance)}};
}

Eigen::VectorXd to_vec(const json& j, const std::string& what) {
  try {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const json::exception& e) {
    throw InputError(what + ": " + e.what());
  }
}

std::vector<std::size_t> columns(const csv::Table& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(t.column(n));
  return out;
}

Spectrum row_spectrum(const csv::Table& t, std::size_t row, const std::vector<std::size_t>& cols) {
  Eigen::ArrayXd v(kBandCount);
  for (Eigen::Index b = 0; b < kBandCount; ++b) v[b] = t.number(row, cols[static_cast<std::size_t>(b)]);
  return Spectrum(std::move(v));
}

std::string where(const csv::Table& t, std::size_t row) {
  return t.source + ":" + std::to_string(t.line_numbers[row]) + " (row " + std::to_string(row + 1) + ")";
}

}  // namespace

std::vector<std::string> rrs_columns() {
  std::vector<std::string> out;
  for (int nm = kStartNm; nm <= kEndNm; nm += kStepNm) out.push_back("rrs_" + std::to_string(nm));
  return out;
}

std::vector<std::string> score_columns() {
  std::vector<std::string> out;
  for (const char* family : {"a_d", "a_y", "a_ph", "b_bp"}) {
    for (int p = 1; p <= kPcaComponents; ++p) out.push_back(std::string(family) + "_pc" + std::to_string(p));
  }
  return out;
}

void write_synthetic(std::ostream& out, const SyntheticDataset& ds, const std::vector<std::string>& comments) {
  csv::Writer w(out);
  for (const auto& c : comments) w.comment(c);
  std::vector<std::string> header = {"k", "tss", "doc", "tchla", "temp", "sal"};
  for (auto& c : score_columns()) header.push_back(std::move(c));
  for (auto& c : rrs_columns()) header.push_back(std::move(c));
  w.row(header);
  std::vector<double> v;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const auto& r = ds.records[k];
    v = {r.bgc.tss, r.bgc.doc, r.bgc.tchla, r.bgc.temp, r.bgc.sal};
    const Eigen::VectorXd s = r.siop_scores();
    v.insert(v.end(), s.data(), s.data() + s.size());
    v.insert(v.end(), r.rrs.values().data(), r.rrs.values().data() + kBandCount);
    w.row(std::to_string(k), v);
  }
}

SyntheticDataset read_synthetic(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const std::size_t tss = t.column("tss"), doc = t.column("doc"), chl = t.column("tchla");
  const std::size_t temp = t.column("temp"), sal = t.column("sal");
  const auto score_cols = columns(t, score_columns());
  const auto rrs_cols = columns(t, rrs_columns());
  SyntheticDataset ds;
  ds.records.reserve(t.rows.size());
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    SyntheticRecord r;
    r.bgc = {t.number(row, tss), t.number(row, doc), t.number(row, chl), t.number(row, temp), t.number(row, sal)};
    try {
      r.bgc.validate();
    } catch (const InputError& e) {
      throw InputError(where(t, row) + ": " + e.what());
    }
    r.features.resize(kFeatureDim);
    r.features[feature::kTss] = std::log10(r.bgc.tss);
    r.features[feature::kDoc] = std::log10(r.bgc.doc);
    r.features[feature::kTchla] = std::log10(r.bgc.tchla);
    for (int j = 0; j < kSiopScoreDim; ++j) r.features[feature::kScores + j] = t.number(row, score_cols[static_cast<std::size_t>(j)]);
    r.features[feature::kTemp] = r.bgc.temp;
    r.features[feature::kSal] = r.bgc.sal;
    r.rrs = row_spectrum(t, row, rrs_cols);
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw InputError(t.source + ": no synthetic records");
  return ds;
}

void write_region(std::ostream& out, const std::vector<RegionSample>& region, const std::vector<std::string>& comments) {
  csv::Writer w(out);
  for (const auto& c : comments) w.comment(c);
  std::vector<std::string> header = {"timestamp", "tss", "doc", "tchla"};
  for (auto& c : rrs_columns()) header.push_back(std::move(c));
  w.row(header);
  for (const auto& s : region) {
    std::vector<double> v = {s.tss, s.doc, s.tchla};
    v.insert(v.end(), s.rrs.values().data(), s.rrs.values().data() + kBandCount);
    w.row(s.timestamp, v);
  }
}

std::vector<RegionSample> read_region(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const std::size_t ts = t.column("timestamp");
  const std::size_t tss = t.column("tss"), doc = t.column("doc"), chl = t.column("tchla");
  const auto rrs_cols = columns(t, rrs_columns());
  std::vector<RegionSample> out;
  out.reserve(t.rows.size());
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    RegionSample s{t.rows[row][ts], t.number(row, tss), t.number(row, doc), t.number(row, chl),
                   row_spectrum(t, row, rrs_cols)};
    if (!(s.tss > 0.0 && s.doc > 0.0 && s.tchla > 0.0)) {
      throw InputError(where(t, row) + ": tss, doc and tchla must be positive");
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InputError(t.source + ": region has no records");
  return out;
}

SpectraTable read_spectra(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  std::size_t found = 0;
  for (const auto& h : t.header) {
    if (h.rfind("rrs_", 0) == 0) ++found;
  }
  if (found != static_cast<std::size_t>(kBandCount)) {
    throw InputError(t.source + ": expected " + std::to_string(kBandCount) + " rrs_400..rrs_700 columns, found " +
                     std::to_string(found));
  }
  const auto rrs_cols = columns(t, rrs_columns());
  const bool has_ts = t.has_column("timestamp");
  const std::size_t ts = has_ts ? t.column("timestamp") : 0;
  SpectraTable out;
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    out.labels.push_back(has_ts ? t.rows[row][ts] : std::to_string(row + 1));
    Spectrum s = row_spectrum(t, row, rrs_cols);
    if (s.min() < 0.0) throw InputError(where(t, row) + ": negative reflectance");
    out.spectra.push_back(std::move(s));
  }
  return out;
}

json gmm_to_json(const SynthModel& m) {
  json comps = json::array();
  for (std::size_t i = 0; i < m.gmm.components(); ++i) {
    comps.push_back({{"weight", m.gmm.weights[i]}, {"mean", vec(m.gmm.means[i])}, {"covariance", mat(m.gmm.covariances[i])}});
  }
  std::vector<int> active = m.standardizer.active;
  return {{"truncation", m.gmm.truncation},
          {"components", comps},
          {"elbo", m.elbo},
          {"standardizer", {{"mean", vec(m.standardizer.mean)}, {"scale", vec(m.standardizer.scale)}, {"active", active}}},
          {"bases", {{"a_d", basis(m.bases.a_d)}, {"a_y", basis(m.bases.a_y)}, {"a_ph", basis(m.bases.a_ph)}, {"b_bp", basis(m.bases.b_bp)}}}};
}

json model_to_json(const MlpParams& p, const MetaTrainState* state) {
  const auto& a = p.architecture();
  json j = {{"architecture",
             {{"inputs", a.inputs}, {"hidden", {a.hidden1, a.hidden2}}, {"outputs", a.outputs},
              {"activation", "tanh"}, {"output_activation", "linear"}, {"targets", {"log10_tss", "log10_doc", "log10_tchla"}}}},
            {"input_transform", {{"kind", "zscore_log10"}, {"offset", p.input().offset}, {"mean", vec(p.input().mean)}, {"scale", vec(p.input().scale)}}},
            {"output_transform", {{"kind", "affine_log10"}, {"mean", vec(p.output().mean)}, {"scale", vec(p.output().scale)}}},
            {"theta", vec(p.theta())}};
  if (state) {
    json s = {{"epochs_done", state->epochs_done},
              {"best_epoch", state->best_epoch},
              {"best_loss", std::isfinite(state->best_loss) ? json(state->best_loss) : json(nullptr)},
              {"current_theta", vec(state->current.theta())},
              {"optimizer_step", state->optimizer.step}};
    if (state->optimizer.m.size() > 0) {
      s["adam_m"] = vec(state->optimizer.m);
      s["adam_v"] = vec(state->optimizer.v);
    }
    j["training_state"] = s;
  }
  return j;
}

LoadedModel model_from_json(const json& j, const std::string& source) {
  try {
    LoadedModel out;
    const auto& ja = j.at("architecture");
    Architecture a;
    a.inputs = ja.at("inputs").get<int>();
    a.hidden1 = ja.at("hidden").at(0).get<int>();
    a.hidden2 = ja.at("hidden").at(1).get<int>();
    a.outputs = ja.at("outputs").get<int>();
    if (a.inputs != kBandCount || a.outputs != 3) throw InputError("unsupported architecture");
    InputTransform in;
    in.offset = j.at("input_transform").at("offset").get<double>();
    in.mean = to_vec(j.at("input_transform").at("mean"), "input_transform.mean");
    in.scale = to_vec(j.at("input_transform").at("scale"), "input_transform.scale");
    OutputTransform ot;
    if (j.contains("output_transform")) {
      ot.mean = to_vec(j.at("output_transform").at("mean"), "output_transform.mean");
      ot.scale = to_vec(j.at("output_transform").at("scale"), "output_transform.scale");
    }
    out.params = MlpParams(a, to_vec(j.at("theta"), "theta"), in, ot);
    if (j.contains("training_state")) {
      const auto& s = j.at("training_state");
      MetaTrainState st;
      st.best = out.params;
      st.current = MlpParams(a, to_vec(s.at("current_theta"), "current_theta"), in, ot);
      st.epochs_done = s.at("epochs_done").get<int>();
      st.best_epoch = s.at("best_epoch").get<int>();
      st.best_loss = s.at("best_loss").is_null() ? std::numeric_limits<double>::infinity() : s.at("best_loss").get<double>();
      st.optimizer.step = s.at("optimizer_step").get<long>();
      if (s.contains("adam_m")) {
        st.optimizer.m = to_vec(s.at("adam_m"), "adam_m");
        st.optimizer.v = to_vec(s.at("adam_v"), "adam_v");
      }
      out.state = std::move(st);
    }
    out.document = j;
    return out;
  } catch (const json::exception& e) {
    throw InputError(source + ": malformed model file: " + e.what());
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

LoadedModel read_model(const std::filesystem::path& path) { return model_from_json(read_json(path), path.string()); }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace bgcmeta::io
