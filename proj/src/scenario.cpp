#include "hdtomo/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <set>
#include <sstream>

#include "hdtomo/errors.hpp"
#include "hdtomo/homodyne.hpp"
#include "hdtomo/io.hpp"
#include "hdtomo/metrics.hpp"

namespace hdt::scenario {

using nlohmann::json;

namespace {

const std::set<std::string> kLayerKeys = {"state",     "r1",        "eta_i",  "eta_d",
                                          "crystal_k", "crystal_d", "r_raw",  "gain_db",
                                          "r_eff",     "amplifier"};
const std::set<std::string> kSweepParams = {"r1",      "eta_i", "eta_d",    "r_raw",
                                            "gain_db", "r_eff", "crystal_k"};
const std::set<std::string> kReconKeys = {"xi_max",   "n_xi",           "n_theta",
                                          "grid_half_width", "grid_n", "apodization_alpha",
                                          "rescale_gain", "frame_aspect"};
const std::set<std::string> kTopKeys = [] {
  std::set<std::string> keys = {"schema_version", "scenario_id", "output",        "metric",
                                "cases",          "sweep",       "sampling",      "seed",
                                "n_per_phase",    "output_dir",  "write_datasets"};
  keys.insert(kLayerKeys.begin(), kLayerKeys.end());
  keys.insert(kReconKeys.begin(), kReconKeys.end());
  return keys;
}();

double get_number(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path + key, "must be finite");
  return d;
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(path + key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + key, "expected a string");
  return v.get<std::string>();
}

ParamLayer parse_layer(const json& obj, const std::string& path, bool allow_extra) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  ParamLayer layer;
  int gain_keys = 0;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& key = it.key();
    if (!kLayerKeys.count(key)) {
      if (allow_extra) continue;
      if (key == "label") continue;
      throw ConfigError(path + key, "unknown key");
    }
    if (key == "state") {
      layer.state = get_string(obj, key, path);
      try {
        parse_state_kind(*layer.state);
      } catch (const RangeError& e) {
        throw ConfigError(path + key, e.what());
      }
    } else if (key == "r1") {
      layer.r1 = get_number(obj, key, path);
    } else if (key == "eta_i") {
      layer.eta_i = get_number(obj, key, path);
    } else if (key == "eta_d") {
      layer.eta_d = get_number(obj, key, path);
    } else if (key == "crystal_k") {
      layer.crystal_k = get_number(obj, key, path);
    } else if (key == "crystal_d") {
      layer.crystal_d = get_number(obj, key, path);
    } else if (key == "amplifier") {
      if (!it.value().is_boolean()) throw ConfigError(path + key, "expected true or false");
      layer.amplifier = it.value().get<bool>();
    } else {
      ++gain_keys;
      layer.gain = key == "r_raw"     ? ParamLayer::Gain::RRaw
                   : key == "gain_db" ? ParamLayer::Gain::GainDb
                                      : ParamLayer::Gain::REff;
      layer.gain_value = get_number(obj, key, path);
    }
  }
  if (gain_keys > 1) throw ConfigError(path + "r_raw", "r_raw, gain_db and r_eff are mutually exclusive");
  if (layer.gain != ParamLayer::Gain::None && layer.amplifier == false)
    throw ConfigError(path + "amplifier", "amplifier: false conflicts with a gain setting");
  return layer;
}

std::vector<double> parse_sweep_values(const json& entry, const std::string& path) {
  if (entry.contains("values")) {
    if (entry.contains("start") || entry.contains("stop") || entry.contains("count"))
      throw ConfigError(path + "values", "give either values or start/stop/count");
    const auto& vals = entry.at("values");
    if (!vals.is_array() || vals.empty()) throw ConfigError(path + "values", "expected a non-empty array");
    std::vector<double> out;
    for (const auto& v : vals) {
      if (!v.is_number()) throw ConfigError(path + "values", "expected numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  for (const char* k : {"start", "stop", "count"})
    if (!entry.contains(k)) throw ConfigError(path + k, "missing");
  const double start = get_number(entry, "start", path);
  const double stop = get_number(entry, "stop", path);
  const std::size_t count = get_count(entry, "count", path);
  if (count < 1) throw ConfigError(path + "count", "must be at least 1");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = count == 1 ? start
                        : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

bool safe_label(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

// Sweep points of a case in row-major order over the sweep axes.
std::vector<std::vector<double>> sweep_points(const std::vector<SweepAxis>& sweep) {
  std::vector<std::vector<double>> points = {{}};
  for (const auto& axis : sweep) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points)
      for (double v : axis.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

ParamLayer at_point(const CaseSpec& c, const std::vector<SweepAxis>& sweep,
                    const std::vector<double>& point) {
  ParamLayer layer = c.params;
  for (std::size_t a = 0; a < sweep.size(); ++a) layer.set(sweep[a].param, point[a]);
  return layer;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Streams the dataset CSV serialization through SHA-256 without
// materializing it.
std::string dataset_digest(const QuadratureDataset& dataset) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  auto feed = [&](const std::string& s) { EVP_DigestUpdate(ctx, s.data(), s.size()); };
  feed("theta,q\n");
  std::string line;
  for (std::size_t k = 0; k < dataset.n_phases(); ++k) {
    const std::string th = io::format_double(dataset.phases()[k]) + ",";
    for (double q : dataset.samples(k)) {
      line = th;
      line += io::format_double(q);
      line += '\n';
      feed(line);
    }
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

struct GridMoments {
  double var_q;
  double var_p;
};

GridMoments moments(const WignerGrid& w) {
  double m0 = 0.0, mq = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < w.n_q(); ++i)
    for (std::size_t j = 0; j < w.n_p(); ++j) {
      const double v = w.at(i, j);
      m0 += v;
      mq += v * w.q_axis[i] * w.q_axis[i];
      mp += v * w.p_axis[j] * w.p_axis[j];
    }
  return {mq / m0, mp / m0};
}

class Runner {
public:
  Runner(const ScenarioConfig& config, std::filesystem::path out_dir)
      : config_(config), dir_(std::move(out_dir)) {}

  RunResult run() {
    try {
      std::filesystem::create_directories(dir_);
    } catch (const std::filesystem::filesystem_error& e) {
      throw ConfigError("output_dir", std::string("cannot create output directory: ") + e.what());
    }
    switch (config_.output) {
      case OutputKind::Grids: run_grids(); break;
      case OutputKind::Curve:
      case OutputKind::Surface: run_sweep(); break;
    }
    write_manifest();
    return result_;
  }

private:
  void emit(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    try {
      io::write_text(path, content);
    } catch (const std::exception& e) {
      throw ConfigError("output_dir", e.what());
    }
    files_.push_back({name, io::sha256_hex(content), content.size()});
    result_.files.push_back(path);
  }

  void warn(const std::string& where, const std::string& what) {
    result_.warnings.push_back(where + ": " + what);
  }

  void run_grids() {
    json summary = json::array();
    for (const auto& c : config_.cases) {
      const auto rc = resolve(c.params, "cases[" + c.label + "]");
      const auto loss = effective_loss(rc.chain);
      const bool sampled = config_.sampling == SamplingMode::MonteCarlo;
      auto rcfg = config_.reconstruction.apply(
          default_reconstruction_config(rc.state, loss.epsilon_r, sampled));
      try {
        rcfg.validate();
      } catch (const RangeError& e) {
        throw ConfigError("reconstruction", e.what());
      }

      json provenance;
      WignerGrid w;
      if (sampled) {
        const auto phases = matched_phases(rcfg.n_theta, rcfg.frame_aspect);
        const auto ds = sample_quadratures(rc.state, rc.chain, phases, config_.n_per_phase, config_.seed);
        provenance = {{"source", "monte_carlo"},
                      {"seed", config_.seed},
                      {"n_per_phase", config_.n_per_phase},
                      {"dataset_sha256", dataset_digest(ds)}};
        if (config_.write_datasets) {
          emit(c.label + ".dataset.csv", io::dataset_csv(ds));
          emit(c.label + ".dataset.json", io::dataset_sidecar(ds).dump(2) + "\n");
        }
        w = reconstruct_sampled(ds, rcfg);
      } else {
        provenance = {{"source", "analytic"}};
        w = reconstruct_analytic(rc.state, rc.chain, rcfg);
      }

      const auto ideal = closed_form_grid(rc.state, 0.0, w.q_axis, w.p_axis);
      const auto reference = closed_form_grid(rc.state, loss.epsilon_r, w.q_axis, w.p_axis);
      double linf = 0.0;
      for (std::size_t i = 0; i < w.values.size(); ++i)
        linf = std::max(linf, std::abs(w.values[i] - reference.values[i]));
      const auto report = quality_report(ideal, w, loss.epsilon_r);
      const double integral = w.integral();
      if (std::abs(integral - 1.0) > 0.01)
        w.warnings.push_back("normalization: integral of W is " + io::format_double(integral));
      for (const auto& msg : w.warnings) warn(c.label, msg);
      const auto mom = moments(w);
      const auto ref_mom = moments(reference);

      json entry = {{"label", c.label},
                    {"state", io::to_json(rc.state)},
                    {"chain", io::to_json(rc.chain)},
                    {"effective_loss", io::to_json(loss)},
                    {"reconstruction", io::to_json(rcfg)},
                    {"provenance", provenance},
                    {"quality", io::to_json(report)},
                    {"integral", integral},
                    {"peak", w.max_abs()},
                    {"closed_form_peak", reference.max_abs()},
                    {"aspect_ratio", mom.var_q / mom.var_p},
                    {"closed_form_aspect_ratio", ref_mom.var_q / ref_mom.var_p},
                    {"closed_form_linf", linf},
                    {"closed_form_linf_rel", linf / reference.max_abs()},
                    {"warnings", w.warnings}};
      if (rc.state.has_photon())
        entry["closed_form_depth"] = wigner_depth(rc.state.r1(), loss.epsilon_r);
      else
        entry["closed_form_fidelity"] = fidelity_bsv(rc.state.r1(), loss.epsilon_r);

      emit(c.label + ".wigner.csv", io::wigner_csv(w));
      emit(c.label + ".wigner.json", entry.dump(2) + "\n");
      summary.push_back(std::move(entry));
    }
    emit("summary.json", json{{"scenario_id", config_.scenario_id}, {"cases", summary}}.dump(2) + "\n");
  }

  void run_sweep() {
    const auto points = sweep_points(config_.sweep);
    const std::size_t n_points = points.size();
    const std::size_t n_total = config_.cases.size() * n_points;
    std::vector<double> eps(n_total), value(n_total);
    std::string failure;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(n_total); ++idx) {
      const auto i = static_cast<std::size_t>(idx);
      const auto& c = config_.cases[i / n_points];
      try {
        const auto rc = resolve(at_point(c, config_.sweep, points[i % n_points]), c.label);
        const double e = effective_loss(rc.chain).epsilon_r;
        eps[i] = e;
        value[i] = config_.metric == Metric::Fidelity ? fidelity_bsv(rc.state.r1(), e)
                                                      : wigner_depth(rc.state.r1(), e);
      } catch (const std::exception& ex) {
#pragma omp critical(hdt_sweep_failure)
        if (failure.empty()) failure = ex.what();
      }
    }
    if (!failure.empty()) throw NumericalError(failure);

    const char* metric = config_.metric == Metric::Fidelity ? "fidelity" : "depth";
    std::string csv = "case";
    for (const auto& axis : config_.sweep) csv += "," + axis.param;
    csv += std::string(",epsilon_r,") + metric + "\n";
    for (std::size_t i = 0; i < n_total; ++i) {
      csv += config_.cases[i / n_points].label;
      for (double v : points[i % n_points]) csv += "," + io::format_double(v);
      csv += "," + io::format_double(eps[i]) + "," + io::format_double(value[i]) + "\n";
    }
    const char* suffix = config_.output == OutputKind::Curve ? ".curve.csv" : ".surface.csv";
    emit(config_.scenario_id + suffix, csv);
  }

  void write_manifest() {
    json files = json::array();
    for (const auto& f : files_)
      files.push_back({{"path", f.name}, {"sha256", f.digest}, {"bytes", f.bytes}});
    json manifest = {{"scenario_id", config_.scenario_id},
                     {"schema_version", config_.schema_version},
                     {"created_utc", utc_timestamp()},
                     {"config", config_.source},
                     {"files", files},
                     {"warnings", result_.warnings}};
    result_.manifest = dir_ / "manifest.json";
    io::write_text(result_.manifest, manifest.dump(2) + "\n");
  }

  struct FileEntry {
    std::string name;
    std::string digest;
    std::size_t bytes;
  };

  const ScenarioConfig& config_;
  std::filesystem::path dir_;
  std::vector<FileEntry> files_;
  RunResult result_;
};

}  // namespace

void ParamLayer::apply(const ParamLayer& over) {
  if (over.state) state = over.state;
  if (over.r1) r1 = over.r1;
  if (over.eta_i) eta_i = over.eta_i;
  if (over.eta_d) eta_d = over.eta_d;
  if (over.crystal_k) crystal_k = over.crystal_k;
  if (over.crystal_d) crystal_d = over.crystal_d;
  if (over.gain != Gain::None) {
    gain = over.gain;
    gain_value = over.gain_value;
    amplifier = true;
  }
  if (over.amplifier) amplifier = over.amplifier;
}

void ParamLayer::set(std::string_view param, double value) {
  if (param == "r1") r1 = value;
  else if (param == "eta_i") eta_i = value;
  else if (param == "eta_d") eta_d = value;
  else if (param == "crystal_k") crystal_k = value;
  else if (param == "r_raw" || param == "gain_db" || param == "r_eff") {
    gain = param == "r_raw" ? Gain::RRaw : param == "gain_db" ? Gain::GainDb : Gain::REff;
    gain_value = value;
    amplifier = true;
  } else {
    throw ConfigError("sweep.param", "parameter '" + std::string(param) + "' cannot be swept");
  }
}

ResolvedCase resolve(const ParamLayer& layer, const std::string& where) {
  if (!layer.state) throw ConfigError(where.empty() ? "state" : where + ".state", "missing");
  try {
    const StateSpec state(parse_state_kind(*layer.state), layer.r1.value_or(0.0));
    std::optional<AmplifierParams> amp;
    const CrystalParams crystal(layer.crystal_k.value_or(0.1), layer.crystal_d.value_or(1e-3));
    if (layer.gain != ParamLayer::Gain::None && layer.amplifier.value_or(true)) {
      double r_raw = layer.gain_value;
      if (layer.gain == ParamLayer::Gain::GainDb) r_raw = db_to_gain(layer.gain_value);
      if (layer.gain == ParamLayer::Gain::REff) r_raw = layer.gain_value + 0.5 * crystal.kd();
      amp.emplace(r_raw, crystal);
    }
    return {state, DetectionChain(layer.eta_i.value_or(1.0), layer.eta_d.value_or(1.0), amp)};
  } catch (const RangeError& e) {
    throw ConfigError(where, e.what());
  }
}

ReconstructionConfig ReconstructionOverrides::apply(ReconstructionConfig base) const {
  if (xi_max) base.xi_max = *xi_max;
  if (n_xi) base.n_xi = *n_xi;
  if (n_theta) base.n_theta = *n_theta;
  if (grid_half_width) base.grid_half_width = *grid_half_width;
  if (grid_n) base.grid_n = *grid_n;
  if (apodization_alpha) base.apodization_alpha = *apodization_alpha;
  if (rescale_gain) base.rescale_gain = *rescale_gain;
  if (frame_aspect) base.frame_aspect = *frame_aspect;
  return base;
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!kTopKeys.count(it.key())) throw ConfigError(it.key(), "unknown key");

  ScenarioConfig cfg;
  cfg.source = doc;
  if (!doc.contains("schema_version")) throw ConfigError("schema_version", "missing");
  if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != 1)
    throw ConfigError("schema_version", "only schema_version 1 is supported");
  if (!doc.contains("scenario_id")) throw ConfigError("scenario_id", "missing");
  cfg.scenario_id = get_string(doc, "scenario_id", "");
  if (!safe_label(cfg.scenario_id))
    throw ConfigError("scenario_id", "use letters, digits, '_', '-' or '.'");

  if (!doc.contains("output")) throw ConfigError("output", "missing");
  const auto output = get_string(doc, "output", "");
  if (output == "grids") cfg.output = OutputKind::Grids;
  else if (output == "curve") cfg.output = OutputKind::Curve;
  else if (output == "surface") cfg.output = OutputKind::Surface;
  else throw ConfigError("output", "expected grids, curve or surface");

  if (doc.contains("metric")) {
    const auto m = get_string(doc, "metric", "");
    if (m == "fidelity") cfg.metric = Metric::Fidelity;
    else if (m == "depth") cfg.metric = Metric::Depth;
    else throw ConfigError("metric", "expected fidelity or depth");
  }
  if (cfg.output != OutputKind::Grids && cfg.metric == Metric::None)
    throw ConfigError("metric", "curve and surface outputs need a metric");
  if (cfg.output == OutputKind::Grids && cfg.metric != Metric::None)
    throw ConfigError("metric", "grids output computes every metric; drop the key");

  if (doc.contains("sampling")) {
    const auto s = get_string(doc, "sampling", "");
    if (s == "analytic") cfg.sampling = SamplingMode::Analytic;
    else if (s == "monte_carlo") cfg.sampling = SamplingMode::MonteCarlo;
    else throw ConfigError("sampling", "expected analytic or monte_carlo");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("n_per_phase")) {
    cfg.n_per_phase = get_count(doc, "n_per_phase", "");
    if (cfg.n_per_phase < 1) throw ConfigError("n_per_phase", "must be at least 1");
  }
  if (doc.contains("write_datasets")) {
    if (!doc.at("write_datasets").is_boolean()) throw ConfigError("write_datasets", "expected true or false");
    cfg.write_datasets = doc.at("write_datasets").get<bool>();
  }
  if (doc.contains("output_dir")) cfg.output_dir = get_string(doc, "output_dir", "");

  auto& rec = cfg.reconstruction;
  auto opt_num = [&](const char* key, std::optional<double>& dst) {
    if (doc.contains(key)) dst = get_number(doc, key, "");
  };
  auto opt_count = [&](const char* key, std::optional<std::size_t>& dst) {
    if (doc.contains(key)) dst = get_count(doc, key, "");
  };
  opt_num("xi_max", rec.xi_max);
  opt_count("n_xi", rec.n_xi);
  opt_count("n_theta", rec.n_theta);
  opt_num("grid_half_width", rec.grid_half_width);
  opt_count("grid_n", rec.grid_n);
  opt_num("apodization_alpha", rec.apodization_alpha);
  opt_num("rescale_gain", rec.rescale_gain);
  opt_num("frame_aspect", rec.frame_aspect);

  const ParamLayer base = parse_layer(doc, "", true);
  if (doc.contains("cases")) {
    const auto& cases = doc.at("cases");
    if (!cases.is_array() || cases.empty()) throw ConfigError("cases", "expected a non-empty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const std::string path = "cases[" + std::to_string(i) + "].";
      if (!cases[i].is_object() || !cases[i].contains("label"))
        throw ConfigError(path + "label", "missing");
      CaseSpec c;
      c.label = get_string(cases[i], "label", path);
      if (!safe_label(c.label)) throw ConfigError(path + "label", "use letters, digits, '_', '-' or '.'");
      if (!labels.insert(c.label).second) throw ConfigError(path + "label", "duplicate label");
      c.params = base;
      c.params.apply(parse_layer(cases[i], path, false));
      cfg.cases.push_back(std::move(c));
    }
  } else {
    cfg.cases.push_back({"main", base});
  }

  if (doc.contains("sweep")) {
    const auto& sweep = doc.at("sweep");
    if (!sweep.is_array()) throw ConfigError("sweep", "expected an array");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const std::string path = "sweep[" + std::to_string(i) + "].";
      const auto& entry = sweep[i];
      if (!entry.is_object() || !entry.contains("param")) throw ConfigError(path + "param", "missing");
      for (auto it = entry.begin(); it != entry.end(); ++it)
        if (it.key() != "param" && it.key() != "values" && it.key() != "start" &&
            it.key() != "stop" && it.key() != "count")
          throw ConfigError(path + it.key(), "unknown key");
      SweepAxis axis;
      axis.param = get_string(entry, "param", path);
      if (!kSweepParams.count(axis.param)) throw ConfigError(path + "param", "'" + axis.param + "' cannot be swept");
      axis.values = parse_sweep_values(entry, path);
      cfg.sweep.push_back(std::move(axis));
    }
  }
  const std::size_t dims = cfg.sweep.size();
  if (cfg.output == OutputKind::Grids && dims != 0)
    throw ConfigError("sweep", "grids output takes no sweep");
  if (cfg.output == OutputKind::Curve && dims > 1)
    throw ConfigError("sweep", "a curve has exactly one sweep dimension (or none for a single point)");
  if (cfg.output == OutputKind::Surface && dims != 2)
    throw ConfigError("sweep", "a surface needs exactly two sweep dimensions");
  if (dims == 2 && cfg.sweep[0].param == cfg.sweep[1].param)
    throw ConfigError("sweep", "surface axes must differ");

  // Resolve everything up front so numerical runs never start on a bad config.
  const auto points = sweep_points(cfg.sweep);
  for (const auto& c : cfg.cases) {
    for (const auto& pt : points) {
      const auto rc = resolve(at_point(c, cfg.sweep, pt), "cases[" + c.label + "]");
      if (cfg.metric == Metric::Fidelity && rc.state.has_photon())
        throw ConfigError("metric", "closed-form fidelity exists only for vacuum and squeezed_vacuum");
      if (cfg.metric == Metric::Depth && !rc.state.has_photon())
        throw ConfigError("metric", "depth is defined for single_photon and squeezed_single_photon");
    }
    if (cfg.output == OutputKind::Grids) {
      const auto rc = resolve(c.params, "cases[" + c.label + "]");
      const bool sampled = cfg.sampling == SamplingMode::MonteCarlo;
      try {
        rec.apply(default_reconstruction_config(rc.state, effective_loss(rc.chain).epsilon_r, sampled))
            .validate();
      } catch (const RangeError& e) {
        throw ConfigError("reconstruction", e.what());
      }
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError("", e.what());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    std::vector<Preset> p;
    p.push_back({"fig2",
                 "squeezed vacuum r1=3 (26 dB): ideal; eta_d=0.95; eta_d=0.95 + 20 dB amplification (r_raw=2.3)",
                 json{{"schema_version", 1},
                      {"scenario_id", "fig2"},
                      {"output", "grids"},
                      {"state", "squeezed_vacuum"},
                      {"r1", 3.0},
                      {"cases",
                       {{{"label", "ideal"}, {"eta_i", 1.0}, {"eta_d", 1.0}},
                        {{"label", "eta95"}, {"eta_i", 1.0}, {"eta_d", 0.95}},
                        {{"label", "eta95_amp20db"}, {"eta_i", 0.9999}, {"eta_d", 0.95}, {"r_raw", 2.3}}}}}});
    json fig3_cases = json::array();
    for (double r1 : {1.7, 3.0})
      for (double eta : {0.45, 0.75, 0.95}) {
        std::ostringstream label;
        label << "r1_" << r1 << "_eta_" << eta;
        fig3_cases.push_back({{"label", label.str()}, {"r1", r1}, {"eta_d", eta}});
      }
    p.push_back({"fig3",
                 "squeezed-vacuum fidelity vs r2 in [0,4] (81 points), r1 in {1.7,3}, eta_d in {0.45,0.75,0.95}",
                 json{{"schema_version", 1},
                      {"scenario_id", "fig3"},
                      {"output", "curve"},
                      {"metric", "fidelity"},
                      {"state", "squeezed_vacuum"},
                      {"eta_i", 0.9999},
                      {"sweep", {{{"param", "r_eff"}, {"start", 0.0}, {"stop", 4.0}, {"count", 81}}}},
                      {"cases", fig3_cases}}});
    p.push_back({"fig5",
                 "squeezed single photon r1=3: ideal; eta_d=0.95; eta_d=0.95 + 20 dB amplification (r_raw=2.3)",
                 json{{"schema_version", 1},
                      {"scenario_id", "fig5"},
                      {"output", "grids"},
                      {"state", "squeezed_single_photon"},
                      {"r1", 3.0},
                      {"cases",
                       {{{"label", "ideal"}, {"eta_i", 1.0}, {"eta_d", 1.0}},
                        {{"label", "eta95"}, {"eta_i", 1.0}, {"eta_d", 0.95}},
                        {{"label", "eta95_amp20db"}, {"eta_i", 0.9999}, {"eta_d", 0.95}, {"r_raw", 2.3}}}}}});
    p.push_back({"fig6",
                 "squeezed single photon r1=3, eta_d=0.45: no amplifier; 20 dB (r_raw=2.3); 30 dB (r_raw=3.45)",
                 json{{"schema_version", 1},
                      {"scenario_id", "fig6"},
                      {"output", "grids"},
                      {"state", "squeezed_single_photon"},
                      {"r1", 3.0},
                      {"eta_d", 0.45},
                      {"cases",
                       {{{"label", "eta45"}, {"eta_i", 1.0}},
                        {{"label", "eta45_amp20db"}, {"eta_i", 0.9999}, {"r_raw", 2.3}},
                        {{"label", "eta45_amp30db"}, {"eta_i", 0.9999}, {"r_raw", 3.45}}}}}});
    p.push_back({"fig7",
                 "squeezed-single-photon depth W(0,0), r1=3, over eta_d in [0.40,1.00] x r2 in [0,4]",
                 json{{"schema_version", 1},
                      {"scenario_id", "fig7"},
                      {"output", "surface"},
                      {"metric", "depth"},
                      {"state", "squeezed_single_photon"},
                      {"r1", 3.0},
                      {"eta_i", 0.9999},
                      {"sweep",
                       {{{"param", "eta_d"}, {"start", 0.40}, {"stop", 1.00}, {"count", 61}},
                        {{"param", "r_eff"}, {"start", 0.0}, {"stop", 4.0}, {"count", 81}}}}}});
    return p;
  }();
  return list;
}

const Preset* find_preset(std::string_view id) {
  for (const auto& p : presets())
    if (p.id == id) return &p;
  return nullptr;
}

std::string preset_table() {
  std::ostringstream out;
  out << "id     output   description\n";
  for (const auto& p : presets()) {
    std::string output = p.config.at("output").get<std::string>();
    out << p.id << std::string(7 - std::min<std::size_t>(p.id.size(), 6), ' ') << output
        << std::string(9 - std::min<std::size_t>(output.size(), 8), ' ') << p.description << "\n";
  }
  return out.str();
}

RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  return Runner(config, out_dir).run();
}

std::filesystem::path resolve_output_dir(const ScenarioConfig& config,
                                         const std::optional<std::filesystem::path>& cli_out) {
  if (cli_out) return *cli_out;
  if (config.output_dir) return *config.output_dir;
  if (const char* env = std::getenv("HDTOMO_OUTPUT_DIR"); env && *env)
    return std::filesystem::path(env) / config.scenario_id;
  return std::filesystem::path("hdtomo-out") / config.scenario_id;
}

}  // namespace hdt::scenario
