#include "hdtomo/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hdtomo/errors.hpp"

namespace hdt::io {

using nlohmann::json;

namespace {

double parse_double(std::string_view field) {
  // strtod: std::from_chars for double is missing from older libstdc++.
  std::string tmp(field);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw RangeError("malformed number '" + tmp + "' in CSV");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

json to_json(const StateSpec& state) {
  return {{"kind", std::string(to_string(state.kind()))}, {"r1", state.r1()}};
}

json to_json(const DetectionChain& chain) {
  json j = {{"eta_i", chain.eta_i()}, {"eta_d", chain.eta_d()}};
  if (const auto& amp = chain.amplifier()) {
    j["amplifier"] = {{"r_raw", amp->r_raw()},
                      {"crystal_k", amp->crystal().k()},
                      {"crystal_d", amp->crystal().d()}};
  } else {
    j["amplifier"] = nullptr;
  }
  return j;
}

json to_json(const EffectiveLoss& loss) {
  return {{"epsilon_r", loss.epsilon_r},
          {"gain_scale", loss.gain_scale},
          {"r_eff", loss.r_eff},
          {"sigma_a2", loss.sigma_a2}};
}

json to_json(const ReconstructionConfig& c) {
  json j = {{"xi_max", c.xi_max},
            {"n_xi", c.n_xi},
            {"n_theta", c.n_theta},
            {"grid_half_width", c.grid_half_width},
            {"grid_n", c.grid_n},
            {"apodization_alpha", c.apodization_alpha},
            {"frame_aspect", c.frame_aspect},
            {"table_oversampling", c.table_oversampling}};
  j["rescale_gain"] = c.rescale_gain ? json(*c.rescale_gain) : json("from_chain");
  return j;
}

json to_json(const QualityReport& r) {
  return {{"fidelity", r.fidelity},
          {"depth", r.depth},
          {"min_value", r.min_value},
          {"min_location", {r.min_q, r.min_p}},
          {"epsilon_r_used", r.epsilon_r_used}};
}

StateSpec state_from_json(const json& j) {
  return StateSpec(parse_state_kind(j.at("kind").get<std::string>()), j.value("r1", 0.0));
}

DetectionChain chain_from_json(const json& j) {
  std::optional<AmplifierParams> amp;
  if (j.contains("amplifier") && !j.at("amplifier").is_null()) {
    const auto& a = j.at("amplifier");
    amp.emplace(a.at("r_raw").get<double>(),
                CrystalParams(a.at("crystal_k").get<double>(), a.at("crystal_d").get<double>()));
  }
  return DetectionChain(j.at("eta_i").get<double>(), j.at("eta_d").get<double>(), amp);
}

std::string dataset_csv(const QuadratureDataset& dataset) {
  std::string out = "theta,q\n";
  for (std::size_t k = 0; k < dataset.n_phases(); ++k) {
    const std::string th = format_double(dataset.phases()[k]);
    for (double q : dataset.samples(k)) {
      out += th;
      out += ',';
      out += format_double(q);
      out += '\n';
    }
  }
  return out;
}

json dataset_sidecar(const QuadratureDataset& dataset) {
  std::vector<std::size_t> counts;
  for (std::size_t k = 0; k < dataset.n_phases(); ++k) counts.push_back(dataset.samples(k).size());
  return {{"format", "hdtomo-quadrature-dataset"},
          {"schema_version", 1},
          {"state", to_json(dataset.state())},
          {"chain", to_json(dataset.chain())},
          {"seed", dataset.seed()},
          {"n_per_phase", dataset.n_per_phase()},
          {"rng", "mt19937_64 seeded with splitmix64(seed + (phase_index + 1) * 0x9E3779B97F4A7C15)"},
          {"phases", dataset.phases()},
          {"samples_per_phase", counts}};
}

void write_dataset(const QuadratureDataset& dataset, const std::filesystem::path& csv_path,
                   const std::filesystem::path& json_path) {
  write_text(csv_path, dataset_csv(dataset));
  write_text(json_path, dataset_sidecar(dataset).dump(2) + "\n");
}

QuadratureDataset read_dataset(const std::filesystem::path& csv_path,
                               const std::filesystem::path& json_path) {
  const json meta = json::parse(read_text(json_path));
  const auto phases = meta.at("phases").get<std::vector<double>>();
  const auto counts = meta.at("samples_per_phase").get<std::vector<std::size_t>>();
  if (counts.size() != phases.size()) throw RangeError("dataset sidecar phase counts mismatch");

  const std::string text = read_text(csv_path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != "theta,q") throw RangeError("dataset CSV lacks theta,q header");
  std::vector<std::vector<double>> samples(phases.size());
  std::size_t row = 1;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    samples[k].reserve(counts[k]);
    for (std::size_t i = 0; i < counts[k]; ++i, ++row) {
      if (row >= lines.size()) throw RangeError("dataset CSV is truncated");
      const auto fields = split(lines[row], ',');
      if (fields.size() != 2) throw RangeError("dataset CSV row " + std::to_string(row) + " malformed");
      if (parse_double(fields[0]) != phases[k])
        throw RangeError("dataset CSV row " + std::to_string(row) + " has an unexpected phase");
      samples[k].push_back(parse_double(fields[1]));
    }
  }
  if (row != lines.size()) throw RangeError("dataset CSV has extra rows");
  return QuadratureDataset(state_from_json(meta.at("state")), chain_from_json(meta.at("chain")),
                           phases, std::move(samples), meta.at("seed").get<std::uint64_t>());
}

std::string wigner_csv(const WignerGrid& grid) {
  std::string out = "q\\p";
  for (double p : grid.p_axis) {
    out += ',';
    out += format_double(p);
  }
  out += '\n';
  for (std::size_t i = 0; i < grid.n_q(); ++i) {
    out += format_double(grid.q_axis[i]);
    for (std::size_t j = 0; j < grid.n_p(); ++j) {
      out += ',';
      out += format_double(grid.at(i, j));
    }
    out += '\n';
  }
  return out;
}

WignerGrid parse_wigner_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2) throw RangeError("Wigner CSV needs a header and at least one row");
  const auto header = split(lines[0], ',');
  if (header.front() != "q\\p") throw RangeError("Wigner CSV header must start with q\\p");
  WignerGrid w;
  for (std::size_t j = 1; j < header.size(); ++j) w.p_axis.push_back(parse_double(header[j]));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != header.size())
      throw RangeError("Wigner CSV row " + std::to_string(i) + " has the wrong width");
    w.q_axis.push_back(parse_double(fields[0]));
    for (std::size_t j = 1; j < fields.size(); ++j) w.values.push_back(parse_double(fields[j]));
  }
  return w;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace hdt::io
