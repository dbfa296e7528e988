#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hdtomo/channels.hpp"
#include "hdtomo/states.hpp"
#include "hdtomo/tomography.hpp"

namespace hdt::scenario {

enum class OutputKind { Grids, Curve, Surface };
enum class Metric { None, Fidelity, Depth };
enum class SamplingMode { Analytic, MonteCarlo };

/// One layer of flat state/chain keys. Layers stack: config top level, then
/// a case, then a sweep point. Setting any gain key (r_raw, gain_db, r_eff)
/// inserts the amplifier; `amplifier: false` removes it.
struct ParamLayer {
  enum class Gain { None, RRaw, GainDb, REff };

  std::optional<std::string> state;
  std::optional<double> r1;
  std::optional<double> eta_i;
  std::optional<double> eta_d;
  std::optional<double> crystal_k;
  std::optional<double> crystal_d;
  Gain gain = Gain::None;
  double gain_value = 0.0;
  std::optional<bool> amplifier;

  void apply(const ParamLayer& over);
  /// Sets one sweepable parameter by name.
  void set(std::string_view param, double value);
};

struct ResolvedCase {
  StateSpec state;
  DetectionChain chain;
};

/// Throws ConfigError naming `where` when the layer cannot form a valid
/// state and chain.
ResolvedCase resolve(const ParamLayer& layer, const std::string& where);

struct SweepAxis {
  std::string param;
  std::vector<double> values;
};

struct CaseSpec {
  std::string label;
  ParamLayer params;  // top level already merged in
};

struct ReconstructionOverrides {
  std::optional<double> xi_max;
  std::optional<std::size_t> n_xi;
  std::optional<std::size_t> n_theta;
  std::optional<double> grid_half_width;
  std::optional<std::size_t> grid_n;
  std::optional<double> apodization_alpha;
  std::optional<double> rescale_gain;
  std::optional<double> frame_aspect;

  ReconstructionConfig apply(ReconstructionConfig base) const;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string scenario_id;
  OutputKind output = OutputKind::Grids;
  Metric metric = Metric::None;
  std::vector<CaseSpec> cases;
  std::vector<SweepAxis> sweep;
  SamplingMode sampling = SamplingMode::Analytic;
  std::uint64_t seed = 42;
  std::size_t n_per_phase = 100000;
  bool write_datasets = false;
  ReconstructionOverrides reconstruction;
  std::optional<std::string> output_dir;
  /// The parsed document, echoed into the manifest.
  nlohmann::json source;
};

/// Parses and fully validates a config document (every case and sweep
/// point is resolved). Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

struct Preset {
  std::string id;
  std::string description;
  nlohmann::json config;
};

const std::vector<Preset>& presets();
const Preset* find_preset(std::string_view id);
/// Fixed-width text table of the built-in presets.
std::string preset_table();

struct RunResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  std::filesystem::path manifest;
};

/// Executes the scenario into out_dir. Data files depend only on the config;
/// the manifest (written last) lists them with SHA-256 digests and carries
/// the only timestamp. Throws ConfigError or NumericalError.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Output directory: explicit > config output_dir > $HDTOMO_OUTPUT_DIR/<id> >
/// ./hdtomo-out/<id>.
std::filesystem::path resolve_output_dir(const ScenarioConfig& config,
                                         const std::optional<std::filesystem::path>& cli_out);

}  // namespace hdt::scenario
