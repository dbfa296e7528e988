// Command-line front end for the scenario runner.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdtomo/errors.hpp"
#include "hdtomo/io.hpp"
#include "hdtomo/scenario.hpp"

namespace {

using nlohmann::json;
namespace sc = hdt::scenario;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// A path that exists is read as a config file; anything else must be a preset id.
json load_document(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    try {
      return json::parse(hdt::io::read_text(arg));
    } catch (const json::parse_error& e) {
      throw hdt::ConfigError("", std::string("invalid JSON: ") + e.what());
    }
  }
  if (const auto* preset = sc::find_preset(arg)) return preset->config;
  throw hdt::ConfigError("", "'" + arg + "' is neither a readable config file nor a preset id");
}

int report(const char* kind, const std::exception& e, int code) {
  std::fprintf(stderr, "hdtomo: %s: %s\n", kind, e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homodyne tomography through lossy and amplified detection chains"};
  app.require_subcommand(1);

  std::string target;
  std::optional<std::string> out_dir;
  bool sampled = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  auto* run = app.add_subcommand("run", "Run a config file or a built-in preset");
  run->add_option("config", target, "Config JSON path or preset id")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--sampled", sampled, "Use Monte-Carlo sampling instead of analytic characteristic functions");
  run->add_option("--seed", seed, "RNG seed (overrides the config)");
  run->add_option("--threads", threads, "OpenMP worker count")->check(CLI::PositiveNumber);

  app.add_subcommand("list-presets", "Print the built-in scenario presets");

  std::string validate_target;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", validate_target, "Config JSON path or preset id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand("list-presets")) {
      std::cout << sc::preset_table();
      return kExitOk;
    }
    if (app.got_subcommand("validate")) {
      const auto cfg = sc::parse_config(load_document(validate_target));
      std::cout << "ok: " << cfg.scenario_id << " (" << cfg.cases.size() << " case(s))\n";
      return kExitOk;
    }

    json doc = load_document(target);
    if (sampled) doc["sampling"] = "monte_carlo";
    if (seed) doc["seed"] = *seed;
    if (threads) omp_set_num_threads(*threads);
    const auto cfg = sc::parse_config(doc);
    const auto dir = sc::resolve_output_dir(
        cfg, out_dir ? std::optional<std::filesystem::path>(*out_dir) : std::nullopt);
    const auto result = sc::run_scenario(cfg, dir);
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::cout << result.manifest.string() << "\n";
    return kExitOk;
  } catch (const hdt::ConfigError& e) {
    return report("config error", e, kExitConfig);
  } catch (const hdt::RangeError& e) {
    return report("config error", e, kExitConfig);
  } catch (const hdt::NumericalError& e) {
    return report("numerical failure", e, kExitNumerical);
  }
}
