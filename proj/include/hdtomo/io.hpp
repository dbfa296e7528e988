#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hdtomo/channels.hpp"
#include "hdtomo/homodyne.hpp"
#include "hdtomo/metrics.hpp"
#include "hdtomo/tomography.hpp"

namespace hdt::io {

/// printf("%.17g"): round-trips every finite double exactly.
std::string format_double(double v);

nlohmann::json to_json(const StateSpec& state);
nlohmann::json to_json(const DetectionChain& chain);
nlohmann::json to_json(const EffectiveLoss& loss);
nlohmann::json to_json(const ReconstructionConfig& config);
nlohmann::json to_json(const QualityReport& report);

StateSpec state_from_json(const nlohmann::json& j);
DetectionChain chain_from_json(const nlohmann::json& j);

/// CSV with header `theta,q`, one row per sample in phase order, plus a JSON
/// sidecar holding state, chain, seed, n_per_phase and the phase list.
void write_dataset(const QuadratureDataset& dataset, const std::filesystem::path& csv_path,
                   const std::filesystem::path& json_path);
std::string dataset_csv(const QuadratureDataset& dataset);
nlohmann::json dataset_sidecar(const QuadratureDataset& dataset);
QuadratureDataset read_dataset(const std::filesystem::path& csv_path,
                               const std::filesystem::path& json_path);

/// CSV matrix: first row `q\p,<p_0>,...`, then one row per q value
/// `<q_i>,W(q_i,p_0),...`.
std::string wigner_csv(const WignerGrid& grid);
WignerGrid parse_wigner_csv(std::string_view text);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace hdt::io
