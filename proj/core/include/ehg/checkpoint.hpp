#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ehg/network.hpp"
#include "ehg/pipeline.hpp"

namespace ehg {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  PipelineConfig pipeline;
};

nlohmann::ordered_json to_json(const NetworkConfig& cfg);
nlohmann::ordered_json to_json(const PipelineConfig& cfg);
NetworkConfig network_config_from_json(const nlohmann::json& j);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// {"format": "ehg-checkpoint", "version", "network", "pipeline", "blocks", "params"}.
/// Parameters are written with round-trip precision.
nlohmann::ordered_json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ehg
