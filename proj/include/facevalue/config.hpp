#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "facevalue/actor.hpp"
#include "facevalue/classify.hpp"
#include "facevalue/dataset.hpp"
#include "facevalue/simulator.hpp"
#include "facevalue/train.hpp"

namespace facevalue {

/// Everything a pipeline run depends on. Serialized as one JSON document.
struct PipelineConfig {
  std::size_t episodes = 100;
  Money delta = kDefaultDelta;
  SimConfig simulation;
  ActorConfig actor;
  TrainConfig training;
  PoolingMode pooling = PoolingMode::kAverage;
  Normalization normalize = Normalization::kL1;
  SplitWeights splits;

  bool operator==(const PipelineConfig&) const = default;
};

nlohmann::json to_json(const PipelineConfig& config);

/// Missing keys keep their defaults; unknown keys (other than ones starting
/// with '_') and ill-typed values throw ConfigError naming the field. The
/// result is validated.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// Reads a JSON config file. Throws ConfigError or IoError.
PipelineConfig load_config(const std::filesystem::path& path);

/// Reads a whole file into memory. Throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes atomically via a temporary sibling file. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace facevalue
