#pragma once

#include <json.hpp>

#include "rarecast/data.hpp"
#include "rarecast/experiment.hpp"
#include "rarecast/model.hpp"
#include "rarecast/optim.hpp"

namespace rarecast::config {

/// JSON <-> config structs for the CLI and checkpoint metadata. Readers
/// start from defaults, override the keys present, and reject unknown keys
/// (typos must not silently fall back to defaults). Writers emit every
/// field so a snapshot reproduces the run without reference to defaults.

nlohmann::json to_json(const data::ObservationSpec& spec);
data::ObservationSpec observation_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const data::SyntheticConfig& cfg);
data::SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const data::CsvCohortConfig& cfg);
data::CsvCohortConfig csv_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const model::ModelConfig& cfg);
model::ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const optim::OptimConfig& cfg);
optim::OptimConfig optim_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const experiment::TrainConfig& cfg);
experiment::TrainConfig train_config_from_json(const nlohmann::json& j);

/// Parse a JSON file with filename-tagged errors.
nlohmann::json load_json_file(const std::string& path);

}  // namespace rarecast::config
