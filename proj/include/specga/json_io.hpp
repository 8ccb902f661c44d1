#pragma once

#include "json.hpp"
#include "specga/mlp.hpp"

namespace specga {

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace specga
