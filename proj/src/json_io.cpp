#include "specga/json_io.hpp"

#include "specga/errors.hpp"

namespace specga {

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["steps"] = cfg.steps;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["optimizer"] = optimizer_to_string(cfg.optimizer);
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  try {
    if (j.contains("steps")) cfg.steps = j["steps"].get<std::int64_t>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("optimizer"))
      cfg.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (cfg.steps < 1 || cfg.batch_size < 1 || cfg.learning_rate <= 0.0)
    throw ConfigError("train config: steps/batch_size must be >= 1, learning_rate > 0");
  return cfg;
}

}  // namespace specga
