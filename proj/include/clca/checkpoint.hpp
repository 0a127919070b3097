#pragma once

#include <string>

#include "clca/a2c.hpp"
#include "clca/json_util.hpp"

namespace clca {

inline constexpr char kCheckpointFormat[] = "clca-ckpt";
inline constexpr int kCheckpointVersion = 1;

Json checkpoint_to_json(const A2CModel& model);
// Validates format tag, version and every tensor shape; throws FormatError.
A2CModel checkpoint_from_json(const Json& json);

std::string serialize_checkpoint(const A2CModel& model);
A2CModel parse_checkpoint(const std::string& text);

void save_checkpoint(const A2CModel& model, const std::string& path);
// IoError if unreadable, FormatError if invalid.
A2CModel load_checkpoint(const std::string& path);

// Training-config file: {"a2c_config": {...}, "env_config": {...}}, both
// optional and partial.
struct TrainingConfig {
  A2CConfig a2c;
  EnvConfig env;
};
TrainingConfig training_config_from_json(const Json& json);
TrainingConfig load_training_config(const std::string& path);

}  // namespace clca
