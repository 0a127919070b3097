#include "clca/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "clca/base64.hpp"
#include "clca/errors.hpp"

namespace clca {
namespace {

Json tensor_to_json(const Tensor& t) {
  return Json{{"shape", t.shape}, {"data_b64", base64::encode_doubles(t.data)}};
}

Json tensors_to_json(const MlpParams& p) {
  Json out = Json::object();
  p.for_each([&](std::string_view name, const Tensor& t) {
    out[std::string(name)] = tensor_to_json(t);
  });
  return out;
}

// Fills `into` (already shaped) from a {name: tensor} object.
void tensors_from_json(const Json& json, MlpParams& into, std::string_view what) {
  if (!json.is_object()) throw FormatError(std::string(what) + " must be an object");
  std::size_t seen = 0;
  into.for_each([&](std::string_view name, Tensor& t) {
    auto it = json.find(name);
    if (it == json.end()) {
      throw FormatError(std::string(what) + " is missing tensor '" +
                        std::string(name) + "'");
    }
    ++seen;
    const Json& entry = *it;
    if (!entry.is_object() || !entry.contains("shape") ||
        !entry.contains("data_b64") || !entry["data_b64"].is_string()) {
      throw FormatError("tensor '" + std::string(name) + "' is malformed");
    }
    std::vector<std::size_t> shape;
    try {
      shape = entry["shape"].get<std::vector<std::size_t>>();
    } catch (const Json::exception&) {
      throw FormatError("tensor '" + std::string(name) + "' has an invalid shape");
    }
    if (shape != t.shape) {
      throw FormatError("tensor '" + std::string(name) +
                        "' has shape " + Json(shape).dump() + ", expected " +
                        Json(t.shape).dump());
    }
    std::vector<double> data = base64::decode_doubles(entry["data_b64"].get<std::string>());
    if (data.size() != t.size()) {
      throw FormatError("tensor '" + std::string(name) + "' has " +
                        std::to_string(data.size()) + " values, shape needs " +
                        std::to_string(t.size()));
    }
    for (double v : data) {
      if (!std::isfinite(v)) {
        throw FormatError("tensor '" + std::string(name) + "' has non-finite values");
      }
    }
    t.data = std::move(data);
  });
  if (json.size() != seen) {
    throw FormatError(std::string(what) + " contains unknown tensors");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Json checkpoint_to_json(const A2CModel& model) {
  return Json{{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"a2c_config", to_json(model.config)},
              {"env_config", to_json(model.env_config)},
              {"embed_dim", model.embed_dim},
              {"adam",
               {{"step", model.adam.step},
                {"m", tensors_to_json(model.adam.m)},
                {"v", tensors_to_json(model.adam.v)}}},
              {"tensors", tensors_to_json(model.params)}};
}

A2CModel checkpoint_from_json(const Json& json) {
  if (!json.is_object()) throw FormatError("checkpoint must be a JSON object");
  if (!json.contains("format") || json["format"] != kCheckpointFormat) {
    throw FormatError("not a clca-ckpt checkpoint (bad format tag)");
  }
  if (!json.contains("version") || !json["version"].is_number_integer()) {
    throw FormatError("checkpoint version missing");
  }
  if (json["version"].get<std::int64_t>() != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + json["version"].dump() +
                      " (supported: " + std::to_string(kCheckpointVersion) + ")");
  }
  for (const auto& [key, _] : json.items()) {
    if (key != "format" && key != "version" && key != "a2c_config" &&
        key != "env_config" && key != "embed_dim" && key != "adam" &&
        key != "tensors") {
      throw FormatError("unknown checkpoint field '" + key + "'");
    }
  }
  A2CModel model;
  try {
    model.config = a2c_config_from_json(require_field(json, "a2c_config"));
    model.env_config = env_config_from_json(require_field(json, "env_config"));
    model.embed_dim = require_uint(json, "embed_dim");
  } catch (const SchemaError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  if (model.embed_dim < 1) throw FormatError("embed_dim must be >= 1");
  const std::size_t obs_dim = model.embed_dim + kActionDim;
  model.params = MlpParams::zeros(obs_dim, model.config.hidden_size);
  model.adam = AdamState::for_params(model.params);
  if (!json.contains("tensors")) throw FormatError("checkpoint has no tensors");
  tensors_from_json(json["tensors"], model.params, "tensors");

  if (!json.contains("adam") || !json["adam"].is_object()) {
    throw FormatError("checkpoint has no adam state");
  }
  const Json& adam = json["adam"];
  if (!adam.contains("step") || !adam["step"].is_number_unsigned()) {
    throw FormatError("adam.step must be a non-negative integer");
  }
  model.adam.step = adam["step"].get<std::uint64_t>();
  if (!adam.contains("m") || !adam.contains("v")) {
    throw FormatError("adam state needs m and v");
  }
  tensors_from_json(adam["m"], model.adam.m, "adam.m");
  tensors_from_json(adam["v"], model.adam.v, "adam.v");
  return model;
}

std::string serialize_checkpoint(const A2CModel& model) {
  return canonical_dump(checkpoint_to_json(model));
}

A2CModel parse_checkpoint(const std::string& text) {
  Json json;
  try {
    json = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(json);
}

void save_checkpoint(const A2CModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_checkpoint(model);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

A2CModel load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file(path));
}

TrainingConfig training_config_from_json(const Json& json) {
  reject_unknown_fields(json, {"a2c_config", "env_config"}, "training config");
  TrainingConfig c;
  if (json.contains("a2c_config")) c.a2c = a2c_config_from_json(json["a2c_config"]);
  if (json.contains("env_config")) c.env = env_config_from_json(json["env_config"]);
  return c;
}

TrainingConfig load_training_config(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return training_config_from_json(Json::parse(text));
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("training config is not valid JSON: ") + e.what());
  }
}

}  // namespace clca
