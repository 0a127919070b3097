#include "clca/json_util.hpp"

#include <algorithm>

#include "clca/errors.hpp"

namespace clca {

const Json& require_field(const Json& object, std::string_view key) {
  if (!object.is_object()) throw SchemaError("expected a JSON object");
  auto it = object.find(key);
  if (it == object.end()) {
    throw SchemaError("missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const Json& object, std::string_view key,
                           bool allow_empty) {
  const Json& v = require_field(object, key);
  if (!v.is_string()) {
    throw SchemaError("field '" + std::string(key) + "' must be a string");
  }
  std::string s = v.get<std::string>();
  if (!allow_empty && s.empty()) {
    throw SchemaError("field '" + std::string(key) + "' must be non-empty");
  }
  return s;
}

double require_number(const Json& object, std::string_view key) {
  const Json& v = require_field(object, key);
  if (!v.is_number()) {
    throw SchemaError("field '" + std::string(key) + "' must be a number");
  }
  return v.get<double>();
}

std::int64_t require_int(const Json& object, std::string_view key) {
  const Json& v = require_field(object, key);
  if (!v.is_number_integer()) {
    throw SchemaError("field '" + std::string(key) + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t require_uint(const Json& object, std::string_view key) {
  const Json& v = require_field(object, key);
  if (!v.is_number_unsigned() &&
      !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw SchemaError("field '" + std::string(key) +
                      "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void reject_unknown_fields(const Json& object,
                           std::initializer_list<std::string_view> allowed,
                           std::string_view context) {
  if (!object.is_object()) {
    throw SchemaError(std::string(context) + " must be a JSON object");
  }
  for (const auto& [key, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError("unknown field '" + key + "' in " +
                        std::string(context));
    }
  }
}

}  // namespace clca
