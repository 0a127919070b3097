#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace clca {

using Json = nlohmann::json;

// Sorted keys (std::map-backed objects), no insignificant whitespace,
// shortest round-trip doubles, UTF-8 passed through.
inline std::string canonical_dump(const Json& value) { return value.dump(); }

// Field accessors that raise `SchemaError` with the field name on mismatch.
const Json& require_field(const Json& object, std::string_view key);
std::string require_string(const Json& object, std::string_view key,
                           bool allow_empty = false);
double require_number(const Json& object, std::string_view key);
std::int64_t require_int(const Json& object, std::string_view key);
std::uint64_t require_uint(const Json& object, std::string_view key);
void reject_unknown_fields(const Json& object,
                           std::initializer_list<std::string_view> allowed,
                           std::string_view context);

}  // namespace clca
