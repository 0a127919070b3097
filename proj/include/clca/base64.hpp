#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clca::base64 {

std::string encode(std::span<const std::uint8_t> bytes);
// Strict: rejects bad characters, bad padding and lengths not a multiple of
// four. Throws FormatError.
std::vector<std::uint8_t> decode(std::string_view text);

// Little-endian IEEE-754 binary64 packing.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

}  // namespace clca::base64
