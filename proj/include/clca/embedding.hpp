#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clca/dialogue.hpp"

namespace clca {

inline constexpr std::size_t kDefaultEmbedDim = 64;

struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Lowercased ASCII alphanumeric runs; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Signed feature hashing of tokens into `dim` buckets, then L2
// normalization. Empty input gives the zero vector.
Embedding embed_text(std::string_view text, std::size_t dim);

Embedding embed_dialogue(const DialogueRecord& record, std::size_t dim);

}  // namespace clca
