#include "clca/embedding.hpp"

#include <cmath>

#include "clca/errors.hpp"

namespace clca {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_ascii_alnum(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                             : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Embedding embed_text(std::string_view text, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be >= 1");
  Embedding e{std::vector<double>(dim, 0.0)};
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(token);
    e.values[h % dim] += (h >> 63) == 0 ? 1.0 : -1.0;
  }
  double sq = 0.0;
  for (double v : e.values) sq += v * v;
  if (sq > 0.0) {
    const double norm = std::sqrt(sq);
    for (double& v : e.values) v /= norm;
  }
  return e;
}

Embedding embed_dialogue(const DialogueRecord& record, std::size_t dim) {
  return embed_text(transcript_text(record.conversation), dim);
}

}  // namespace clca
