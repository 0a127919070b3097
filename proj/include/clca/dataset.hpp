#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "clca/dialogue.hpp"
#include "clca/embedding.hpp"
#include "clca/provider.hpp"

namespace clca {

struct DialogueDataset {
  std::vector<DialogueRecord> records;
  std::vector<Embedding> embeddings;
  std::size_t embed_dim = kDefaultEmbedDim;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  friend bool operator==(const DialogueDataset&, const DialogueDataset&) = default;
};

DialogueDataset make_dataset(std::vector<DialogueRecord> records,
                             std::size_t embed_dim = kDefaultEmbedDim);

// One canonical-JSON record per line. Embeddings are not written.
std::string serialize_dataset(const DialogueDataset& dataset);
DialogueDataset parse_dataset(const std::string& text,
                              std::size_t embed_dim = kDefaultEmbedDim);

void save_dataset(const DialogueDataset& dataset, const std::string& path);
DialogueDataset load_dataset(const std::string& path,
                             std::size_t embed_dim = kDefaultEmbedDim);

// Scenario + dialogue generation repeated `count` times with per-record
// seeds derived from `seed`. `on_record` (optional) sees progress.
DialogueDataset generate_dataset(
    const CompanyProfile& profile, const TextProviderSpec& provider,
    std::size_t count, std::uint64_t seed,
    std::size_t embed_dim = kDefaultEmbedDim,
    const std::function<void(std::size_t)>& on_record = {});

}  // namespace clca
