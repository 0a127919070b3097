#include "clca/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "clca/errors.hpp"
#include "clca/rng.hpp"

namespace clca {

DialogueDataset make_dataset(std::vector<DialogueRecord> records,
                             std::size_t embed_dim) {
  DialogueDataset d;
  d.embed_dim = embed_dim;
  d.embeddings.reserve(records.size());
  for (const auto& r : records) d.embeddings.push_back(embed_dialogue(r, embed_dim));
  d.records = std::move(records);
  return d;
}

std::string serialize_dataset(const DialogueDataset& dataset) {
  std::string out;
  for (const auto& r : dataset.records) {
    out += canonical_dump(to_json(r));
    out += '\n';
  }
  return out;
}

DialogueDataset parse_dataset(const std::string& text, std::size_t embed_dim) {
  std::vector<DialogueRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), line_no);
    }
  }
  return make_dataset(std::move(records), embed_dim);
}

void save_dataset(const DialogueDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_dataset(dataset);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

DialogueDataset load_dataset(const std::string& path, std::size_t embed_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return parse_dataset(buffer.str(), embed_dim);
}

DialogueDataset generate_dataset(
    const CompanyProfile& profile, const TextProviderSpec& provider,
    std::size_t count, std::uint64_t seed, std::size_t embed_dim,
    const std::function<void(std::size_t)>& on_record) {
  std::vector<DialogueRecord> records;
  records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Scenario scenario =
        generate_scenario(profile, provider, derive_seed(seed, 2 * i));
    DialogueRecord r =
        generate_dialogue(profile, scenario, provider, derive_seed(seed, 2 * i + 1));
    char suffix[24];
    std::snprintf(suffix, sizeof suffix, "-%06zu", i);
    r.record_id = profile.company_id + suffix;
    records.push_back(std::move(r));
    if (on_record) on_record(i + 1);
  }
  return make_dataset(std::move(records), embed_dim);
}

}  // namespace clca
