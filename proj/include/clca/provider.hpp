#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clca/dialogue.hpp"

namespace clca {

enum class ProviderKind { kBuiltinTemplate, kHttpChat };

// Where text comes from: the seeded template engine or an OpenAI-style
// chat-completions endpoint.
struct TextProviderSpec {
  ProviderKind kind = ProviderKind::kBuiltinTemplate;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  std::uint64_t seed = 0;
  double p_success = 0.5;
  double timeout_seconds = 30.0;

  static TextProviderSpec builtin(std::uint64_t seed) {
    TextProviderSpec spec;
    spec.seed = seed;
    return spec;
  }
  static TextProviderSpec http(std::string endpoint,
                               std::optional<std::string> model = {}) {
    TextProviderSpec spec;
    spec.kind = ProviderKind::kHttpChat;
    spec.endpoint = std::move(endpoint);
    spec.model_name = std::move(model);
    return spec;
  }
};

struct ChatMessage {
  std::string role;
  std::string content;
};

// POST {endpoint}/chat/completions; returns choices[0].message.content.
// Endpoint falls back to $CLCA_LLM_BASE_URL, bearer token from
// $CLCA_LLM_API_KEY. Throws ProviderUnavailable on transport or HTTP
// failures and MalformedProviderOutput when the reply has no content.
std::string chat_completion(const TextProviderSpec& provider,
                            const std::vector<ChatMessage>& messages,
                            double temperature);

// Pulls the outermost {...} object out of free-form model output.
Json extract_json_object(const std::string& text);

Scenario generate_scenario(const CompanyProfile& profile,
                           const TextProviderSpec& provider,
                           std::uint64_t seed);

DialogueRecord generate_dialogue(const CompanyProfile& profile,
                                 const Scenario& scenario,
                                 const TextProviderSpec& provider,
                                 std::uint64_t seed);

// Parses a provider reply into a record (record_id/profile_ref/scenario are
// supplied by the caller). Exposed for tests of the http path.
DialogueRecord parse_dialogue_reply(const std::string& raw,
                                    const CompanyProfile& profile,
                                    const Scenario& scenario,
                                    std::string record_id);
Scenario parse_scenario_reply(const std::string& raw);

// Replaces {name}, {product_category}, {target_audience}, {sales_goals},
// {keyword}, {concern}, {motivation}, {persona} placeholders.
std::string fill_template(std::string_view text, const CompanyProfile& profile,
                          const Scenario* scenario, std::string_view keyword);

}  // namespace clca
