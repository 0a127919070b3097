#include "clca/provider.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "clca/builtin_data.hpp"
#include "clca/errors.hpp"
#include "clca/rng.hpp"

namespace clca {
namespace {

const Json& template_tables() {
  static const Json tables = Json::parse(builtin_data::templates_json());
  return tables;
}

std::string pick(Rng& rng, const Json& list) {
  return list.at(rng.below(list.size())).get<std::string>();
}

const Json& pick_object(Rng& rng, const Json& list) {
  return list.at(rng.below(list.size()));
}

std::string pick_keyword(Rng& rng, const CompanyProfile& profile) {
  if (profile.product_keywords.empty()) return profile.product_category;
  return profile.product_keywords[rng.below(profile.product_keywords.size())];
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

Scenario builtin_scenario(const CompanyProfile& profile, std::uint64_t seed) {
  const Json& t = template_tables().at("scenario");
  Rng rng(seed);
  Scenario s;
  s.persona = pick(rng, t.at("personas"));
  s.primary_concern = pick(rng, t.at("concerns"));
  s.technical_understanding = parse_tech_level(pick(rng, t.at("technical_levels")));
  s.motivation = fill_template(pick(rng, t.at("motivations")), profile, nullptr, "");
  return s;
}

DialogueRecord builtin_dialogue(const CompanyProfile& profile,
                                const Scenario& scenario, double p_success,
                                std::uint64_t seed) {
  const Json& t = template_tables().at("dialogue");
  Rng rng(seed);

  DialogueRecord r;
  r.profile_ref = profile.company_id;
  r.scenario = scenario;
  // Outcome is the first draw of the stream.
  r.outcome = rng.bernoulli(p_success) ? Outcome::kSuccess : Outcome::kFailure;
  const std::size_t turns = 4 + rng.below(7);
  const std::string keyword = pick_keyword(rng, profile);
  const bool success = r.outcome == Outcome::kSuccess;
  const std::size_t final_customer = turns % 2 == 1 ? turns - 1 : turns - 2;

  auto fill = [&](const std::string& text) {
    return fill_template(text, profile, &scenario, keyword);
  };
  auto add = [&](Speaker who, std::string message) {
    r.conversation.push_back({who, std::move(message)});
  };

  r.key_points_discussed.push_back(scenario.primary_concern);
  std::string pending_objection;
  bool last_was_question = false;

  for (std::size_t i = 0; i < turns; ++i) {
    if (i % 2 == 0) {
      if (i == 0) {
        add(Speaker::kCustomer, fill(pick(rng, t.at("customer_openings"))));
      } else if (i == final_customer) {
        add(Speaker::kCustomer,
            pick(rng, t.at(success ? "customer_accept" : "customer_decline")));
      } else if (rng.bernoulli(0.5)) {
        const Json& q = pick_object(rng, t.at("customer_questions"));
        add(Speaker::kCustomer, fill(q.at("text").get<std::string>()));
        r.key_points_discussed.push_back(fill(q.at("point").get<std::string>()));
        last_was_question = true;
      } else {
        const Json& o = pick_object(rng, t.at("customer_objections"));
        add(Speaker::kCustomer, o.at("text").get<std::string>());
        pending_objection = o.at("objection").get<std::string>();
        last_was_question = false;
      }
      continue;
    }

    std::string message;
    if (i == 1) {
      const Json& v = pick_object(rng, t.at("rep_value"));
      message = fill(pick(rng, t.at("rep_greetings"))) + " " +
                fill(v.at("text").get<std::string>());
      r.value_propositions.push_back(v.at("value").get<std::string>());
    } else if (i > final_customer) {
      message = t.at("rep_followups").at(success ? 0 : 1).get<std::string>();
    } else if (!pending_objection.empty()) {
      for (const auto& handler : t.at("rep_objection")) {
        if (handler.at("objection") == pending_objection) {
          message = handler.at("text").get<std::string>();
        }
      }
      r.objections_handled.push_back(pending_objection);
      pending_objection.clear();
    } else if (last_was_question &&
               scenario.technical_understanding != TechLevel::kLow) {
      const Json& d = pick_object(rng, t.at("rep_technical"));
      message = fill(d.at("text").get<std::string>());
      r.key_points_discussed.push_back(d.at("point").get<std::string>());
    } else {
      const Json& v = pick_object(rng, t.at("rep_value"));
      message = fill(v.at("text").get<std::string>());
      r.value_propositions.push_back(v.at("value").get<std::string>());
    }
    if (i + 1 == final_customer) {
      message += " " + pick(rng, t.at("rep_closing"));
    }
    add(Speaker::kRepresentative, std::move(message));
  }
  return r;
}

std::string scenario_prompt(const CompanyProfile& profile) {
  return "Company profile:\n" + canonical_dump(to_json(profile)) +
         "\n\nInvent one realistic prospective customer for this company. "
         "Reply with a single JSON object with exactly these string fields: "
         "\"persona\", \"primary_concern\", \"technical_understanding\" (one of "
         "\"low\", \"medium\", \"high\"), \"motivation\". No other text.";
}

std::string dialogue_prompt(const CompanyProfile& profile,
                            const Scenario& scenario) {
  return "Company profile:\n" + canonical_dump(to_json(profile)) +
         "\n\nCustomer scenario:\n" + canonical_dump(to_json(scenario)) +
         "\n\nWrite a complete sales conversation between this customer and a "
         "sales representative of the company. Reply with a single JSON object "
         "with fields: \"conversation\" (array of {\"speaker\": \"customer\" or "
         "\"representative\", \"message\": string}, starting with the customer "
         "and strictly alternating), \"outcome\" (\"success\" or \"failure\"), "
         "\"key_points_discussed\", \"value_propositions\", "
         "\"objections_handled\" (arrays of strings). No other text.";
}

constexpr char kSystemPrompt[] =
    "You generate synthetic B2B sales data. Always answer with valid JSON only.";

std::vector<std::string> optional_string_list(const Json& json,
                                              std::string_view key) {
  std::vector<std::string> out;
  auto it = json.find(key);
  if (it == json.end()) return out;
  if (!it->is_array()) {
    throw SchemaError("field '" + std::string(key) + "' must be an array");
  }
  for (const auto& item : *it) {
    if (!item.is_string()) {
      throw SchemaError("field '" + std::string(key) + "' must contain strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string fill_template(std::string_view text, const CompanyProfile& profile,
                          const Scenario* scenario, std::string_view keyword) {
  std::string out(text);
  replace_all(out, "{name}", profile.name);
  replace_all(out, "{product_category}", profile.product_category);
  replace_all(out, "{target_audience}", profile.target_audience);
  replace_all(out, "{sales_goals}", profile.sales_goals);
  replace_all(out, "{keyword}",
              keyword.empty() ? std::string_view(profile.product_category)
                              : keyword);
  if (scenario != nullptr) {
    replace_all(out, "{concern}", scenario->primary_concern);
    replace_all(out, "{motivation}", scenario->motivation);
    replace_all(out, "{persona}", scenario->persona);
  }
  return out;
}

std::string chat_completion(const TextProviderSpec& provider,
                            const std::vector<ChatMessage>& messages,
                            double temperature) {
  std::string endpoint = provider.endpoint.value_or(env_or_empty("CLCA_LLM_BASE_URL"));
  if (endpoint.empty()) {
    throw ProviderUnavailable(
        "no endpoint configured for the http provider (set CLCA_LLM_BASE_URL)");
  }
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, kUrl)) {
    throw ProviderUnavailable("malformed provider endpoint '" + endpoint + "'");
  }
  std::string base_path = m[2].matched ? m[2].str() : std::string();
  while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();

  Json body;
  body["model"] = provider.model_name.value_or("default");
  body["temperature"] = temperature;
  body["messages"] = Json::array();
  for (const auto& msg : messages) {
    body["messages"].push_back({{"role", msg.role}, {"content", msg.content}});
  }

  httplib::Client client(m[1].str());
  const auto secs = static_cast<time_t>(provider.timeout_seconds);
  const auto usecs = static_cast<time_t>(
      (provider.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (auto key = env_or_empty("CLCA_LLM_API_KEY"); !key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }
  auto res = client.Post(base_path + "/chat/completions", headers,
                         canonical_dump(body), "application/json");
  if (!res) {
    throw ProviderUnavailable("provider request failed: " +
                              httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderUnavailable("provider returned HTTP " +
                              std::to_string(res->status));
  }
  try {
    const Json reply = Json::parse(res->body);
    const Json& content = reply.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw std::runtime_error("content is not a string");
    return content.get<std::string>();
  } catch (const std::exception& e) {
    throw MalformedProviderOutput(
        std::string("provider reply has no choices[0].message.content: ") +
            e.what(),
        res->body);
  }
}

Json extract_json_object(const std::string& text) {
  const auto first = text.find('{');
  const auto last = text.rfind('}');
  if (first == std::string::npos || last == std::string::npos || last < first) {
    throw MalformedProviderOutput("provider output contains no JSON object", text);
  }
  try {
    Json json = Json::parse(text.substr(first, last - first + 1));
    if (!json.is_object()) throw std::runtime_error("not an object");
    return json;
  } catch (const std::exception& e) {
    throw MalformedProviderOutput(
        std::string("provider output is not valid JSON: ") + e.what(), text);
  }
}

Scenario parse_scenario_reply(const std::string& raw) {
  const Json json = extract_json_object(raw);
  try {
    return scenario_from_json(json);
  } catch (const SchemaError& e) {
    throw MalformedProviderOutput(std::string("scenario: ") + e.what(), raw);
  }
}

DialogueRecord parse_dialogue_reply(const std::string& raw,
                                    const CompanyProfile& profile,
                                    const Scenario& scenario,
                                    std::string record_id) {
  const Json json = extract_json_object(raw);
  try {
    DialogueRecord r;
    r.record_id = std::move(record_id);
    r.profile_ref = profile.company_id;
    r.scenario = scenario;
    r.conversation = conversation_from_json(require_field(json, "conversation"));
    r.outcome = parse_outcome(require_string(json, "outcome"));
    r.key_points_discussed = optional_string_list(json, "key_points_discussed");
    r.value_propositions = optional_string_list(json, "value_propositions");
    r.objections_handled = optional_string_list(json, "objections_handled");
    validate(r);
    return r;
  } catch (const SchemaError& e) {
    throw MalformedProviderOutput(std::string("dialogue: ") + e.what(), raw);
  }
}

Scenario generate_scenario(const CompanyProfile& profile,
                           const TextProviderSpec& provider,
                           std::uint64_t seed) {
  validate(profile);
  if (provider.kind == ProviderKind::kBuiltinTemplate) {
    return builtin_scenario(profile, seed);
  }
  const std::string raw = chat_completion(
      provider, {{"system", kSystemPrompt}, {"user", scenario_prompt(profile)}},
      0.9);
  return parse_scenario_reply(raw);
}

DialogueRecord generate_dialogue(const CompanyProfile& profile,
                                 const Scenario& scenario,
                                 const TextProviderSpec& provider,
                                 std::uint64_t seed) {
  validate(profile);
  validate(scenario);
  const std::string record_id =
      profile.company_id + "-" + std::to_string(seed);
  if (provider.kind == ProviderKind::kBuiltinTemplate) {
    DialogueRecord r = builtin_dialogue(profile, scenario, provider.p_success, seed);
    r.record_id = record_id;
    validate(r);
    return r;
  }
  const std::string raw = chat_completion(
      provider,
      {{"system", kSystemPrompt}, {"user", dialogue_prompt(profile, scenario)}},
      0.9);
  return parse_dialogue_reply(raw, profile, scenario, record_id);
}

}  // namespace clca
