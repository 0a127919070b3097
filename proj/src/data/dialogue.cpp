#include "clca/dialogue.hpp"

#include <fstream>
#include <sstream>

#include "clca/errors.hpp"

namespace clca {

std::string_view to_string(TechLevel level) {
  switch (level) {
    case TechLevel::kLow: return "low";
    case TechLevel::kMedium: return "medium";
    case TechLevel::kHigh: return "high";
  }
  return "medium";
}

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::kCustomer ? "customer" : "representative";
}

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::kSuccess ? "success" : "failure";
}

TechLevel parse_tech_level(std::string_view text) {
  if (text == "low") return TechLevel::kLow;
  if (text == "medium") return TechLevel::kMedium;
  if (text == "high") return TechLevel::kHigh;
  throw SchemaError("technical_understanding must be low, medium or high, got '" +
                    std::string(text) + "'");
}

Speaker parse_speaker(std::string_view text) {
  if (text == "customer") return Speaker::kCustomer;
  if (text == "representative") return Speaker::kRepresentative;
  throw SchemaError("speaker must be customer or representative, got '" +
                    std::string(text) + "'");
}

Outcome parse_outcome(std::string_view text) {
  if (text == "success") return Outcome::kSuccess;
  if (text == "failure") return Outcome::kFailure;
  throw SchemaError("outcome must be success or failure, got '" +
                    std::string(text) + "'");
}

namespace {

void require_non_empty(const std::string& value, std::string_view field) {
  if (value.empty()) {
    throw SchemaError("field '" + std::string(field) + "' must be non-empty");
  }
}

std::vector<std::string> string_list(const Json& object, std::string_view key) {
  const Json& v = require_field(object, key);
  if (!v.is_array()) {
    throw SchemaError("field '" + std::string(key) + "' must be an array");
  }
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw SchemaError("field '" + std::string(key) +
                        "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

void validate(const CompanyProfile& p) {
  require_non_empty(p.company_id, "company_id");
  require_non_empty(p.name, "name");
  require_non_empty(p.sales_goals, "sales_goals");
  require_non_empty(p.product_category, "product_category");
  require_non_empty(p.target_audience, "target_audience");
}

void validate(const Scenario& s) {
  require_non_empty(s.persona, "persona");
  require_non_empty(s.primary_concern, "primary_concern");
  require_non_empty(s.motivation, "motivation");
}

void validate_conversation(const std::vector<DialogueTurn>& turns) {
  if (turns.empty()) throw SchemaError("conversation must be non-empty");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Speaker expected =
        i % 2 == 0 ? Speaker::kCustomer : Speaker::kRepresentative;
    if (turns[i].speaker != expected) {
      throw SchemaError("conversation turn " + std::to_string(i) +
                        " must be spoken by " + std::string(to_string(expected)) +
                        " (speakers alternate, customer first)");
    }
    if (turns[i].message.empty()) {
      throw SchemaError("conversation turn " + std::to_string(i) +
                        " has an empty message");
    }
  }
}

void validate(const DialogueRecord& r) {
  require_non_empty(r.record_id, "record_id");
  require_non_empty(r.profile_ref, "profile_ref");
  validate(r.scenario);
  validate_conversation(r.conversation);
}

Json to_json(const CompanyProfile& p) {
  return Json{{"company_id", p.company_id},
              {"name", p.name},
              {"sales_goals", p.sales_goals},
              {"product_category", p.product_category},
              {"target_audience", p.target_audience},
              {"product_keywords", p.product_keywords}};
}

Json to_json(const Scenario& s) {
  return Json{{"persona", s.persona},
              {"primary_concern", s.primary_concern},
              {"technical_understanding", to_string(s.technical_understanding)},
              {"motivation", s.motivation}};
}

Json to_json(const DialogueTurn& t) {
  return Json{{"speaker", to_string(t.speaker)}, {"message", t.message}};
}

Json to_json(const DialogueRecord& r) {
  Json conversation = Json::array();
  for (const auto& t : r.conversation) conversation.push_back(to_json(t));
  return Json{{"record_id", r.record_id},
              {"profile_ref", r.profile_ref},
              {"scenario", to_json(r.scenario)},
              {"conversation", std::move(conversation)},
              {"outcome", to_string(r.outcome)},
              {"key_points_discussed", r.key_points_discussed},
              {"value_propositions", r.value_propositions},
              {"objections_handled", r.objections_handled}};
}

CompanyProfile profile_from_json(const Json& json) {
  reject_unknown_fields(json,
                        {"company_id", "name", "sales_goals", "product_category",
                         "target_audience", "product_keywords"},
                        "profile");
  CompanyProfile p;
  p.company_id = require_string(json, "company_id");
  p.name = require_string(json, "name");
  p.sales_goals = require_string(json, "sales_goals");
  p.product_category = require_string(json, "product_category");
  p.target_audience = require_string(json, "target_audience");
  if (json.contains("product_keywords")) {
    p.product_keywords = string_list(json, "product_keywords");
  }
  return p;
}

Scenario scenario_from_json(const Json& json) {
  reject_unknown_fields(
      json, {"persona", "primary_concern", "technical_understanding", "motivation"},
      "scenario");
  Scenario s;
  s.persona = require_string(json, "persona");
  s.primary_concern = require_string(json, "primary_concern");
  s.technical_understanding =
      parse_tech_level(require_string(json, "technical_understanding"));
  s.motivation = require_string(json, "motivation");
  return s;
}

DialogueTurn turn_from_json(const Json& json) {
  reject_unknown_fields(json, {"speaker", "message"}, "conversation turn");
  DialogueTurn t;
  t.speaker = parse_speaker(require_string(json, "speaker"));
  t.message = require_string(json, "message");
  return t;
}

std::vector<DialogueTurn> conversation_from_json(const Json& json) {
  if (!json.is_array()) throw SchemaError("field 'conversation' must be an array");
  std::vector<DialogueTurn> turns;
  for (const auto& item : json) turns.push_back(turn_from_json(item));
  validate_conversation(turns);
  return turns;
}

DialogueRecord record_from_json(const Json& json) {
  reject_unknown_fields(json,
                        {"record_id", "profile_ref", "scenario", "conversation",
                         "outcome", "key_points_discussed", "value_propositions",
                         "objections_handled"},
                        "record");
  DialogueRecord r;
  r.record_id = require_string(json, "record_id");
  r.profile_ref = require_string(json, "profile_ref");
  r.scenario = scenario_from_json(require_field(json, "scenario"));
  r.conversation = conversation_from_json(require_field(json, "conversation"));
  r.outcome = parse_outcome(require_string(json, "outcome"));
  r.key_points_discussed = string_list(json, "key_points_discussed");
  r.value_propositions = string_list(json, "value_propositions");
  r.objections_handled = string_list(json, "objections_handled");
  return r;
}

CompanyProfile load_profile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open profile file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json json;
  try {
    json = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("profile is not valid JSON: ") + e.what());
  }
  return profile_from_json(json);
}

std::string transcript_text(const std::vector<DialogueTurn>& turns) {
  std::string text;
  for (const auto& turn : turns) {
    if (!text.empty()) text += ' ';
    text += to_string(turn.speaker);
    text += ": ";
    text += turn.message;
  }
  return text;
}

}  // namespace clca
