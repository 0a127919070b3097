#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clca/json_util.hpp"

namespace clca {

enum class TechLevel { kLow, kMedium, kHigh };
enum class Speaker { kCustomer, kRepresentative };
enum class Outcome { kSuccess, kFailure };

std::string_view to_string(TechLevel level);
std::string_view to_string(Speaker speaker);
std::string_view to_string(Outcome outcome);
TechLevel parse_tech_level(std::string_view text);
Speaker parse_speaker(std::string_view text);
Outcome parse_outcome(std::string_view text);

struct CompanyProfile {
  std::string company_id;
  std::string name;
  std::string sales_goals;
  std::string product_category;
  std::string target_audience;
  std::vector<std::string> product_keywords;

  friend bool operator==(const CompanyProfile&, const CompanyProfile&) = default;
};

struct Scenario {
  std::string persona;
  std::string primary_concern;
  TechLevel technical_understanding = TechLevel::kMedium;
  std::string motivation;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct DialogueTurn {
  Speaker speaker = Speaker::kCustomer;
  std::string message;

  friend bool operator==(const DialogueTurn&, const DialogueTurn&) = default;
};

struct DialogueRecord {
  std::string record_id;
  std::string profile_ref;
  Scenario scenario;
  std::vector<DialogueTurn> conversation;
  Outcome outcome = Outcome::kFailure;
  std::vector<std::string> key_points_discussed;
  std::vector<std::string> value_propositions;
  std::vector<std::string> objections_handled;

  friend bool operator==(const DialogueRecord&, const DialogueRecord&) = default;
};

// Validation throws SchemaError naming the violated field.
void validate(const CompanyProfile& profile);
void validate(const Scenario& scenario);
void validate(const DialogueRecord& record);
void validate_conversation(const std::vector<DialogueTurn>& turns);

Json to_json(const CompanyProfile& profile);
Json to_json(const Scenario& scenario);
Json to_json(const DialogueTurn& turn);
Json to_json(const DialogueRecord& record);

// Strict parsers: unknown fields, wrong types and invariant violations all
// raise SchemaError.
CompanyProfile profile_from_json(const Json& json);
Scenario scenario_from_json(const Json& json);
DialogueTurn turn_from_json(const Json& json);
std::vector<DialogueTurn> conversation_from_json(const Json& json);
DialogueRecord record_from_json(const Json& json);

CompanyProfile load_profile(const std::string& path);

// "customer: hi representative: hello ..." -- the text that is embedded for
// a turn sequence.
std::string transcript_text(const std::vector<DialogueTurn>& turns);

}  // namespace clca
