#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clca/a2c.hpp"
#include "clca/dialogue.hpp"
#include "clca/errors.hpp"
#include "clca/provider.hpp"
#include "clca/sales_env.hpp"

namespace clca {

struct ChatState {
  std::vector<DialogueTurn> history;
  HistoryStats session_history_stats;
  CompanyProfile profile;
};

struct CandidateResponse {
  std::string text;
  double temperature = 1.0;
  std::size_t index = 0;

  friend bool operator==(const CandidateResponse&, const CandidateResponse&) = default;
};

struct FeatureVector {
  std::array<double, kActionDim> values{};

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct ScoredCandidate {
  CandidateResponse candidate;
  FeatureVector features;
  double score = 0.0;

  friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

// Keyword lists per action metric; each entry is a tokenized phrase.
struct Lexicons {
  using Phrase = std::vector<std::string>;
  std::vector<Phrase> engagement;
  std::vector<Phrase> value;
  std::vector<Phrase> technical;
  std::vector<Phrase> closing;

  // The lists shipped in data/lexicons.
  static Lexicons defaults();
  // engagement.txt, value.txt, technical.txt, closing.txt under `dir`.
  static Lexicons load_dir(const std::string& dir);

  // Copy with extra technical terms (a profile's product keywords).
  Lexicons with_technical_terms(const std::vector<std::string>& terms) const;
};

// One keyword per line, '#' starts a comment line, blank lines ignored.
std::vector<Lexicons::Phrase> parse_lexicon(std::string_view text);

struct SelectionConfig {
  std::size_t k = 4;
  std::vector<double> temperatures{0.3, 0.7, 1.0, 1.3};
  std::size_t context_turns = 6;
  Lexicons lexicons = Lexicons::defaults();
};

void validate(const SelectionConfig& config);

// Raised when some, but not all, of the k candidates were produced.
class PartialCandidates : public Error {
 public:
  PartialCandidates(const std::string& message,
                    std::vector<CandidateResponse> candidates)
      : Error("PartialCandidates", message), candidates_(std::move(candidates)) {}

  const std::vector<CandidateResponse>& candidates() const { return candidates_; }

 private:
  std::vector<CandidateResponse> candidates_;
};

// The text embedded for the live state: last `context_turns` turns plus the
// new customer message.
std::string context_text(const ChatState& chat, std::string_view user_msg,
                         std::size_t context_turns);

std::vector<double> build_state(const ChatState& chat, std::string_view user_msg,
                                std::size_t embed_dim,
                                const SelectionConfig& config = {});

std::vector<CandidateResponse> generate_candidates(const TextProviderSpec& provider,
                                                   const ChatState& chat,
                                                   std::string_view user_msg,
                                                   const SelectionConfig& config,
                                                   std::uint64_t seed);

FeatureVector extract_features(std::string_view text, const Lexicons& lexicons);

double score(const FeatureVector& features, const ActionVector& action);

using ScoreFunction = std::function<double(const FeatureVector&, const ActionVector&)>;

std::vector<ScoredCandidate> score_candidates(
    const std::vector<CandidateResponse>& candidates, const ActionVector& action,
    const Lexicons& lexicons, const ScoreFunction& scorer = score);

// Highest score, lowest index on ties. Requires a non-empty list.
std::size_t select_best(std::span<const ScoredCandidate> scored);

struct SelectionResult {
  std::string response;
  ActionVector action;
  std::vector<ScoredCandidate> candidates;
  std::size_t selected_index = 0;
};

// state -> deterministic action -> candidates -> features -> scores ->
// argmax. Folds the action into chat.session_history_stats; the transcript
// itself is left to the caller (see record_exchange).
SelectionResult select_response(ChatState& chat, std::string_view user_msg,
                                const A2CModel& model,
                                const TextProviderSpec& provider,
                                const SelectionConfig& config, std::uint64_t seed);

void record_exchange(ChatState& chat, std::string_view user_msg,
                     std::string_view response);

}  // namespace clca
