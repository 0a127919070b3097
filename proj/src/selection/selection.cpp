#include "clca/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "clca/builtin_data.hpp"
#include "clca/embedding.hpp"
#include "clca/rng.hpp"

namespace clca {
namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t count_phrase(const std::vector<std::string>& tokens,
                         const Lexicons::Phrase& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + i)) ++hits;
  }
  return hits;
}

std::size_t count_hits(const std::vector<std::string>& tokens,
                       const std::vector<Lexicons::Phrase>& lexicon) {
  std::size_t hits = 0;
  for (const auto& phrase : lexicon) hits += count_phrase(tokens, phrase);
  return hits;
}

bool is_numeric(const std::string& token) {
  return std::all_of(token.begin(), token.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::string builtin_candidate(const ChatState& chat, std::string_view user_msg,
                              double temperature, Rng& rng) {
  static const Json responses =
      Json::parse(builtin_data::templates_json()).at("responses");
  const auto tokens = tokenize(user_msg);

  // Softmax over log-weight + tag relevance, sharpened or flattened by the
  // temperature.
  std::vector<double> logits;
  logits.reserve(responses.size());
  for (const auto& r : responses) {
    double relevance = 0.0;
    for (const auto& tag : r.at("tags")) {
      if (std::find(tokens.begin(), tokens.end(), tag.get<std::string>()) !=
          tokens.end()) {
        relevance += 1.0;
      }
    }
    logits.push_back(std::log(r.at("weight").get<double>()) + relevance);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> weights;
  double total = 0.0;
  for (double l : logits) {
    weights.push_back(std::exp((l - top) / temperature));
    total += weights.back();
  }
  double u = rng.uniform() * total;
  std::size_t choice = weights.size() - 1;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (u < weights[j]) {
      choice = j;
      break;
    }
    u -= weights[j];
  }
  const auto& keywords = chat.profile.product_keywords;
  const std::string keyword = keywords.empty()
                                  ? chat.profile.product_category
                                  : keywords[rng.below(keywords.size())];
  return fill_template(responses.at(choice).at("text").get<std::string>(),
                       chat.profile, nullptr, keyword);
}

std::vector<ChatMessage> http_messages(const ChatState& chat,
                                       std::string_view user_msg,
                                       std::size_t context_turns) {
  const CompanyProfile& p = chat.profile;
  std::vector<ChatMessage> messages;
  messages.push_back(
      {"system", "You are a sales representative for " + p.name + ", which sells " +
                     p.product_category + " to " + p.target_audience +
                     ". Sales goal: " + p.sales_goals +
                     ". Reply to the customer with a single short message."});
  const std::size_t start =
      chat.history.size() > context_turns ? chat.history.size() - context_turns : 0;
  for (std::size_t i = start; i < chat.history.size(); ++i) {
    const auto& turn = chat.history[i];
    messages.push_back({turn.speaker == Speaker::kCustomer ? "user" : "assistant",
                        turn.message});
  }
  messages.push_back({"user", std::string(user_msg)});
  return messages;
}

}  // namespace

std::vector<Lexicons::Phrase> parse_lexicon(std::string_view text) {
  std::vector<Lexicons::Phrase> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto phrase = tokenize(line);
    if (!phrase.empty()) out.push_back(std::move(phrase));
  }
  return out;
}

Lexicons Lexicons::defaults() {
  return Lexicons{parse_lexicon(builtin_data::engagement_lexicon()),
                  parse_lexicon(builtin_data::value_lexicon()),
                  parse_lexicon(builtin_data::technical_lexicon()),
                  parse_lexicon(builtin_data::closing_lexicon())};
}

Lexicons Lexicons::load_dir(const std::string& dir) {
  return Lexicons{parse_lexicon(read_text(dir + "/engagement.txt")),
                  parse_lexicon(read_text(dir + "/value.txt")),
                  parse_lexicon(read_text(dir + "/technical.txt")),
                  parse_lexicon(read_text(dir + "/closing.txt"))};
}

Lexicons Lexicons::with_technical_terms(const std::vector<std::string>& terms) const {
  Lexicons out = *this;
  for (const auto& term : terms) {
    auto phrase = tokenize(term);
    if (!phrase.empty() &&
        std::find(out.technical.begin(), out.technical.end(), phrase) ==
            out.technical.end()) {
      out.technical.push_back(std::move(phrase));
    }
  }
  return out;
}

void validate(const SelectionConfig& c) {
  if (c.k < 1) throw InvalidArgument("k must be >= 1");
  if (c.temperatures.size() != c.k) {
    throw InvalidArgument("temperatures must have exactly k entries");
  }
  for (double t : c.temperatures) {
    if (!(t > 0.0)) throw InvalidArgument("temperatures must be > 0");
  }
  if (c.context_turns < 1) throw InvalidArgument("context_turns must be >= 1");
}

std::string context_text(const ChatState& chat, std::string_view user_msg,
                         std::size_t context_turns) {
  const std::size_t start =
      chat.history.size() > context_turns ? chat.history.size() - context_turns : 0;
  std::vector<DialogueTurn> turns(chat.history.begin() + start, chat.history.end());
  turns.push_back({Speaker::kCustomer, std::string(user_msg)});
  return transcript_text(turns);
}

std::vector<double> build_state(const ChatState& chat, std::string_view user_msg,
                                std::size_t embed_dim,
                                const SelectionConfig& config) {
  if (user_msg.empty()) throw EmptyMessage("user message must be non-empty");
  const Embedding e = embed_text(context_text(chat, user_msg, config.context_turns),
                                 embed_dim);
  return make_state(e, chat.session_history_stats).observation;
}

std::vector<CandidateResponse> generate_candidates(const TextProviderSpec& provider,
                                                   const ChatState& chat,
                                                   std::string_view user_msg,
                                                   const SelectionConfig& config,
                                                   std::uint64_t seed) {
  validate(config);
  std::vector<CandidateResponse> out;
  if (provider.kind == ProviderKind::kBuiltinTemplate) {
    Rng rng(seed);
    for (std::size_t i = 0; i < config.k; ++i) {
      out.push_back({builtin_candidate(chat, user_msg, config.temperatures[i], rng),
                     config.temperatures[i], i});
    }
    return out;
  }

  const auto messages = http_messages(chat, user_msg, config.context_turns);
  std::string last_error;
  for (std::size_t i = 0; i < config.k; ++i) {
    try {
      std::string text = chat_completion(provider, messages, config.temperatures[i]);
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        last_error = "empty completion";
        continue;
      }
      out.push_back({std::move(text), config.temperatures[i], i});
    } catch (const ProviderUnavailable& e) {
      last_error = e.what();
    } catch (const MalformedProviderOutput& e) {
      last_error = e.what();
    }
  }
  if (out.empty()) {
    throw ProviderUnavailable("no candidate responses: " + last_error);
  }
  if (out.size() < config.k) {
    throw PartialCandidates("only " + std::to_string(out.size()) + " of " +
                                std::to_string(config.k) +
                                " candidates generated: " + last_error,
                            std::move(out));
  }
  return out;
}

FeatureVector extract_features(std::string_view text, const Lexicons& lexicons) {
  const auto tokens = tokenize(text);
  const auto questions =
      static_cast<std::size_t>(std::count(text.begin(), text.end(), '?'));
  std::size_t numeric = 0;
  for (const auto& t : tokens) numeric += is_numeric(t) ? 1 : 0;

  FeatureVector f;
  f.values[0] = std::min(
      1.0, static_cast<double>(questions + count_hits(tokens, lexicons.engagement)) / 5.0);
  f.values[1] =
      std::min(1.0, static_cast<double>(count_hits(tokens, lexicons.value)) / 4.0);
  f.values[2] = std::min(
      1.0, static_cast<double>(numeric + count_hits(tokens, lexicons.technical)) / 5.0);
  f.values[3] =
      std::min(1.0, static_cast<double>(count_hits(tokens, lexicons.closing)) / 2.0);
  return f;
}

double score(const FeatureVector& features, const ActionVector& action) {
  double sq = 0.0;
  for (std::size_t i = 0; i < kActionDim; ++i) {
    const double d = action.values[i] - features.values[i];
    sq += d * d;
  }
  return -std::sqrt(sq);
}

std::vector<ScoredCandidate> score_candidates(
    const std::vector<CandidateResponse>& candidates, const ActionVector& action,
    const Lexicons& lexicons, const ScoreFunction& scorer) {
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const FeatureVector f = extract_features(c.text, lexicons);
    out.push_back({c, f, scorer(f, action)});
  }
  return out;
}

std::size_t select_best(std::span<const ScoredCandidate> scored) {
  if (scored.empty()) throw InvalidArgument("no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i) {
    if (scored[i].score > scored[best].score) best = i;
  }
  return best;
}

SelectionResult select_response(ChatState& chat, std::string_view user_msg,
                                const A2CModel& model,
                                const TextProviderSpec& provider,
                                const SelectionConfig& config, std::uint64_t seed) {
  const auto obs = build_state(chat, user_msg, model.embed_dim, config);
  const ActionVector action = predict(model.params, obs, true);

  std::vector<CandidateResponse> candidates;
  try {
    candidates = generate_candidates(provider, chat, user_msg, config, seed);
  } catch (const PartialCandidates& partial) {
    candidates = partial.candidates();
  }

  const Lexicons lexicons =
      config.lexicons.with_technical_terms(chat.profile.product_keywords);
  SelectionResult result;
  result.action = action;
  result.candidates = score_candidates(candidates, action, lexicons);
  result.selected_index = select_best(result.candidates);
  result.response = result.candidates[result.selected_index].candidate.text;
  chat.session_history_stats = update_history(chat.session_history_stats, action);
  return result;
}

void record_exchange(ChatState& chat, std::string_view user_msg,
                     std::string_view response) {
  chat.history.push_back({Speaker::kCustomer, std::string(user_msg)});
  chat.history.push_back({Speaker::kRepresentative, std::string(response)});
}

}  // namespace clca
