#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "clca/dataset.hpp"
#include "clca/embedding.hpp"
#include "clca/json_util.hpp"
#include "clca/rng.hpp"

namespace clca {

inline constexpr std::size_t kActionDim = 4;

// Engagement, value proposition, technical detail, closing.
struct ActionVector {
  std::array<double, kActionDim> values{};

  double engagement() const { return values[0]; }
  double value_proposition() const { return values[1]; }
  double technical_detail() const { return values[2]; }
  double closing() const { return values[3]; }

  bool is_finite() const;
  ActionVector clamped() const;

  friend bool operator==(const ActionVector&, const ActionVector&) = default;
};

inline constexpr std::array<const char*, kActionDim> kActionNames = {
    "engagement", "value_proposition", "technical_detail", "closing"};

// Running mean of the actions taken so far; neutral (0.5) before the first.
struct HistoryStats {
  std::array<double, kActionDim> values{0.5, 0.5, 0.5, 0.5};
  std::size_t count = 0;

  friend bool operator==(const HistoryStats&, const HistoryStats&) = default;
};

HistoryStats update_history(const HistoryStats& history,
                            const ActionVector& action);

struct EnvState {
  Embedding embedding;
  HistoryStats history;
  std::vector<double> observation;  // embedding ++ history.values
};

EnvState make_state(const Embedding& embedding, const HistoryStats& history);

enum class OutcomeMode { kDataset, kAligned };

struct EnvConfig {
  double c_var = 0.1;
  double c_ext = 0.1;
  double r_success = 1.0;
  double r_failure = -1.0;
  std::size_t max_steps = 10;
  OutcomeMode outcome_mode = OutcomeMode::kDataset;
  double aligned_threshold = 0.25;
  std::uint64_t seed = 0;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

void validate(const EnvConfig& config);
Json to_json(const EnvConfig& config);
// Missing fields keep their defaults; unknown fields are rejected.
EnvConfig env_config_from_json(const Json& json);

struct RewardComponents {
  double outcome = 0.0;
  double variety = 0.0;
  double extremity = 0.0;
};

struct RewardBreakdown {
  double total = 0.0;
  RewardComponents components;
};

// Population standard deviation of the four components.
double action_std(const ActionVector& action);
// Mean squared deviation from the neutral 0.5.
double action_msd(const ActionVector& action);

// (sigmoid(4 e_1), ..., sigmoid(4 e_4)); missing components count as 0.
ActionVector aligned_target(const Embedding& embedding);

RewardBreakdown reward_fn(const ActionVector& action, bool terminal,
                          Outcome outcome, const EnvConfig& config,
                          const ActionVector& episode_mean_action,
                          const Embedding& embedding);

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  RewardComponents components;
  bool done = false;
};

// Simulated sales interaction over a dialogue dataset. The dataset must
// outlive the environment. Not thread-safe; use one instance per thread.
class SalesEnv {
 public:
  SalesEnv(const DialogueDataset& dataset, EnvConfig config);

  EnvState reset(std::optional<std::uint64_t> seed = std::nullopt);
  StepResult step(const ActionVector& action);

  std::size_t observation_dim() const { return dataset_->embed_dim + kActionDim; }
  const EnvConfig& config() const { return config_; }
  std::size_t record_index() const { return record_; }
  std::size_t episode_length() const { return length_; }
  std::size_t step_index() const { return t_; }
  bool episode_active() const { return active_; }

 private:
  const DialogueDataset* dataset_;
  EnvConfig config_;
  Rng rng_;
  std::size_t record_ = 0;
  std::size_t length_ = 0;
  std::size_t t_ = 0;
  bool active_ = false;
  HistoryStats history_;
};

}  // namespace clca
