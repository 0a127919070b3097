#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "clca/dataset.hpp"
#include "clca/gaussian_policy.hpp"
#include "clca/json_util.hpp"
#include "clca/mlp.hpp"
#include "clca/sales_env.hpp"

namespace clca {

struct A2CConfig {
  double learning_rate = 7e-4;
  double gamma = 0.99;
  double gae_lambda = 1.0;
  std::size_t n_steps = 5;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  double max_grad_norm = 0.5;
  std::size_t total_timesteps = 200000;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t hidden_size = kDefaultHidden;

  friend bool operator==(const A2CConfig&, const A2CConfig&) = default;
};

void validate(const A2CConfig& config);
Json to_json(const A2CConfig& config);
// Missing fields keep defaults; unknown fields raise SchemaError.
A2CConfig a2c_config_from_json(const Json& json);

// Experience of one rollout segment. Actions are the unclamped samples.
struct RolloutBuffer {
  std::size_t obs_dim = 0;
  std::vector<double> observations;  // size() x obs_dim
  std::vector<ActionArray> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> values;
  std::vector<double> log_probs;
  double bootstrap_value = 0.0;

  explicit RolloutBuffer(std::size_t obs_dim = 0) : obs_dim(obs_dim) {}

  std::size_t size() const { return rewards.size(); }
  std::span<const double> observation(std::size_t t) const {
    return {observations.data() + t * obs_dim, obs_dim};
  }
  void add(std::span<const double> obs, const ActionArray& action, double reward,
           bool done, double value, double log_prob);
  void clear();
};

struct LossComponents {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

struct LossAndGrads {
  LossComponents loss;
  MlpParams grads;
  double grad_norm = 0.0;  // before clipping
};

// Loss and exact reverse-mode gradients for fixed advantages/returns.
LossAndGrads compute_loss_and_grads(const MlpParams& params,
                                    const RolloutBuffer& buffer,
                                    std::span<const double> advantages,
                                    std::span<const double> returns,
                                    const A2CConfig& config);

double global_norm(const MlpParams& grads);
// Rescales so the global L2 norm is at most max_norm; returns the norm
// before rescaling.
double clip_grad_norm(MlpParams& grads, double max_norm);

// GAE on the buffer, then loss/gradients, then global-norm clipping.
// Throws NonFiniteLoss when the loss or any gradient is not finite.
LossAndGrads a2c_loss_and_grads(const MlpParams& params,
                                const RolloutBuffer& buffer,
                                const A2CConfig& config);

struct AdamState {
  MlpParams m;
  MlpParams v;
  std::uint64_t step = 0;

  static AdamState for_params(const MlpParams& params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam update; log_std is clamped afterwards.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state,
               const A2CConfig& config);

struct A2CModel {
  A2CConfig config;
  EnvConfig env_config;
  std::size_t embed_dim = kDefaultEmbedDim;
  MlpParams params;
  AdamState adam;

  friend bool operator==(const A2CModel&, const A2CModel&) = default;
};

A2CModel make_model(std::size_t embed_dim, const A2CConfig& config,
                    const EnvConfig& env_config);

// Deterministic: clamp(mean). Otherwise one sample from `rng`.
ActionVector predict(const MlpParams& params, std::span<const double> obs,
                     bool deterministic, Rng* rng = nullptr);

struct TrainPoint {
  std::size_t steps = 0;
  double mean_reward = 0.0;  // mean per-step reward over the last window
};

struct TrainProgress {
  std::size_t steps_done = 0;
  double mean_reward_window = 0.0;
};

inline constexpr std::size_t kStatsWindow = 1000;

struct TrainResult {
  A2CModel model;
  std::vector<TrainPoint> stats;
};

// Collect n_steps transitions (resetting on done), one update per rollout,
// until config.total_timesteps environment steps are consumed. Fully
// determined by (dataset, configs). `on_progress` runs after every update.
TrainResult train(const DialogueDataset& dataset, const A2CConfig& config,
                  const EnvConfig& env_config,
                  const std::function<void(const TrainProgress&)>& on_progress = {});

}  // namespace clca
