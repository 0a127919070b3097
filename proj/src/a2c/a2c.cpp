#include "clca/a2c.hpp"

#include <algorithm>
#include <cmath>

#include "clca/errors.hpp"
#include "clca/gae.hpp"
#include "clca/rng.hpp"

namespace clca {

void validate(const A2CConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw InvalidArgument("gamma must be in (0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) {
    throw InvalidArgument("gae_lambda must be in [0, 1]");
  }
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (c.n_steps < 1) throw InvalidArgument("n_steps must be >= 1");
  if (!(c.max_grad_norm > 0.0)) throw InvalidArgument("max_grad_norm must be > 0");
  if (!(c.vf_coef >= 0.0) || !(c.ent_coef >= 0.0)) {
    throw InvalidArgument("loss coefficients must be >= 0");
  }
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0) ||
      !(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0) || !(c.adam_eps > 0.0)) {
    throw InvalidArgument("invalid Adam hyperparameters");
  }
  if (c.hidden_size < 1) throw InvalidArgument("hidden_size must be >= 1");
}

Json to_json(const A2CConfig& c) {
  return Json{{"learning_rate", c.learning_rate},
              {"gamma", c.gamma},
              {"gae_lambda", c.gae_lambda},
              {"n_steps", c.n_steps},
              {"vf_coef", c.vf_coef},
              {"ent_coef", c.ent_coef},
              {"max_grad_norm", c.max_grad_norm},
              {"total_timesteps", c.total_timesteps},
              {"seed", c.seed},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_eps", c.adam_eps},
              {"hidden_size", c.hidden_size}};
}

A2CConfig a2c_config_from_json(const Json& json) {
  reject_unknown_fields(json,
                        {"learning_rate", "gamma", "gae_lambda", "n_steps",
                         "vf_coef", "ent_coef", "max_grad_norm", "total_timesteps",
                         "seed", "adam_beta1", "adam_beta2", "adam_eps",
                         "hidden_size"},
                        "a2c_config");
  A2CConfig c;
  auto num = [&](const char* key, double& out) {
    if (json.contains(key)) out = require_number(json, key);
  };
  auto count = [&](const char* key, std::size_t& out) {
    if (json.contains(key)) out = require_uint(json, key);
  };
  num("learning_rate", c.learning_rate);
  num("gamma", c.gamma);
  num("gae_lambda", c.gae_lambda);
  count("n_steps", c.n_steps);
  num("vf_coef", c.vf_coef);
  num("ent_coef", c.ent_coef);
  num("max_grad_norm", c.max_grad_norm);
  count("total_timesteps", c.total_timesteps);
  if (json.contains("seed")) c.seed = require_uint(json, "seed");
  num("adam_beta1", c.adam_beta1);
  num("adam_beta2", c.adam_beta2);
  num("adam_eps", c.adam_eps);
  count("hidden_size", c.hidden_size);
  try {
    validate(c);
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  return c;
}

void RolloutBuffer::add(std::span<const double> obs, const ActionArray& action,
                        double reward, bool done, double value, double log_prob) {
  if (obs.size() != obs_dim) {
    throw DimensionMismatch("observation length does not match buffer obs_dim");
  }
  observations.insert(observations.end(), obs.begin(), obs.end());
  actions.push_back(action);
  rewards.push_back(reward);
  dones.push_back(done ? 1 : 0);
  values.push_back(value);
  log_probs.push_back(log_prob);
}

void RolloutBuffer::clear() {
  observations.clear();
  actions.clear();
  rewards.clear();
  dones.clear();
  values.clear();
  log_probs.clear();
  bootstrap_value = 0.0;
}

LossAndGrads compute_loss_and_grads(const MlpParams& params,
                                    const RolloutBuffer& buffer,
                                    std::span<const double> advantages,
                                    std::span<const double> returns,
                                    const A2CConfig& config) {
  const std::size_t n = buffer.size();
  if (n == 0) throw InvalidArgument("empty rollout buffer");
  if (advantages.size() != n || returns.size() != n) {
    throw DimensionMismatch("advantages/returns length must match the buffer");
  }
  if (buffer.obs_dim != params.obs_dim()) {
    throw DimensionMismatch("buffer obs_dim does not match the model");
  }

  LossAndGrads out{{}, MlpParams::zeros(params.obs_dim(), params.hidden()), 0.0};
  MlpParams& g = out.grads;
  const double inv_n = 1.0 / static_cast<double>(n);

  ActionArray log_std{};
  ActionArray var{};
  for (std::size_t i = 0; i < kActionDim; ++i) {
    log_std[i] = params.log_std.data[i];
    var[i] = std::exp(2.0 * log_std[i]);
  }

  TrunkCache cache;
  std::vector<double> head;
  std::array<double, kActionDim> d_mean{};
  for (std::size_t t = 0; t < n; ++t) {
    const auto obs = buffer.observation(t);

    // Policy: -A_t * log pi(a_t | s_t).
    trunk_forward(params.pi_w1, params.pi_b1, params.pi_w2, params.pi_b2, obs, cache);
    ActionArray mean{};
    for (std::size_t i = 0; i < kActionDim; ++i) {
      double acc = params.mu_b.data[i];
      for (std::size_t j = 0; j < params.hidden(); ++j) {
        acc += params.mu_w.data[i * params.hidden() + j] * cache.h2[j];
      }
      mean[i] = acc;
    }
    const ActionArray& x = buffer.actions[t];
    const double logp = gaussian_log_prob(x, mean, log_std);
    const double weight = -advantages[t] * inv_n;
    out.loss.policy_loss += weight * logp;
    for (std::size_t i = 0; i < kActionDim; ++i) {
      const double d = x[i] - mean[i];
      d_mean[i] = weight * d / var[i];
      g.log_std.data[i] += weight * (d * d / var[i] - 1.0);
    }
    trunk_head_backward(params.pi_w1, params.pi_w2, params.mu_w, obs, cache, d_mean,
                        g.pi_w1, g.pi_b1, g.pi_w2, g.pi_b2, g.mu_w, g.mu_b);

    // Value: (R_t - V(s_t))^2.
    trunk_forward(params.v_w1, params.v_b1, params.v_w2, params.v_b2, obs, cache);
    double value = params.v_b.data[0];
    for (std::size_t j = 0; j < params.hidden(); ++j) {
      value += params.v_w.data[j] * cache.h2[j];
    }
    const double err = value - returns[t];
    out.loss.value_loss += err * err * inv_n;
    const double d_value = config.vf_coef * 2.0 * err * inv_n;
    trunk_head_backward(params.v_w1, params.v_w2, params.v_w, obs, cache,
                        std::span<const double>(&d_value, 1), g.v_w1, g.v_b1,
                        g.v_w2, g.v_b2, g.v_w, g.v_b);
  }

  out.loss.entropy = entropy(log_std);
  for (std::size_t i = 0; i < kActionDim; ++i) g.log_std.data[i] -= config.ent_coef;
  out.loss.total = out.loss.policy_loss + config.vf_coef * out.loss.value_loss -
                   config.ent_coef * out.loss.entropy;
  out.grad_norm = global_norm(g);
  return out;
}

double global_norm(const MlpParams& grads) {
  double sq = 0.0;
  grads.for_each([&](std::string_view, const Tensor& t) {
    for (double v : t.data) sq += v * v;
  });
  return std::sqrt(sq);
}

double clip_grad_norm(MlpParams& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grads.for_each([&](std::string_view, Tensor& t) {
      for (double& v : t.data) v *= scale;
    });
  }
  return norm;
}

LossAndGrads a2c_loss_and_grads(const MlpParams& params,
                                const RolloutBuffer& buffer,
                                const A2CConfig& config) {
  const GaeResult gae =
      compute_gae(buffer.rewards, buffer.values, buffer.dones,
                  buffer.bootstrap_value, config.gamma, config.gae_lambda);
  LossAndGrads out =
      compute_loss_and_grads(params, buffer, gae.advantages, gae.returns, config);
  if (!std::isfinite(out.loss.total) || !std::isfinite(out.grad_norm)) {
    throw NonFiniteLoss("non-finite A2C loss (policy " +
                        std::to_string(out.loss.policy_loss) + ", value " +
                        std::to_string(out.loss.value_loss) + ", grad norm " +
                        std::to_string(out.grad_norm) + "); training diverged");
  }
  clip_grad_norm(out.grads, config.max_grad_norm);
  return out;
}

AdamState AdamState::for_params(const MlpParams& params) {
  return AdamState{MlpParams::zeros(params.obs_dim(), params.hidden()),
                   MlpParams::zeros(params.obs_dim(), params.hidden()), 0};
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state,
               const A2CConfig& config) {
  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(b1, t);
  const double bc2 = 1.0 - std::pow(b2, t);

  std::vector<Tensor*> p_list, m_list, v_list;
  std::vector<const Tensor*> g_list;
  params.for_each([&](std::string_view, Tensor& x) { p_list.push_back(&x); });
  grads.for_each([&](std::string_view, const Tensor& x) { g_list.push_back(&x); });
  state.m.for_each([&](std::string_view, Tensor& x) { m_list.push_back(&x); });
  state.v.for_each([&](std::string_view, Tensor& x) { v_list.push_back(&x); });

  for (std::size_t k = 0; k < p_list.size(); ++k) {
    auto& p = p_list[k]->data;
    const auto& g = g_list[k]->data;
    auto& m = m_list[k]->data;
    auto& v = v_list[k]->data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
  for (double& ls : params.log_std.data) ls = std::clamp(ls, kLogStdMin, kLogStdMax);
}

A2CModel make_model(std::size_t embed_dim, const A2CConfig& config,
                    const EnvConfig& env_config) {
  validate(config);
  validate(env_config);
  A2CModel model;
  model.config = config;
  model.env_config = env_config;
  model.embed_dim = embed_dim;
  model.params = init_params(embed_dim + kActionDim, config.seed, config.hidden_size);
  model.adam = AdamState::for_params(model.params);
  return model;
}

ActionVector predict(const MlpParams& params, std::span<const double> obs,
                     bool deterministic, Rng* rng) {
  const PolicyOutput out = forward_policy(params, obs);
  if (deterministic) return ActionVector{out.mean}.clamped();
  if (rng == nullptr) throw InvalidArgument("stochastic predict needs an rng");
  return sample_action(out.mean, out.log_std, *rng).env_action;
}

TrainResult train(const DialogueDataset& dataset, const A2CConfig& config,
                  const EnvConfig& env_config,
                  const std::function<void(const TrainProgress&)>& on_progress) {
  if (dataset.empty()) throw EmptyDataset("cannot train on an empty dataset");
  TrainResult result{make_model(dataset.embed_dim, config, env_config), {}};
  A2CModel& model = result.model;

  SalesEnv env(dataset, env_config);
  Rng rng(derive_seed(config.seed, 1));
  std::vector<double> obs = env.reset().observation;
  RolloutBuffer buffer(env.observation_dim());

  std::size_t steps = 0;
  double window_sum = 0.0;
  std::size_t window_count = 0;
  double last_window_mean = 0.0;

  while (steps < config.total_timesteps) {
    buffer.clear();
    const std::size_t n = std::min(config.n_steps, config.total_timesteps - steps);
    for (std::size_t k = 0; k < n; ++k) {
      const PolicyOutput po = forward_policy(model.params, obs);
      const double value = forward_value(model.params, obs);
      const SampledAction s = sample_action(po.mean, po.log_std, rng);
      StepResult r = env.step(s.env_action);
      buffer.add(obs, s.raw, r.reward, r.done, value, s.log_prob);
      ++steps;
      window_sum += r.reward;
      ++window_count;
      if (steps % kStatsWindow == 0) {
        last_window_mean = window_sum / static_cast<double>(window_count);
        result.stats.push_back({steps, last_window_mean});
        window_sum = 0.0;
        window_count = 0;
      }
      obs = r.done ? env.reset().observation : std::move(r.next_state.observation);
    }
    buffer.bootstrap_value = forward_value(model.params, obs);
    const LossAndGrads lg = a2c_loss_and_grads(model.params, buffer, config);
    adam_step(model.params, lg.grads, model.adam, config);
    if (on_progress) {
      const double window =
          result.stats.empty() && window_count > 0
              ? window_sum / static_cast<double>(window_count)
              : last_window_mean;
      on_progress({steps, window});
    }
  }
  return result;
}

}  // namespace clca
