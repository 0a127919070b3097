#include "clca/sales_env.hpp"

#include <algorithm>
#include <cmath>

#include "clca/errors.hpp"

namespace clca {

bool ActionVector::is_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

ActionVector ActionVector::clamped() const {
  ActionVector out;
  for (std::size_t i = 0; i < kActionDim; ++i) {
    out.values[i] = std::clamp(values[i], 0.0, 1.0);
  }
  return out;
}

HistoryStats update_history(const HistoryStats& h, const ActionVector& action) {
  HistoryStats next;
  next.count = h.count + 1;
  if (h.count == 0) {
    next.values = action.values;
    return next;
  }
  const double n = static_cast<double>(next.count);
  for (std::size_t i = 0; i < kActionDim; ++i) {
    next.values[i] = h.values[i] + (action.values[i] - h.values[i]) / n;
  }
  return next;
}

EnvState make_state(const Embedding& embedding, const HistoryStats& history) {
  EnvState s{embedding, history, {}};
  s.observation.reserve(embedding.dim() + kActionDim);
  s.observation = embedding.values;
  s.observation.insert(s.observation.end(), history.values.begin(),
                       history.values.end());
  return s;
}

void validate(const EnvConfig& c) {
  if (!(c.c_var >= 0.0)) throw InvalidArgument("c_var must be >= 0");
  if (!(c.c_ext >= 0.0)) throw InvalidArgument("c_ext must be >= 0");
  if (!std::isfinite(c.r_success) || !std::isfinite(c.r_failure)) {
    throw InvalidArgument("outcome rewards must be finite");
  }
  if (c.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  if (!(c.aligned_threshold > 0.0)) {
    throw InvalidArgument("aligned_threshold must be > 0");
  }
}

Json to_json(const EnvConfig& c) {
  return Json{{"c_var", c.c_var},
              {"c_ext", c.c_ext},
              {"r_success", c.r_success},
              {"r_failure", c.r_failure},
              {"max_steps", c.max_steps},
              {"outcome_mode",
               c.outcome_mode == OutcomeMode::kDataset ? "dataset" : "aligned"},
              {"aligned_threshold", c.aligned_threshold},
              {"seed", c.seed}};
}

EnvConfig env_config_from_json(const Json& json) {
  reject_unknown_fields(json,
                        {"c_var", "c_ext", "r_success", "r_failure", "max_steps",
                         "outcome_mode", "aligned_threshold", "seed"},
                        "env_config");
  EnvConfig c;
  if (json.contains("c_var")) c.c_var = require_number(json, "c_var");
  if (json.contains("c_ext")) c.c_ext = require_number(json, "c_ext");
  if (json.contains("r_success")) c.r_success = require_number(json, "r_success");
  if (json.contains("r_failure")) c.r_failure = require_number(json, "r_failure");
  if (json.contains("max_steps")) c.max_steps = require_uint(json, "max_steps");
  if (json.contains("outcome_mode")) {
    const std::string mode = require_string(json, "outcome_mode");
    if (mode == "dataset") {
      c.outcome_mode = OutcomeMode::kDataset;
    } else if (mode == "aligned") {
      c.outcome_mode = OutcomeMode::kAligned;
    } else {
      throw SchemaError("outcome_mode must be dataset or aligned, got '" + mode + "'");
    }
  }
  if (json.contains("aligned_threshold")) {
    c.aligned_threshold = require_number(json, "aligned_threshold");
  }
  if (json.contains("seed")) c.seed = require_uint(json, "seed");
  try {
    validate(c);
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  return c;
}

double action_std(const ActionVector& a) {
  double mean = 0.0;
  for (double v : a.values) mean += v;
  mean /= static_cast<double>(kActionDim);
  double var = 0.0;
  for (double v : a.values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(kActionDim));
}

double action_msd(const ActionVector& a) {
  double acc = 0.0;
  for (double v : a.values) acc += (v - 0.5) * (v - 0.5);
  return acc / static_cast<double>(kActionDim);
}

ActionVector aligned_target(const Embedding& e) {
  ActionVector t;
  for (std::size_t i = 0; i < kActionDim; ++i) {
    const double x = i < e.dim() ? e.values[i] : 0.0;
    t.values[i] = 1.0 / (1.0 + std::exp(-4.0 * x));
  }
  return t;
}

RewardBreakdown reward_fn(const ActionVector& action, bool terminal,
                          Outcome outcome, const EnvConfig& config,
                          const ActionVector& episode_mean_action,
                          const Embedding& embedding) {
  RewardBreakdown r;
  r.components.variety = config.c_var * action_std(action);
  r.components.extremity = -config.c_ext * action_msd(action);
  if (terminal) {
    bool success = outcome == Outcome::kSuccess;
    if (config.outcome_mode == OutcomeMode::kAligned) {
      const ActionVector target = aligned_target(embedding);
      double l1 = 0.0;
      for (std::size_t i = 0; i < kActionDim; ++i) {
        l1 += std::abs(episode_mean_action.values[i] - target.values[i]);
      }
      success = l1 / static_cast<double>(kActionDim) < config.aligned_threshold;
    }
    r.components.outcome = success ? config.r_success : config.r_failure;
  }
  r.total = r.components.outcome + r.components.variety + r.components.extremity;
  return r;
}

SalesEnv::SalesEnv(const DialogueDataset& dataset, EnvConfig config)
    : dataset_(&dataset), config_(config), rng_(config.seed) {
  validate(config_);
}

EnvState SalesEnv::reset(std::optional<std::uint64_t> seed) {
  if (dataset_->empty()) throw EmptyDataset("cannot reset: dataset has no records");
  if (seed) rng_ = Rng(*seed);
  record_ = static_cast<std::size_t>(rng_.below(dataset_->size()));
  length_ = std::min(dataset_->records[record_].conversation.size(),
                     config_.max_steps);
  t_ = 0;
  active_ = true;
  history_ = HistoryStats{};
  return make_state(dataset_->embeddings[record_], history_);
}

StepResult SalesEnv::step(const ActionVector& action) {
  if (!active_) throw EpisodeFinished("step called without an active episode");
  if (!action.is_finite()) throw NonFiniteAction("action has non-finite components");
  const ActionVector a = action.clamped();
  history_ = update_history(history_, a);
  const bool done = t_ + 1 >= length_;
  const Embedding& embedding = dataset_->embeddings[record_];
  const RewardBreakdown r =
      reward_fn(a, done, dataset_->records[record_].outcome, config_,
                ActionVector{history_.values}, embedding);
  ++t_;
  if (done) active_ = false;
  return StepResult{make_state(embedding, history_), r.total, r.components, done};
}

}  // namespace clca
