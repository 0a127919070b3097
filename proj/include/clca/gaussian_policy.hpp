#pragma once

#include <array>

#include "clca/mlp.hpp"
#include "clca/rng.hpp"
#include "clca/sales_env.hpp"

namespace clca {

using ActionArray = std::array<double, kActionDim>;

struct SampledAction {
  ActionVector env_action;  // clamped to [0, 1]
  ActionArray raw{};        // unclamped Gaussian sample
  double log_prob = 0.0;    // density of `raw`
};

double gaussian_log_prob(const ActionArray& raw, const ActionArray& mean,
                         const ActionArray& log_std);

// Two Box-Muller pairs (four uniforms) per call, components in order.
SampledAction sample_action(const ActionArray& mean, const ActionArray& log_std,
                            Rng& rng);

double entropy(const ActionArray& log_std);

}  // namespace clca
