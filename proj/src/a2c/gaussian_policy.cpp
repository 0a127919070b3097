#include "clca/gaussian_policy.hpp"

#include <cmath>
#include <numbers>

namespace clca {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

double gaussian_log_prob(const ActionArray& raw, const ActionArray& mean,
                         const ActionArray& log_std) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kActionDim; ++i) {
    const double var = std::exp(2.0 * log_std[i]);
    const double d = raw[i] - mean[i];
    acc += -(d * d) / (2.0 * var) - log_std[i] - kHalfLog2Pi;
  }
  return acc;
}

SampledAction sample_action(const ActionArray& mean, const ActionArray& log_std,
                            Rng& rng) {
  SampledAction s;
  for (std::size_t i = 0; i < kActionDim; i += 2) {
    const auto z = rng.normal_pair();
    s.raw[i] = mean[i] + std::exp(log_std[i]) * z[0];
    s.raw[i + 1] = mean[i + 1] + std::exp(log_std[i + 1]) * z[1];
  }
  s.env_action = ActionVector{s.raw}.clamped();
  s.log_prob = gaussian_log_prob(s.raw, mean, log_std);
  return s;
}

double entropy(const ActionArray& log_std) {
  double acc = 0.0;
  for (double ls : log_std) acc += 0.5 + kHalfLog2Pi + ls;
  return acc;
}

}  // namespace clca
