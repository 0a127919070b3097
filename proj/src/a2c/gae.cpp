#include "clca/gae.hpp"

#include "clca/errors.hpp"

namespace clca {

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value,
                      double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw DimensionMismatch("rewards, values and dones must have equal length");
  }
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_advantage = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const double not_done = dones[k] != 0 ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * not_done * next_value - values[k];
    next_advantage = delta + gamma * lambda * not_done * next_advantage;
    out.advantages[k] = next_advantage;
    out.returns[k] = next_advantage + values[k];
    next_value = values[k];
  }
  return out;
}

}  // namespace clca
