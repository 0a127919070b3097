#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace clca {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Backward recursion; done_t masks the bootstrap from step t+1. The value
// after the last step is `bootstrap_value`.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value,
                      double gamma, double lambda);

}  // namespace clca
