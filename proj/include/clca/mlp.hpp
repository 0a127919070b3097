#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "clca/sales_env.hpp"

namespace clca {

inline constexpr std::size_t kDefaultHidden = 64;
inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  static Tensor zeros(std::vector<std::size_t> shape);

  std::size_t size() const { return data.size(); }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Policy trunk + mean head + state-independent log-std, and a separate value
// trunk + scalar head. Weight matrices are row-major (out x in).
struct MlpParams {
  Tensor pi_w1, pi_b1, pi_w2, pi_b2, mu_w, mu_b, log_std;
  Tensor v_w1, v_b1, v_w2, v_b2, v_w, v_b;

  static MlpParams zeros(std::size_t obs_dim, std::size_t hidden = kDefaultHidden);

  std::size_t obs_dim() const { return pi_w1.shape.at(1); }
  std::size_t hidden() const { return pi_w1.shape.at(0); }

  // Calls f(name, tensor) for every tensor in declaration order.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;

 private:
  template <class Self, class F>
  static void visit(Self& p, F& f) {
    f(std::string_view("policy.w1"), p.pi_w1);
    f(std::string_view("policy.b1"), p.pi_b1);
    f(std::string_view("policy.w2"), p.pi_w2);
    f(std::string_view("policy.b2"), p.pi_b2);
    f(std::string_view("policy.mean_w"), p.mu_w);
    f(std::string_view("policy.mean_b"), p.mu_b);
    f(std::string_view("policy.log_std"), p.log_std);
    f(std::string_view("value.w1"), p.v_w1);
    f(std::string_view("value.b1"), p.v_b1);
    f(std::string_view("value.w2"), p.v_w2);
    f(std::string_view("value.b2"), p.v_b2);
    f(std::string_view("value.out_w"), p.v_w);
    f(std::string_view("value.out_b"), p.v_b);
  }
};

// Uniform(+-sqrt(6/fan_in)) weights drawn in declaration order from
// Rng(seed); zero biases; mean head scaled by 0.01; log_std = 0.
MlpParams init_params(std::size_t obs_dim, std::uint64_t seed,
                      std::size_t hidden = kDefaultHidden);

struct PolicyOutput {
  std::array<double, kActionDim> mean{};
  std::array<double, kActionDim> log_std{};
};

PolicyOutput forward_policy(const MlpParams& params, std::span<const double> obs);
double forward_value(const MlpParams& params, std::span<const double> obs);

// Activations of one two-layer ReLU trunk, kept for backpropagation.
struct TrunkCache {
  std::vector<double> pre1, h1, pre2, h2;
};

void trunk_forward(const Tensor& w1, const Tensor& b1, const Tensor& w2,
                   const Tensor& b2, std::span<const double> obs,
                   TrunkCache& cache);

// Accumulates gradients of a linear head on top of a trunk into the grad
// tensors, given d(loss)/d(head output).
void trunk_head_backward(const Tensor& w1, const Tensor& w2, const Tensor& head_w,
                         std::span<const double> obs, const TrunkCache& cache,
                         std::span<const double> d_out, Tensor& g_w1,
                         Tensor& g_b1, Tensor& g_w2, Tensor& g_b2,
                         Tensor& g_head_w, Tensor& g_head_b);

}  // namespace clca
