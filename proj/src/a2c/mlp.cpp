#include "clca/mlp.hpp"

#include <cmath>

#include "clca/errors.hpp"
#include "clca/rng.hpp"

namespace clca {
namespace {

void affine(const Tensor& w, const Tensor& b, std::span<const double> x,
            std::vector<double>& out) {
  const std::size_t rows = w.shape[0];
  const std::size_t cols = w.shape[1];
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data.data() + r * cols;
    double acc = b.data[r];
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

void relu(const std::vector<double>& in, std::vector<double>& out) {
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void fill_uniform(Tensor& t, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(t.shape[1]));
  for (double& v : t.data) v = limit * (2.0 * rng.uniform() - 1.0);
}

void check_obs(const MlpParams& params, std::span<const double> obs) {
  if (obs.size() != params.obs_dim()) {
    throw DimensionMismatch("observation has length " + std::to_string(obs.size()) +
                            ", model expects " + std::to_string(params.obs_dim()));
  }
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return Tensor{std::move(shape), std::vector<double>(n, 0.0)};
}

MlpParams MlpParams::zeros(std::size_t obs_dim, std::size_t hidden) {
  MlpParams p;
  p.pi_w1 = Tensor::zeros({hidden, obs_dim});
  p.pi_b1 = Tensor::zeros({hidden});
  p.pi_w2 = Tensor::zeros({hidden, hidden});
  p.pi_b2 = Tensor::zeros({hidden});
  p.mu_w = Tensor::zeros({kActionDim, hidden});
  p.mu_b = Tensor::zeros({kActionDim});
  p.log_std = Tensor::zeros({kActionDim});
  p.v_w1 = Tensor::zeros({hidden, obs_dim});
  p.v_b1 = Tensor::zeros({hidden});
  p.v_w2 = Tensor::zeros({hidden, hidden});
  p.v_b2 = Tensor::zeros({hidden});
  p.v_w = Tensor::zeros({1, hidden});
  p.v_b = Tensor::zeros({1});
  return p;
}

MlpParams init_params(std::size_t obs_dim, std::uint64_t seed, std::size_t hidden) {
  if (obs_dim < 1) throw InvalidArgument("obs_dim must be >= 1");
  if (hidden < 1) throw InvalidArgument("hidden width must be >= 1");
  MlpParams p = MlpParams::zeros(obs_dim, hidden);
  Rng rng(seed);
  fill_uniform(p.pi_w1, rng);
  fill_uniform(p.pi_w2, rng);
  fill_uniform(p.mu_w, rng);
  for (double& v : p.mu_w.data) v *= 0.01;
  fill_uniform(p.v_w1, rng);
  fill_uniform(p.v_w2, rng);
  fill_uniform(p.v_w, rng);
  return p;
}

void trunk_forward(const Tensor& w1, const Tensor& b1, const Tensor& w2,
                   const Tensor& b2, std::span<const double> obs,
                   TrunkCache& cache) {
  affine(w1, b1, obs, cache.pre1);
  relu(cache.pre1, cache.h1);
  affine(w2, b2, cache.h1, cache.pre2);
  relu(cache.pre2, cache.h2);
}

PolicyOutput forward_policy(const MlpParams& params, std::span<const double> obs) {
  check_obs(params, obs);
  TrunkCache cache;
  trunk_forward(params.pi_w1, params.pi_b1, params.pi_w2, params.pi_b2, obs, cache);
  std::vector<double> mean;
  affine(params.mu_w, params.mu_b, cache.h2, mean);
  PolicyOutput out;
  for (std::size_t i = 0; i < kActionDim; ++i) {
    out.mean[i] = mean[i];
    out.log_std[i] = params.log_std.data[i];
  }
  return out;
}

double forward_value(const MlpParams& params, std::span<const double> obs) {
  check_obs(params, obs);
  TrunkCache cache;
  trunk_forward(params.v_w1, params.v_b1, params.v_w2, params.v_b2, obs, cache);
  std::vector<double> v;
  affine(params.v_w, params.v_b, cache.h2, v);
  return v[0];
}

void trunk_head_backward(const Tensor& w1, const Tensor& w2, const Tensor& head_w,
                         std::span<const double> obs, const TrunkCache& cache,
                         std::span<const double> d_out, Tensor& g_w1,
                         Tensor& g_b1, Tensor& g_w2, Tensor& g_b2,
                         Tensor& g_head_w, Tensor& g_head_b) {
  const std::size_t hidden = w2.shape[0];
  const std::size_t in = w1.shape[1];
  const std::size_t outs = head_w.shape[0];

  std::vector<double> d_h2(hidden, 0.0);
  for (std::size_t o = 0; o < outs; ++o) {
    const double g = d_out[o];
    if (g == 0.0) continue;
    g_head_b.data[o] += g;
    const double* wrow = head_w.data.data() + o * hidden;
    double* grow = g_head_w.data.data() + o * hidden;
    for (std::size_t j = 0; j < hidden; ++j) {
      grow[j] += g * cache.h2[j];
      d_h2[j] += wrow[j] * g;
    }
  }

  std::vector<double> d_h1(hidden, 0.0);
  for (std::size_t j = 0; j < hidden; ++j) {
    if (!(cache.pre2[j] > 0.0)) continue;
    const double g = d_h2[j];
    g_b2.data[j] += g;
    const double* wrow = w2.data.data() + j * hidden;
    double* grow = g_w2.data.data() + j * hidden;
    for (std::size_t k = 0; k < hidden; ++k) {
      grow[k] += g * cache.h1[k];
      d_h1[k] += wrow[k] * g;
    }
  }

  for (std::size_t k = 0; k < hidden; ++k) {
    if (!(cache.pre1[k] > 0.0)) continue;
    const double g = d_h1[k];
    g_b1.data[k] += g;
    double* grow = g_w1.data.data() + k * in;
    for (std::size_t c = 0; c < in; ++c) grow[c] += g * obs[c];
  }
}

}  // namespace clca
