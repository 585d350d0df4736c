// Bias-corrected Adam. Moment buffers align with the parameter collection's
// insertion order; grads are zeroed after each applied step.
#pragma once

#include <cmath>
#include <vector>

#include "tfgan/model.hpp"

namespace tfgan {

template <typename S>
struct AdamState {
  int64_t t = 0;
  std::vector<std::vector<S>> m;  // first moments, one buffer per parameter
  std::vector<std::vector<S>> v;  // second moments

  void init(const ModelParams<S>& params) {
    t = 0;
    m.clear();
    v.clear();
    for (const auto& [name, p] : params.items()) {
      m.emplace_back(static_cast<size_t>(p.numel()), S(0));
      v.emplace_back(static_cast<size_t>(p.numel()), S(0));
    }
  }
};

template <typename S>
void adam_step(ModelParams<S>& params, AdamState<S>& state, double lr, double beta1,
               double beta2, double eps = 1e-8, double grad_clip = 0.0) {
  check(state.m.size() == params.size(), "adam_step: state not initialized for these params");
  for (const auto& [name, p] : params.items())
    check(p.requires_grad(), "adam_step: parameter '" + name + "' has no gradient buffer");

  double clip_scale = 1.0;
  if (grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& [name, p] : params.items())
      for (S g : p.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
    const double norm = std::sqrt(sq);
    if (norm > grad_clip) clip_scale = grad_clip / norm;
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  const S b1 = static_cast<S>(beta1), b2 = static_cast<S>(beta2);

  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params.items()[i].second;
    auto grad = p.grad();
    auto data = p.mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const int64_t n = p.numel();
#pragma omp parallel for schedule(static) if (n >= 16384)
    for (int64_t j = 0; j < n; ++j) {
      const S g = grad[static_cast<size_t>(j)] * static_cast<S>(clip_scale);
      m[static_cast<size_t>(j)] = b1 * m[static_cast<size_t>(j)] + (S(1) - b1) * g;
      v[static_cast<size_t>(j)] = b2 * v[static_cast<size_t>(j)] + (S(1) - b2) * g * g;
      const S m_hat = m[static_cast<size_t>(j)] / static_cast<S>(bc1);
      const S v_hat = v[static_cast<size_t>(j)] / static_cast<S>(bc2);
      data[static_cast<size_t>(j)] -=
          static_cast<S>(lr) * m_hat / (std::sqrt(v_hat) + static_cast<S>(eps));
    }
    p.zero_grad();
  }
}

}  // namespace tfgan
