#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "litrank/neural/params.hpp"

namespace litrank::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::size_t step = 0;
};

// One bias-corrected Adam update of `values` in place. `t` is the 1-based step.
template <class T>
void adam_update(std::span<T> values, std::span<const T> grads, std::vector<T>& m, std::vector<T>& v,
                 std::size_t t, const AdamConfig& cfg) {
  if (m.size() != values.size()) m.assign(values.size(), T(0));
  if (v.size() != values.size()) v.assign(values.size(), T(0));
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grads.empty() ? 0.0 : static_cast<double>(grads[i]);
    m[i] = static_cast<T>(cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g);
    v[i] = static_cast<T>(cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g);
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    values[i] = static_cast<T>(values[i] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

// Applies one step to every trainable parameter from its accumulated gradient.
template <class T>
void adam_step(ParameterSet<T>& params, AdamState<T>& state, const AdamConfig& cfg) {
  auto& all = params.all();
  state.m.resize(all.size());
  state.v.resize(all.size());
  ++state.step;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!all[k].trainable) continue;
    auto& t = all[k].tensor;
    const std::span<const T> g = t.has_grad() ? std::span<const T>(t.grad()) : std::span<const T>{};
    adam_update<T>(t.data(), g, state.m[k], state.v[k], state.step, cfg);
  }
}

}  // namespace litrank::nn
