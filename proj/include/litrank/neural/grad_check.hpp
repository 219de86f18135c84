#pragma once
// Central finite-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "litrank/neural/tensor.hpp"

namespace litrank::nn {

struct GradCheckOptions {
  double step = 1e-5;
  // Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst;  // "param#index analytic numeric"
};

// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

// `f` rebuilds the graph from `params` and returns a scalar. The parameters'
// values are perturbed in place and restored afterwards.
template <class F>
GradCheckResult grad_check(F&& f, std::vector<Tensor<double>> params, const GradCheckOptions& opts = {}) {
  for (auto& p : params) p.zero_grad();
  const auto out = f();
  if (!std::isfinite(out.item())) throw std::runtime_error("grad_check: non-finite function value");
  out.backward();

  GradCheckResult res;
  std::mt19937_64 rng(opts.seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    std::vector<std::size_t> coords(p.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (opts.max_coords_per_param != 0 && coords.size() > opts.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_param);
    }
    for (const auto i : coords) {
      auto values = p.data();
      const double saved = values[i];
      values[i] = saved + opts.step;
      const double up = f().item();
      values[i] = saved - opts.step;
      const double down = f().item();
      values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(analytic[i]))
        throw std::runtime_error("grad_check: non-finite value at parameter " + std::to_string(pi));
      const double numeric = (up - down) / (2.0 * opts.step);
      const double err = relative_error(analytic[i], numeric);
      ++res.coords_checked;
      if (res.worst.empty() || err > res.max_rel_error) {
        res.max_rel_error = err;
        res.worst = std::to_string(pi) + "#" + std::to_string(i) + " analytic=" + std::to_string(analytic[i]) +
                    " numeric=" + std::to_string(numeric);
      }
    }
  }
  return res;
}

}  // namespace litrank::nn
