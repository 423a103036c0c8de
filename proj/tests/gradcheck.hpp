#pragma once

// Central finite-difference gradient oracle. Independent of the backward
// pass: it only re-runs forward passes with perturbed parameter values.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "advtag/tensor.hpp"

namespace gradcheck {

using advtag::TensorPtr;

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

/// forward: rebuilds the whole graph from current parameter values and
/// returns the scalar loss value.
inline double fd_gradient(const TensorPtr& param, size_t idx,
                          const std::function<double()>& forward, double h = 1e-5) {
  const double orig = param->values[idx];
  param->values[idx] = orig + h;
  const double lp = forward();
  param->values[idx] = orig - h;
  const double lm = forward();
  param->values[idx] = orig;
  return (lp - lm) / (2.0 * h);
}

/// Runs backward through `build` once, then checks every coordinate of
/// every parameter against central differences. Returns the max relative
/// error observed.
///
/// Kink handling: at a relu-style kink the central difference returns the
/// average of the two one-sided slopes, which no correct subgradient can
/// match. When the central check fails, the coordinate is accepted iff the
/// analytic gradient matches the forward OR backward one-sided difference
/// (a valid subgradient); a genuinely wrong gradient matches neither.
///
/// grad_scale: expected ratio analytic/fd. 1.0 for ordinary graphs; a path
/// through grad_reverse(x, lambda) is *defined* to carry -lambda times the
/// true gradient, so parameters behind a reversal are checked with
/// grad_scale = -lambda.
inline double max_rel_err(const std::vector<TensorPtr>& params,
                          const std::function<advtag::TensorPtr(advtag::Graph&)>& build,
                          double h = 1e-5, double grad_scale = 1.0) {
  for (const auto& p : params) {
    p->ensure_grad();
    p->zero_grad();
  }
  advtag::Graph g;
  auto loss = build(g);
  g.backward(loss);
  auto forward = [&]() {
    advtag::Graph g2;
    return build(g2)->values[0];
  };
  double worst = 0.0;
  for (const auto& p : params)
    for (size_t i = 0; i < p->size(); ++i) {
      double e = rel_err(p->grad[i], grad_scale * fd_gradient(p, i, forward, h));
      if (e > 1e-4) {
        const double orig = p->values[i];
        const double f0 = forward();
        p->values[i] = orig + h;
        const double fp = forward();
        p->values[i] = orig - h;
        const double fm = forward();
        p->values[i] = orig;
        const double one_sided = std::min(rel_err(p->grad[i], grad_scale * (fp - f0) / h),
                                          rel_err(p->grad[i], grad_scale * (f0 - fm) / h));
        if (one_sided <= 1e-3) continue;  // kink: analytic is a valid one-sided slope
      }
      worst = std::max(worst, e);
    }
  return worst;
}

inline TensorPtr random_tensor(std::vector<int> shape, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  auto t = advtag::make_zeros(std::move(shape));
  for (auto& v : t->values) v = u(rng);
  return t;
}

}  // namespace gradcheck
