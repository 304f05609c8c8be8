// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "fieldray/util/error.hpp"

namespace fieldray {

// Linear beta schedule. Arrays are stored for t = 1..steps at index t-1;
// the accessors take the 1-based step index used everywhere else.
struct DiffusionSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product of alpha
  std::vector<double> sigma;      // reverse-step noise scale, sigma_t^2 = beta_t

  double beta_at(int t) const { return beta[static_cast<size_t>(t) - 1]; }
  double alpha_at(int t) const { return alpha[static_cast<size_t>(t) - 1]; }
  double alpha_bar_at(int t) const { return alpha_bar[static_cast<size_t>(t) - 1]; }
  double sigma_at(int t) const { return sigma[static_cast<size_t>(t) - 1]; }
};

inline DiffusionSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1 || !(beta_start > 0.0) || !(beta_end >= beta_start) || !(beta_end < 1.0))
    fail("config", "invalid diffusion schedule parameters");
  DiffusionSchedule s;
  s.steps = steps;
  s.beta.resize(static_cast<size_t>(steps));
  s.alpha.resize(s.beta.size());
  s.alpha_bar.resize(s.beta.size());
  s.sigma.resize(s.beta.size());
  double prod = 1.0;
  for (int t = 1; t <= steps; ++t) {
    double frac = steps > 1 ? static_cast<double>(t - 1) / (steps - 1) : 0.0;
    double b = beta_start + (beta_end - beta_start) * frac;
    prod *= 1.0 - b;
    s.beta[t - 1] = b;
    s.alpha[t - 1] = 1.0 - b;
    s.alpha_bar[t - 1] = prod;
    s.sigma[t - 1] = std::sqrt(b);
  }
  return s;
}

// Closed-form forward jump: x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps.
inline std::vector<double> forward_perturb(const std::vector<double>& x0, int t,
                                           const std::vector<double>& eps,
                                           const DiffusionSchedule& sched) {
  if (t < 1 || t > sched.steps) fail("config", "forward_perturb: step out of range");
  if (eps.size() != x0.size()) fail("config", "forward_perturb: shape mismatch");
  double ab = sched.alpha_bar_at(t);
  double sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
  std::vector<double> out(x0.size());
  for (size_t i = 0; i < x0.size(); ++i) out[i] = sa * x0[i] + sb * eps[i];
  return out;
}

}  // namespace fieldray
