// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fieldray/diffusion/schedule.hpp"
#include "fieldray/util/error.hpp"
#include "fieldray/util/rng.hpp"

namespace fieldray {

using ViewState = std::vector<double>;

struct MultiviewState {
  std::vector<ViewState> x;  // N views, identical shapes
  int t = 0;                 // current step, 0 = fully denoised
};

// Joint predictor: sees all views at once, returns one noise estimate per
// view. The cross-view dependence is what synchronizes the chains.
using JointNoisePredictor =
    std::function<std::vector<ViewState>(const std::vector<ViewState>&, int)>;

// Standard denoising posterior mean, one view at a time:
// mu = (x_t - beta_t / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t).
inline std::vector<ViewState> posterior_mean(const std::vector<ViewState>& x,
                                             const std::vector<ViewState>& eps_hat, int t,
                                             const DiffusionSchedule& sched) {
  if (eps_hat.size() != x.size()) fail("config", "posterior_mean: view count mismatch");
  double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_at(t));
  double coef = sched.beta_at(t) / std::sqrt(1.0 - sched.alpha_bar_at(t));
  std::vector<ViewState> mu(x.size());
  for (size_t n = 0; n < x.size(); ++n) {
    if (eps_hat[n].size() != x[n].size()) fail("config", "posterior_mean: shape mismatch");
    mu[n].resize(x[n].size());
    for (size_t i = 0; i < x[n].size(); ++i)
      mu[n][i] = inv_sqrt_alpha * (x[n][i] - coef * eps_hat[n][i]);
  }
  return mu;
}

// One reverse step t -> t-1. Noise streams hang off the chain stream as
// fork("step").fork(t).fork(view) (or fork("shared") when all views must see
// the same draw), so results do not depend on evaluation order. The final
// step (t = 1) is deterministic.
inline MultiviewState sync_reverse_step(const MultiviewState& state,
                                        const JointNoisePredictor& predictor,
                                        const DiffusionSchedule& sched, const Stream& chain,
                                        bool shared_noise = false) {
  int t = state.t;
  if (t < 1 || t > sched.steps) fail("config", "sync_reverse_step: step out of range");
  auto eps_hat = predictor(state.x, t);
  if (eps_hat.size() != state.x.size())
    fail("config", "predictor returned wrong number of views");
  MultiviewState next;
  next.t = t - 1;
  next.x = posterior_mean(state.x, eps_hat, t, sched);
  if (t == 1) return next;

  double sigma = sched.sigma_at(t);
  Stream step = chain.fork("step").fork(static_cast<uint64_t>(t));
  if (shared_noise) {
    Stream shared = step.fork("shared");
    std::vector<double> z(next.x[0].size());
    for (auto& v : z) v = shared.next_normal();
    for (auto& view : next.x)
      for (size_t i = 0; i < view.size(); ++i) view[i] += sigma * z[i];
  } else {
    for (size_t n = 0; n < next.x.size(); ++n) {
      Stream vs = step.fork(static_cast<uint64_t>(n));
      for (auto& v : next.x[n]) v += sigma * vs.next_normal();
    }
  }
  return next;
}

// Full reverse chain from x_T ~ N(0, I).
inline std::vector<ViewState> sample(const JointNoisePredictor& predictor, int n_views, int dim,
                                     const DiffusionSchedule& sched, uint64_t seed,
                                     bool shared_noise = false) {
  if (n_views < 1 || dim < 1) fail("config", "sample: need at least one view and one element");
  Stream chain(seed);
  MultiviewState state;
  state.t = sched.steps;
  state.x.resize(static_cast<size_t>(n_views));
  Stream init = chain.fork("init");
  for (int n = 0; n < n_views; ++n) {
    Stream vs = init.fork(static_cast<uint64_t>(n));
    state.x[n].resize(static_cast<size_t>(dim));
    for (auto& v : state.x[n]) v = vs.next_normal();
  }
  while (state.t > 0) state = sync_reverse_step(state, predictor, sched, chain, shared_noise);
  return state.x;
}

// Plain single-view DDPM chain written out longhand. sample() with N = 1
// must match it bit for bit; keeping the loop separate is what makes that a
// real check on the multiview plumbing.
template <typename F>  // F: (const ViewState&, int t) -> ViewState
std::vector<double> reference_single_view_chain(F&& predict, int dim,
                                                const DiffusionSchedule& sched, uint64_t seed) {
  Stream chain(seed);
  ViewState x(static_cast<size_t>(dim));
  Stream init = chain.fork("init").fork(uint64_t{0});
  for (auto& v : x) v = init.next_normal();
  for (int t = sched.steps; t >= 1; --t) {
    ViewState eps = predict(x, t);
    double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_at(t));
    double coef = sched.beta_at(t) / std::sqrt(1.0 - sched.alpha_bar_at(t));
    for (size_t i = 0; i < x.size(); ++i) x[i] = inv_sqrt_alpha * (x[i] - coef * eps[i]);
    if (t > 1) {
      Stream vs = chain.fork("step").fork(static_cast<uint64_t>(t)).fork(uint64_t{0});
      double sigma = sched.sigma_at(t);
      for (auto& v : x) v += sigma * vs.next_normal();
    }
  }
  return x;
}

// --- predictors -------------------------------------------------------------

// Optimal predictor for a per-view scalar Gaussian target N(m, v), derived by
// conditioning the joint Gaussian of (x_0, x_t):
//   eps_hat = sqrt(1-abar) * (x_t - sqrt(abar) m) / (abar v + 1 - abar).
inline JointNoisePredictor make_gaussian_predictor(DiffusionSchedule sched, double m,
                                                   double v) {
  return [sched = std::move(sched), m, v](const std::vector<ViewState>& x, int t) {
    double ab = sched.alpha_bar_at(t);
    double scale = std::sqrt(1.0 - ab) / (ab * v + 1.0 - ab);
    double sm = std::sqrt(ab) * m;
    std::vector<ViewState> eps(x.size());
    for (size_t n = 0; n < x.size(); ++n) {
      eps[n].resize(x[n].size());
      for (size_t i = 0; i < x[n].size(); ++i) eps[n][i] = scale * (x[n][i] - sm);
    }
    return eps;
  };
}

// Lifts a single-view predictor to the joint interface with no coupling.
inline JointNoisePredictor make_independent_predictor(
    std::function<ViewState(const ViewState&, int)> single) {
  return [single = std::move(single)](const std::vector<ViewState>& x, int t) {
    std::vector<ViewState> eps(x.size());
    for (size_t n = 0; n < x.size(); ++n) eps[n] = single(x[n], t);
    return eps;
  };
}

// Synchronizing wrapper. Each view's noise estimate implies a clean-signal
// estimate x0 = (x_t - sqrt(1-abar) eps) / sqrt(abar); those estimates are
// mixed toward their cross-view mean with weight kappa and converted back.
// kappa = 0 decouples, kappa = 1 imposes a fully shared consensus signal.
// The mixing must happen on the implied clean signal, not on the raw noise
// estimates: averaging eps directly cancels the per-view correction term and
// drifts the views apart instead of together.
inline JointNoisePredictor make_view_averaging_predictor(JointNoisePredictor base,
                                                         DiffusionSchedule sched, double kappa) {
  if (kappa < 0.0 || kappa > 1.0) fail("config", "view-averaging weight must be in [0,1]");
  return [base = std::move(base), sched = std::move(sched),
          kappa](const std::vector<ViewState>& x, int t) {
    std::vector<ViewState> eps = base(x, t);
    if (eps.empty()) return eps;
    double ab = sched.alpha_bar_at(t);
    double sa = std::sqrt(ab), sb = std::sqrt(1.0 - ab);
    size_t views = eps.size(), dim = eps[0].size();
    std::vector<std::vector<double>> x0(views, std::vector<double>(dim));
    std::vector<double> mean(dim, 0.0);
    for (size_t n = 0; n < views; ++n)
      for (size_t i = 0; i < dim; ++i) {
        x0[n][i] = (x[n][i] - sb * eps[n][i]) / sa;
        mean[i] += x0[n][i];
      }
    for (auto& v : mean) v /= static_cast<double>(views);
    for (size_t n = 0; n < views; ++n)
      for (size_t i = 0; i < dim; ++i) {
        double mixed = (1.0 - kappa) * x0[n][i] + kappa * mean[i];
        eps[n][i] = (x[n][i] - sa * mixed) / sb;
      }
    return eps;
  };
}

}  // namespace fieldray
