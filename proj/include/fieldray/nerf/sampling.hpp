// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldray/util/error.hpp"
#include "fieldray/util/rng.hpp"

namespace fieldray {

// One uniform draw per equal-width bin over [t_near, t_far]; sorted by
// construction.
inline std::vector<double> stratified_samples(Stream& rng, double t_near, double t_far, int n) {
  if (n <= 0 || !(t_far > t_near)) fail("render", "bad stratified sampling range");
  std::vector<double> t(static_cast<size_t>(n));
  double width = (t_far - t_near) / n;
  for (int i = 0; i < n; ++i) t[i] = t_near + (i + rng.next_double()) * width;
  return t;
}

// Piecewise-constant density over the coarse bins: bin i spans
// [t_coarse[i], t_coarse[i+1]) and carries mass weights[i]. The last coarse
// weight has no bin to its right and is dropped. Uniform weights therefore
// give exactly the uniform distribution on [t_0, t_{n-1}].
//
// Draws are iid inverse-CDF samples. Returns empty when total mass is zero
// (callers fall back to stratified sampling).
inline std::vector<double> inverse_cdf_sample(const std::vector<double>& t_coarse,
                                              const std::vector<double>& weights, Stream& rng,
                                              int n_draws) {
  size_t n_bins = t_coarse.size() >= 2 ? t_coarse.size() - 1 : 0;
  if (weights.size() < n_bins) fail("render", "resampling weights shorter than bins");
  std::vector<double> cum(n_bins + 1, 0.0);
  for (size_t i = 0; i < n_bins; ++i) {
    double w = weights[i];
    if (!(w >= 0.0)) fail("render", "negative or non-finite resampling weight");
    cum[i + 1] = cum[i] + w;
  }
  double total = cum.back();
  if (total <= 0.0) return {};

  std::vector<double> out(static_cast<size_t>(n_draws));
  for (auto& t : out) {
    double u = rng.next_double() * total;
    // first bin whose upper cumulative exceeds u; zero-mass bins are skipped
    size_t k = static_cast<size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    k = std::min(k > 0 ? k - 1 : 0, n_bins - 1);
    while (k + 1 < n_bins && cum[k + 1] <= u) ++k;
    double mass = cum[k + 1] - cum[k];
    double frac = mass > 0.0 ? (u - cum[k]) / mass : 0.5;
    t = t_coarse[k] + frac * (t_coarse[k + 1] - t_coarse[k]);
  }
  return out;
}

// Fine pass locations: coarse points plus weight-guided draws, merged sorted.
// Zero total weight degrades to stratified coverage of the full range.
inline std::vector<double> hierarchical_resample(const std::vector<double>& t_coarse,
                                                 const std::vector<double>& weights, Stream& rng,
                                                 int n_fine, double t_near, double t_far) {
  std::vector<double> fine = inverse_cdf_sample(t_coarse, weights, rng, n_fine);
  if (fine.empty() && n_fine > 0) fine = stratified_samples(rng, t_near, t_far, n_fine);
  std::vector<double> merged = t_coarse;
  merged.insert(merged.end(), fine.begin(), fine.end());
  std::sort(merged.begin(), merged.end());
  return merged;
}

}  // namespace fieldray
