// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fieldray {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n - 1 denominator)
  size_t count = 0;

  double stderr_mean() const { return std::sqrt(variance / static_cast<double>(count)); }
};

inline MeanVar mean_var(std::span<const double> xs) {
  MeanVar r;
  r.count = xs.size();
  if (xs.empty()) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(xs.size());
  double q = 0.0;
  for (double x : xs) q += (x - r.mean) * (x - r.mean);
  r.variance = xs.size() > 1 ? q / static_cast<double>(xs.size() - 1) : 0.0;
  return r;
}

// One-sample Kolmogorov-Smirnov statistic against the uniform CDF on [0,1].
inline double ks_statistic_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  size_t n = xs.size();
  for (size_t i = 0; i < n; ++i) {
    double f = std::clamp(xs[i], 0.0, 1.0);
    double lo = static_cast<double>(i) / static_cast<double>(n);
    double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(f - lo, hi - f));
  }
  return d;
}

// Critical value at the 1% significance level (asymptotic, n large).
inline double ks_critical_1pct(size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace fieldray
