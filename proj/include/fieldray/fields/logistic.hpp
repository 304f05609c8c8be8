// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "fieldray/util/error.hpp"

namespace fieldray {

// Logistic sigmoid, overflow-safe for large |x|.
inline double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double log_logistic_cdf(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

// Logistic density with sharpness s: the derivative of x -> logistic_cdf(s x).
// Peak value s/4 at x = 0; symmetric; integrates to 1.
inline double logistic_density(double x, double s) {
  if (!(s > 0.0)) fail("field", "logistic_density: sharpness must be positive");
  double sx = s * x;
  // s * sig(sx) * (1 - sig(sx)) without evaluating the saturated factor
  double sig = logistic_cdf(sx);
  double sig_neg = logistic_cdf(-sx);
  return s * sig * sig_neg;
}

}  // namespace fieldray
