// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace fieldray {

// Positional encoding: per input scalar p the contiguous block
//   [sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^L pi p), cos(2^L pi p)],
// blocks concatenated in input order. Output length = dim * 2(L+1), every
// entry in [-1, 1]. Levels use the double-angle recurrence in 64-bit so
// only the base frequency touches libm.
inline void positional_encode_scalar(double p, int levels, float* out) {
  double s = std::sin(std::numbers::pi * p);
  double c = std::cos(std::numbers::pi * p);
  for (int l = 0; l <= levels; ++l) {
    out[2 * l] = static_cast<float>(std::clamp(s, -1.0, 1.0));
    out[2 * l + 1] = static_cast<float>(std::clamp(c, -1.0, 1.0));
    double s2 = 2.0 * s * c;
    double c2 = 1.0 - 2.0 * s * s;
    s = s2;
    c = c2;
  }
}

inline std::vector<float> positional_encode(std::span<const double> p, int levels) {
  int per = 2 * (levels + 1);
  std::vector<float> out(p.size() * static_cast<size_t>(per));
  for (size_t i = 0; i < p.size(); ++i)
    positional_encode_scalar(p[i], levels, &out[i * static_cast<size_t>(per)]);
  return out;
}

inline int encoding_width(int dim, int levels) { return dim * 2 * (levels + 1); }

}  // namespace fieldray
