// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fieldray {

// 64-bit finalizer (splitmix64). Bijective; used both as the stream
// generator step and as the fork combiner.
constexpr uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Compile-time FNV-1a for naming stream purposes ("batch", "coarse", ...).
constexpr uint64_t tag(const char* s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (; *s; ++s) h = (h ^ static_cast<uint64_t>(static_cast<unsigned char>(*s))) * 0x100000001B3ull;
  return h;
}

// Counter-based pseudo random stream. Forking derives an independent
// substream from a tag word, so the draw sequence of any consumer depends
// only on (seed, fork path), never on scheduling or evaluation order.
class Stream {
 public:
  Stream() : Stream(0) {}
  explicit Stream(uint64_t seed) : state_(mix64(seed + kGolden)) {}

  Stream fork(uint64_t t) const {
    Stream s;
    s.state_ = mix64(state_ ^ mix64(t + kGolden));
    return s;
  }
  Stream fork(const char* name) const { return fork(tag(name)); }

  uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; generates pairs, caches the second.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    // Guard against log(0).
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fieldray
