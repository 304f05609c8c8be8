// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fieldray/autodiff/adam.hpp"
#include "fieldray/autodiff/params.hpp"
#include "fieldray/autodiff/tape.hpp"
#include "fieldray/util/rng.hpp"

namespace fieldray {

// Fully connected ReLU network description: dims = [in, h1, ..., out].
// Parameters are registered as "<prefix>/w<i>" and "<prefix>/b<i>".
struct MlpSpec {
  std::vector<int> dims;

  int layer_count() const { return static_cast<int>(dims.size()) - 1; }
  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
};

// He-uniform hidden layers, Xavier-uniform output layer, zero biases.
// zero_last zeroes the final layer entirely (used by the geometric SDF
// initialization so the initial surface is exactly the analytic offset).
template <typename T>
void mlp_init(ParameterSet<T>& params, const std::string& prefix, const MlpSpec& spec,
              Stream rng, bool zero_last = false) {
  for (int l = 0; l < spec.layer_count(); ++l) {
    int fan_in = spec.dims[l], fan_out = spec.dims[l + 1];
    bool last = l + 1 == spec.layer_count();
    double bound = last ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
    Stream layer_rng = rng.fork(static_cast<uint64_t>(l));
    std::vector<T> w(static_cast<size_t>(fan_in) * fan_out);
    if (!(last && zero_last))
      for (auto& v : w) v = static_cast<T>((2.0 * layer_rng.next_double() - 1.0) * bound);
    params.add(prefix + "/w" + std::to_string(l), Shape::of(fan_in, fan_out), std::move(w));
    params.add(prefix + "/b" + std::to_string(l), Shape::of(fan_out),
               std::vector<T>(static_cast<size_t>(fan_out), T(0)));
  }
}

// Forward pass: ReLU after every hidden layer, linear output. Layer outputs
// are labeled for non-finite diagnostics.
template <typename T>
typename Tape<T>::Id mlp_forward(Tape<T>& tape, const BoundParams<T>& bound,
                                 const std::string& prefix, const MlpSpec& spec,
                                 typename Tape<T>::Id x) {
  typename Tape<T>::Id h = x;
  for (int l = 0; l < spec.layer_count(); ++l) {
    auto z = tape.add(tape.matmul(h, bound.at(prefix + "/w" + std::to_string(l))),
                      bound.at(prefix + "/b" + std::to_string(l)));
    bool last = l + 1 == spec.layer_count();
    h = last ? z : tape.relu(z);
    tape.set_label(h, prefix + "/layer" + std::to_string(l));
  }
  return h;
}

}  // namespace fieldray
