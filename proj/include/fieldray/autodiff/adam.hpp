// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fieldray/autodiff/params.hpp"
#include "fieldray/kernels/kernels.hpp"
#include "fieldray/kernels/reference.hpp"

namespace fieldray {

// Bias-corrected Adam over a named parameter set. Moment buffers are created
// lazily per parameter and shape-match it thereafter.
template <typename T>
class Adam {
 public:
  struct Options {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  explicit Adam(Options opt) : opt_(opt) {}

  const Options& options() const { return opt_; }
  int64_t step_count() const { return step_; }

  // Applies one update. `grads` must hold one correctly sized gradient per
  // parameter; a non-finite gradient rejects the whole step, naming the
  // offending parameter, and leaves params and moments untouched.
  void step(ParameterSet<T>& params, const std::map<std::string, std::vector<T>>& grads) {
    for (const auto& [name, tensor] : params.items()) {
      auto it = grads.find(name);
      if (it == grads.end()) fail("optim", "missing gradient for parameter " + name);
      if (it->second.size() != tensor.data.size())
        fail("optim", "gradient size mismatch for parameter " + name);
      for (T g : it->second)
        if (!std::isfinite(static_cast<double>(g)))
          fail("numeric", "non-finite gradient for parameter " + name + "; step rejected");
    }
    ++step_;
    T corr1 = static_cast<T>(1.0 / (1.0 - std::pow(opt_.beta1, static_cast<double>(step_))));
    T corr2 = static_cast<T>(1.0 / (1.0 - std::pow(opt_.beta2, static_cast<double>(step_))));
    for (auto& [name, tensor] : params.items()) {
      auto& m = moment1_[name];
      auto& v = moment2_[name];
      if (m.empty()) m.assign(tensor.data.size(), T(0));
      if (v.empty()) v.assign(tensor.data.size(), T(0));
      const auto& g = grads.at(name);
      if constexpr (std::is_same_v<T, float>) {
        active_kernels().adam_update(tensor.data.data(), m.data(), v.data(), g.data(),
                                     static_cast<int64_t>(g.size()), static_cast<float>(opt_.lr),
                                     static_cast<float>(opt_.beta1),
                                     static_cast<float>(opt_.beta2),
                                     static_cast<float>(opt_.eps), corr1, corr2);
      } else {
        ref::adam_update(tensor.data.data(), m.data(), v.data(), g.data(),
                         static_cast<int64_t>(g.size()), static_cast<T>(opt_.lr),
                         static_cast<T>(opt_.beta1), static_cast<T>(opt_.beta2),
                         static_cast<T>(opt_.eps), corr1, corr2);
      }
    }
  }

 private:
  Options opt_;
  int64_t step_ = 0;
  std::map<std::string, std::vector<T>> moment1_, moment2_;
};

// Reads the gradients of bound parameters back out of a tape after backward.
template <typename T>
std::map<std::string, std::vector<T>> collect_grads(Tape<T>& tape, const BoundParams<T>& bound) {
  std::map<std::string, std::vector<T>> grads;
  for (const auto& [name, id] : bound.ids) {
    auto g = tape.grad(id);
    grads[name] = std::vector<T>(g.begin(), g.end());
  }
  return grads;
}

}  // namespace fieldray
