// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "fieldray/autodiff/tape.hpp"
#include "fieldray/util/error.hpp"

namespace fieldray {

template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;
};

// Named master parameters. std::map keeps iteration order stable, which in
// turn keeps optimizer application order (and so results) deterministic.
template <typename T>
class ParameterSet {
 public:
  using Map = std::map<std::string, Tensor<T>>;

  void add(const std::string& name, Shape shape, std::vector<T> data) {
    if (static_cast<int64_t>(data.size()) != shape.count())
      fail("params", "parameter " + name + ": data does not match shape " + shape.str());
    if (items_.count(name)) fail("params", "duplicate parameter " + name);
    items_[name] = Tensor<T>{shape, std::move(data)};
  }

  bool contains(const std::string& name) const { return items_.count(name) != 0; }

  Tensor<T>& at(const std::string& name) {
    auto it = items_.find(name);
    if (it == items_.end()) fail("params", "unknown parameter " + name);
    return it->second;
  }
  const Tensor<T>& at(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) fail("params", "unknown parameter " + name);
    return it->second;
  }

  Map& items() { return items_; }
  const Map& items() const { return items_; }
  size_t size() const { return items_.size(); }

  int64_t scalar_count() const {
    int64_t n = 0;
    for (const auto& [k, v] : items_) n += v.shape.count();
    return n;
  }

 private:
  Map items_;
};

// Ids of the tape leaves a parameter set was bound to for one iteration.
template <typename T>
struct BoundParams {
  std::map<std::string, typename Tape<T>::Id> ids;

  typename Tape<T>::Id at(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) fail("params", "parameter " + name + " not bound");
    return it->second;
  }
};

// Creates one differentiable tape leaf per parameter.
template <typename T>
BoundParams<T> bind_params(Tape<T>& tape, const ParameterSet<T>& params) {
  BoundParams<T> bound;
  for (const auto& [name, tensor] : params.items())
    bound.ids[name] = tape.input(tensor.shape, tensor.data, name);
  return bound;
}

// Inference binding: parameters enter as constants, so backward work is
// skipped entirely. Graph-building code is shared between both modes.
template <typename T>
BoundParams<T> bind_constants(Tape<T>& tape, const ParameterSet<T>& params) {
  BoundParams<T> bound;
  for (const auto& [name, tensor] : params.items())
    bound.ids[name] = tape.constant(tensor.shape, tensor.data, name);
  return bound;
}

}  // namespace fieldray
