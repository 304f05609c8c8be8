// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "fieldray/autodiff/params.hpp"

namespace fieldray {

// JSON checkpoint: {"version": 1, "kind": "radiance"|"sdf", "meta": {...},
// "params": {name: {"shape": [...], "data": [row-major values]}}}.
struct Checkpoint {
  int version = 1;
  std::string kind;
  std::string meta_json;  // free-form JSON object echoed back on load
  ParameterSet<float> params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fieldray
