// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "fieldray/util/vec.hpp"

namespace fieldray {

// One training/rendering run. Serialized as JSON with exactly these keys;
// unknown keys are rejected so config typos fail loudly.
struct RunConfig {
  std::string method;   // "nerf" or "neus"
  std::string dataset;  // dataset directory
  int iterations = 2000;
  int rays_per_batch = 64;
  int samples_coarse = 64;  // nerf
  int samples_fine = 64;    // nerf
  int samples_neus = 96;    // neus
  double learning_rate = 5e-4;
  uint64_t seed = 1;
  Vec3 background{1.0, 1.0, 1.0};
  double eikonal_weight = 0.1;  // neus
  std::string out_dir = "out";
};

RunConfig load_run_config(const std::string& path);

// Rejects structurally invalid configs (bad method, non-positive counts,
// missing dataset directory when require_dataset).
void validate_run_config(const RunConfig& cfg, bool require_dataset = true);

std::string checkpoint_path(const RunConfig& cfg);  // out_dir/checkpoint.json

}  // namespace fieldray
