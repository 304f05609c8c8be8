// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fieldray/autodiff/checkpoint.hpp"
#include "fieldray/oracle/dataset.hpp"
#include "fieldray/pipeline/config.hpp"
#include "fieldray/pipeline/metrics.hpp"

namespace fieldray {

// Views excluded from training: {0, 8} of the 16-view protocol, clipped to
// what the dataset actually has (always keeping at least one training view).
std::vector<int> held_out_views(int view_count);

struct TrainResult {
  Checkpoint checkpoint;
  MetricsReport report;
  double wall_seconds = 0.0;
};

// Full training run: optimize, write out_dir/checkpoint.json, render the
// held-out views, write metrics.json and timing.json. Deterministic output
// (except timing.json) for a fixed config and seed.
TrainResult train(const RunConfig& cfg);

// Per-view PSNR/hf metrics of rendered (composited) frames against dataset
// ground truth composited over `background`.
ViewMetric view_metric(int view, const ImageU8& rendered, const ImageU8& truth,
                       const Vec3& background);

// Mean/max |analytic SDF| over extracted mesh vertices; unavailable when the
// scene has no signed distance (density scenes or external datasets).
MeshErrorStats mesh_error_stats(const Checkpoint& ckpt, const std::string& scene_name,
                                int resolution);

}  // namespace fieldray
