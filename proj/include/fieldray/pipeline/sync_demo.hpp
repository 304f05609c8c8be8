// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldray/diffusion/sampler.hpp"

namespace fieldray {

// Driver for the sync-sample subcommand: reverse-diffuses a multiview state
// under the Gaussian-oracle predictor, optionally coupling views through the
// view-averaging wrapper and/or shared per-step noise.
struct SyncSampleOptions {
  int views = 4;
  int dim = 8;
  int steps = 100;
  std::string mode = "averaging";  // "independent" or "averaging"
  double kappa = 0.5;              // averaging strength (averaging mode only)
  double mean = 0.0;               // oracle target N(mean, variance I)
  double variance = 1.0;
  bool shared_noise = false;
  uint64_t seed = 1;
  std::string out_dir;  // empty: compute only, write nothing
};

struct SyncSampleStats {
  std::vector<ViewState> samples;      // final state, one vector per view
  std::vector<double> view_mean;       // per-view component mean
  std::vector<double> view_var;        // per-view population variance
  double cross_view_rms = 0.0;         // mean pairwise RMS distance
  std::string to_json(const SyncSampleOptions& opt) const;
};

// Runs the chain and, when out_dir is set, writes samples.csv (long format:
// view,component,value) and stats.json.
SyncSampleStats run_sync_sample(const SyncSampleOptions& opt);

}  // namespace fieldray
