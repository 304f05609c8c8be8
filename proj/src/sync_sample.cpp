// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/pipeline/sync_demo.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fieldray/util/error.hpp"

namespace fieldray {

std::string SyncSampleStats::to_json(const SyncSampleOptions& opt) const {
  nlohmann::json j;
  j["views"] = opt.views;
  j["dim"] = opt.dim;
  j["steps"] = opt.steps;
  j["mode"] = opt.mode;
  j["kappa"] = opt.kappa;
  j["mean"] = opt.mean;
  j["variance"] = opt.variance;
  j["shared_noise"] = opt.shared_noise;
  j["seed"] = opt.seed;
  j["view_mean"] = view_mean;
  j["view_var"] = view_var;
  j["cross_view_rms"] = cross_view_rms;
  return j.dump(2) + "\n";
}

SyncSampleStats run_sync_sample(const SyncSampleOptions& opt) {
  if (opt.views < 1) fail("config", "views must be >= 1");
  if (opt.dim < 1) fail("config", "dim must be >= 1");
  if (opt.variance <= 0.0) fail("config", "variance must be positive");
  if (opt.mode != "independent" && opt.mode != "averaging")
    fail("config", "unknown mode '" + opt.mode + "' (independent|averaging)");

  DiffusionSchedule sched = make_schedule(opt.steps, 1e-4, 0.02);
  JointNoisePredictor predictor = make_gaussian_predictor(sched, opt.mean, opt.variance);
  if (opt.mode == "averaging")
    predictor = make_view_averaging_predictor(std::move(predictor), sched, opt.kappa);

  SyncSampleStats stats;
  stats.samples = sample(predictor, opt.views, opt.dim, sched, opt.seed, opt.shared_noise);

  stats.view_mean.resize(opt.views);
  stats.view_var.resize(opt.views);
  for (int v = 0; v < opt.views; ++v) {
    double s = 0.0, s2 = 0.0;
    for (double x : stats.samples[v]) {
      s += x;
      s2 += x * x;
    }
    double m = s / opt.dim;
    stats.view_mean[v] = m;
    stats.view_var[v] = s2 / opt.dim - m * m;
  }
  double pair_sum = 0.0;
  int pairs = 0;
  for (int a = 0; a < opt.views; ++a)
    for (int b = a + 1; b < opt.views; ++b) {
      double d2 = 0.0;
      for (int k = 0; k < opt.dim; ++k) {
        double d = stats.samples[a][k] - stats.samples[b][k];
        d2 += d * d;
      }
      pair_sum += std::sqrt(d2 / opt.dim);
      ++pairs;
    }
  stats.cross_view_rms = pairs > 0 ? pair_sum / pairs : 0.0;

  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    std::string csv_path = opt.out_dir + "/samples.csv";
    std::ofstream csv(csv_path);
    if (!csv) fail("io", "cannot open " + csv_path);
    csv << "view,component,value\n";
    char line[64];
    for (int v = 0; v < opt.views; ++v)
      for (int k = 0; k < opt.dim; ++k) {
        std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", v, k, stats.samples[v][k]);
        csv << line;
      }
    if (!csv.flush()) fail("io", "write failed: " + csv_path);

    std::string stats_path = opt.out_dir + "/stats.json";
    std::ofstream js(stats_path);
    if (!js) fail("io", "cannot open " + stats_path);
    js << stats.to_json(opt);
    if (!js.flush()) fail("io", "write failed: " + stats_path);
  }
  return stats;
}

}  // namespace fieldray
