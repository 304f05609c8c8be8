// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/pipeline/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "fieldray/util/error.hpp"

namespace fieldray {

using nlohmann::json;

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("config", "cannot open config " + path);
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) fail("config", "malformed JSON in " + path);

  static const std::set<std::string> known = {
      "method",       "dataset",       "iterations",    "rays_per_batch",
      "samples_coarse", "samples_fine", "samples_neus", "learning_rate",
      "seed",         "background",    "eikonal_weight", "out_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail("config", "unknown config key '" + key + "' in " + path);

  RunConfig cfg;
  try {
    if (j.contains("method")) cfg.method = j["method"].get<std::string>();
    if (j.contains("dataset")) cfg.dataset = j["dataset"].get<std::string>();
    if (j.contains("iterations")) cfg.iterations = j["iterations"].get<int>();
    if (j.contains("rays_per_batch")) cfg.rays_per_batch = j["rays_per_batch"].get<int>();
    if (j.contains("samples_coarse")) cfg.samples_coarse = j["samples_coarse"].get<int>();
    if (j.contains("samples_fine")) cfg.samples_fine = j["samples_fine"].get<int>();
    if (j.contains("samples_neus")) cfg.samples_neus = j["samples_neus"].get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("eikonal_weight")) cfg.eikonal_weight = j["eikonal_weight"].get<double>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("background")) {
      auto bg = j["background"].get<std::vector<double>>();
      if (bg.size() != 3) fail("config", "background must be [r,g,b]");
      cfg.background = {bg[0], bg[1], bg[2]};
    }
  } catch (const json::exception& e) {
    fail("config", std::string("config ") + path + ": " + e.what());
  }
  return cfg;
}

void validate_run_config(const RunConfig& cfg, bool require_dataset) {
  if (cfg.method != "nerf" && cfg.method != "neus")
    fail("config", "method must be \"nerf\" or \"neus\", got \"" + cfg.method + "\"");
  if (cfg.iterations < 1) fail("config", "iterations must be >= 1");
  if (cfg.rays_per_batch < 1) fail("config", "rays_per_batch must be >= 1");
  if (cfg.samples_coarse < 2 || cfg.samples_fine < 0 || cfg.samples_neus < 2)
    fail("config", "sample counts out of range");
  if (!(cfg.learning_rate > 0.0)) fail("config", "learning_rate must be positive");
  if (cfg.eikonal_weight < 0.0) fail("config", "eikonal_weight must be >= 0");
  for (double c : {cfg.background.x, cfg.background.y, cfg.background.z})
    if (c < 0.0 || c > 1.0) fail("config", "background channels must be in [0,1]");
  if (cfg.out_dir.empty()) fail("config", "out_dir must be set");
  if (require_dataset && !std::filesystem::is_directory(cfg.dataset))
    fail("config", "dataset directory not found: " + cfg.dataset);
}

std::string checkpoint_path(const RunConfig& cfg) {
  return (std::filesystem::path(cfg.out_dir) / "checkpoint.json").string();
}

}  // namespace fieldray
