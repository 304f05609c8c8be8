// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/pipeline/render.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "fieldray/nerf/renderer.hpp"
#include "fieldray/neus/renderer.hpp"
#include "fieldray/pipeline/train.hpp"
#include "fieldray/util/error.hpp"

namespace fieldray {

namespace {

std::string sdf_prefix(const ParameterSet<float>& params) {
  if (params.items().empty()) fail("params", "checkpoint holds no parameters");
  const std::string& first = params.items().begin()->first;
  return first.substr(0, first.find('/'));
}

}  // namespace

RenderedViews render_views(const Checkpoint& ckpt, const Dataset& data, const RunConfig& cfg) {
  const bool is_nerf = cfg.method == "nerf";
  const std::string want = is_nerf ? "radiance" : "sdf";
  if (ckpt.kind != want)
    fail("config", "method " + cfg.method + " needs a '" + want + "' checkpoint, got '" +
                       ckpt.kind + "'");

  std::filesystem::create_directories(cfg.out_dir);
  NerfConfig nerf_cfg{cfg.samples_coarse, cfg.samples_fine, cfg.background};
  NeusConfig neus_cfg{cfg.samples_neus, cfg.eikonal_weight, cfg.background};
  std::string prefix = is_nerf ? "" : sdf_prefix(ckpt.params);

  RenderedViews out;
  char name[32];
  for (int v = 0; v < data.view_count(); ++v) {
    ImageF frame =
        is_nerf ? render_image(ckpt.params, data.cameras[v], nerf_cfg, cfg.seed)
                : neus_render_image(ckpt.params, data.cameras[v], neus_cfg, cfg.seed, prefix);
    std::snprintf(name, sizeof(name), "/view_%02d.png", v);
    std::string path = cfg.out_dir + name;
    write_png(path, quantize(frame));
    out.files.push_back(path);
  }
  return out;
}

MetricsReport evaluate_views(const std::vector<ImageU8>& rendered, const Dataset& truth,
                             const Vec3& background) {
  if (static_cast<int>(rendered.size()) != truth.view_count())
    fail("config", "rendered view count " + std::to_string(rendered.size()) +
                       " does not match truth view count " +
                       std::to_string(truth.view_count()));
  MetricsReport report;
  report.method = "eval";
  report.scene = truth.scene_name;
  for (int v = 0; v < truth.view_count(); ++v) {
    if (rendered[v].width != truth.width || rendered[v].height != truth.height)
      fail("config", "view " + std::to_string(v) + " is " +
                         std::to_string(rendered[v].width) + "x" +
                         std::to_string(rendered[v].height) + ", truth is " +
                         std::to_string(truth.width) + "x" + std::to_string(truth.height));
    report.held_out.push_back(view_metric(v, rendered[v], truth.images[v], background));
  }
  return report;
}

std::vector<ImageU8> load_image_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail("io", "not a directory: " + dir);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().string());
  if (names.empty()) fail("io", "no .png files in " + dir);
  std::sort(names.begin(), names.end());
  std::vector<ImageU8> out;
  out.reserve(names.size());
  for (const std::string& n : names) out.push_back(read_png(n));
  return out;
}

}  // namespace fieldray
