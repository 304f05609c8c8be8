// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/oracle/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fieldray/util/error.hpp"

namespace fieldray {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string view_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "view_%03d.png", index);
  return buf;
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open " + path.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail("io", "malformed JSON in " + path.string());
  return j;
}

}  // namespace

void write_dataset(const PosedImageSet& set, const std::string& dir) {
  if (set.images.size() != set.cameras.size() || set.cameras.size() < 2)
    fail("io", "posed image set needs matching cameras and at least 2 views");
  fs::create_directories(dir);
  const Camera& c0 = set.cameras[0];

  json cams;
  cams["width"] = c0.width;
  cams["height"] = c0.height;
  cams["fov_y_degrees"] = c0.fov_y_deg;
  cams["t_near"] = c0.t_near;
  cams["t_far"] = c0.t_far;
  cams["frames"] = json::array();
  for (size_t v = 0; v < set.cameras.size(); ++v) {
    const Camera& cam = set.cameras[v];
    if (cam.width != c0.width || cam.height != c0.height)
      fail("io", "all views must share image dimensions");
    json frame;
    frame["file"] = view_name(static_cast<int>(v));
    frame["camera_to_world"] = cam.camera_to_world.m;
    cams["frames"].push_back(frame);
    write_png((fs::path(dir) / view_name(static_cast<int>(v))).string(), quantize(set.images[v]));
  }
  std::ofstream cam_out(fs::path(dir) / "cameras.json");
  cam_out << cams.dump(2) << "\n";
  if (!cam_out.good()) fail("io", "write failed for cameras.json");

  json meta;
  meta["scene"] = set.scene_name;
  meta["seed"] = set.seed;
  meta["background"] = {set.background.x, set.background.y, set.background.z};
  meta["render"] = {{"sdf_samples", set.settings.sdf_samples},
                    {"sdf_sharpness", set.settings.sdf_sharpness}};
  std::ofstream meta_out(fs::path(dir) / "scene.json");
  meta_out << meta.dump(2) << "\n";
  if (!meta_out.good()) fail("io", "write failed for scene.json");
}

Dataset load_dataset(const std::string& dir) {
  fs::path root(dir);
  if (!fs::exists(root / "cameras.json")) fail("io", "no cameras.json in " + dir);
  json cams = load_json(root / "cameras.json");
  Dataset ds;
  try {
    ds.width = cams.at("width").get<int>();
    ds.height = cams.at("height").get<int>();
    ds.fov_y_degrees = cams.at("fov_y_degrees").get<double>();
    ds.t_near = cams.at("t_near").get<double>();
    ds.t_far = cams.at("t_far").get<double>();
    for (const auto& frame : cams.at("frames")) {
      Camera cam;
      cam.width = ds.width;
      cam.height = ds.height;
      cam.fov_y_deg = ds.fov_y_degrees;
      cam.t_near = ds.t_near;
      cam.t_far = ds.t_far;
      auto m = frame.at("camera_to_world").get<std::vector<double>>();
      if (m.size() != 16) fail("io", "camera_to_world must have 16 entries");
      std::copy(m.begin(), m.end(), cam.camera_to_world.m.begin());
      ds.cameras.push_back(cam);
      ds.images.push_back(read_png((root / frame.at("file").get<std::string>()).string()));
      const ImageU8& img = ds.images.back();
      if (img.width != ds.width || img.height != ds.height)
        fail("io", "image size disagrees with cameras.json for " +
                       frame.at("file").get<std::string>());
    }
  } catch (const json::exception& e) {
    fail("io", std::string("cameras.json: ") + e.what());
  }
  if (ds.cameras.size() < 2) fail("io", "dataset needs at least 2 views");

  if (fs::exists(root / "scene.json")) {
    json meta = load_json(root / "scene.json");
    if (meta.contains("scene")) ds.scene_name = meta["scene"].get<std::string>();
    if (meta.contains("background")) {
      auto bg = meta["background"].get<std::vector<double>>();
      if (bg.size() == 3) ds.background = {bg[0], bg[1], bg[2]};
    }
  }
  return ds;
}

}  // namespace fieldray
