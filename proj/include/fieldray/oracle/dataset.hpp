// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fieldray/geometry/camera.hpp"
#include "fieldray/oracle/scene.hpp"
#include "fieldray/util/image.hpp"

namespace fieldray {

// A dataset directory on disk: view_%03d.png + cameras.json + scene.json.
// The same layout ingests externally produced views, in which case
// scene.json may be absent and scene_name stays empty.
struct Dataset {
  int width = 0, height = 0;
  double fov_y_degrees = 0.0, t_near = 0.0, t_far = 0.0;
  std::vector<Camera> cameras;
  std::vector<ImageU8> images;
  std::string scene_name;
  Vec3 background{1.0, 1.0, 1.0};

  int view_count() const { return static_cast<int>(cameras.size()); }
};

// Writes images (quantized to 8-bit RGBA), cameras.json, and scene.json.
void write_dataset(const PosedImageSet& set, const std::string& dir);

Dataset load_dataset(const std::string& dir);

}  // namespace fieldray
