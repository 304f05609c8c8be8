// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fieldray/fields/analytic.hpp"
#include "fieldray/geometry/camera.hpp"
#include "fieldray/util/image.hpp"

namespace fieldray {

// Analytic object plus everything needed to pose and shade it.
struct AnalyticScene {
  std::string name;
  AnalyticField field;
  Vec3 background{1.0, 1.0, 1.0};
  double bounding_radius = 0.8;  // object fits in this ball around the origin
};

struct GroundTruthSettings {
  int sdf_samples = 512;          // regular samples per ray for SDF scenes
  double sdf_sharpness = 1024.0;  // fixed logistic sharpness for ground truth
};

// Posed ground-truth views. Images are float RGBA: straight (unpremultiplied)
// foreground color with alpha = coverage (1 - T_rem), so a trainer can
// composite them over any background exactly.
struct PosedImageSet {
  std::vector<ImageF> images;
  std::vector<Camera> cameras;
  std::string scene_name;
  uint64_t seed = 0;
  GroundTruthSettings settings;
  Vec3 background{1.0, 1.0, 1.0};
};

AnalyticScene make_scene(const std::string& name);

// Cameras on a ring: evenly spaced azimuths at fixed elevation, all looking
// at the origin with +y up. Azimuth 0 sits on +z.
std::vector<Camera> fixed_view_ring(int count, double elevation_degrees, double radius,
                                    int width, int height, double fov_y_degrees, double t_near,
                                    double t_far);

// Deterministic reference renders (no RNG; the seed is only recorded so a
// dataset directory names its provenance).
PosedImageSet render_ground_truth(const AnalyticScene& scene, const std::vector<Camera>& cameras,
                                  const GroundTruthSettings& settings = {});

}  // namespace fieldray
