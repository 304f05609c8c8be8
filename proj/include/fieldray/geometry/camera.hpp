// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fieldray/util/error.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

// Conventions, fixed for dataset reproducibility: right-handed world,
// camera looks down -z in its own frame with y up, pixel (0,0) at the
// top-left, rays cast through pixel centers.
struct Camera {
  int width = 0, height = 0;
  double fov_y_deg = 0.0;
  double t_near = 0.0, t_far = 0.0;
  Mat4 camera_to_world = Mat4::identity();

  Vec3 eye() const {
    return {camera_to_world.at(0, 3), camera_to_world.at(1, 3), camera_to_world.at(2, 3)};
  }
  Vec3 forward() const { return camera_to_world.transform_dir({0.0, 0.0, -1.0}); }
};

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length
  double t_near = 0.0, t_far = 0.0;

  Vec3 at(double t) const { return origin + t * dir; }
};

// Pose looking from eye toward target with the given up hint.
inline Mat4 look_at(Vec3 eye, Vec3 target, Vec3 up) {
  Vec3 diff = target - eye;
  if (norm(diff) < 1e-12) fail("camera", "look_at: eye and target coincide");
  Vec3 fwd = normalized(diff);
  Vec3 side = cross(fwd, up);
  if (norm(side) < 1e-9) fail("camera", "look_at: up vector is parallel to the view direction");
  Vec3 right = normalized(side);
  Vec3 true_up = cross(right, fwd);
  Mat4 m = Mat4::identity();
  // Columns are the camera axes in world space; camera -z maps to fwd.
  for (int i = 0; i < 3; ++i) {
    m.at(i, 0) = right[i];
    m.at(i, 1) = true_up[i];
    m.at(i, 2) = -fwd[i];
    m.at(i, 3) = eye[i];
  }
  return m;
}

inline Ray generate_ray(const Camera& cam, int px, int py) {
  if (px < 0 || px >= cam.width || py < 0 || py >= cam.height)
    fail("camera", "generate_ray: pixel (" + std::to_string(px) + "," + std::to_string(py) +
                       ") outside " + std::to_string(cam.width) + "x" +
                       std::to_string(cam.height));
  double tan_half = std::tan(cam.fov_y_deg * std::numbers::pi / 360.0);
  double aspect = static_cast<double>(cam.width) / cam.height;
  double u = (static_cast<double>(px) + 0.5) / cam.width;
  double v = (static_cast<double>(py) + 0.5) / cam.height;
  Vec3 dir_cam{(2.0 * u - 1.0) * tan_half * aspect, (1.0 - 2.0 * v) * tan_half, -1.0};
  Ray ray;
  ray.origin = cam.eye();
  ray.dir = normalized(cam.camera_to_world.transform_dir(dir_cam));
  ray.t_near = cam.t_near;
  ray.t_far = cam.t_far;
  return ray;
}

inline std::vector<Ray> generate_rays(const Camera& cam,
                                      const std::vector<std::pair<int, int>>& pixels) {
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (auto [px, py] : pixels) rays.push_back(generate_ray(cam, px, py));
  return rays;
}

}  // namespace fieldray
