// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/oracle/scene.hpp"

#include <cmath>

#include "fieldray/neus/renderer.hpp"
#include "fieldray/util/parallel.hpp"

namespace fieldray {

namespace {

constexpr double kSlabZLo = -0.25, kSlabZHi = 0.25, kSlabDensity = 6.0;

// The slab is piecewise constant along any ray, so its expected color has a
// closed form; build the profile and evaluate it exactly.
NeusAnalyticRender render_slab_ray(const AnalyticField& field, const Ray& ray) {
  std::vector<double> knots = {ray.t_near, ray.t_far};
  if (std::abs(ray.dir.z) > 1e-12) {
    for (double z : {kSlabZLo, kSlabZHi}) {
      double t = (z - ray.origin.z) / ray.dir.z;
      if (t > ray.t_near && t < ray.t_far) knots.push_back(t);
    }
  }
  std::sort(knots.begin(), knots.end());
  PiecewiseProfile prof;
  prof.knots = knots;
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    Vec3 mid = ray.at(0.5 * (knots[i] + knots[i + 1]));
    prof.sigma.push_back(field.value(mid));
    prof.color.push_back(field.color(mid));
  }
  AnalyticRender black = render_ray_analytic(prof, Vec3{0, 0, 0});
  NeusAnalyticRender out;
  out.foreground = black.rgb;  // sum of w_i c_i
  out.t_rem = black.t_rem;
  out.weight_sum = 1.0 - black.t_rem;
  return out;
}

}  // namespace

AnalyticScene make_scene(const std::string& name) {
  AnalyticScene scene;
  scene.name = name;
  scene.field = make_analytic_scene(name);
  scene.bounding_radius = name == "torus" ? 0.7 : 0.8;
  return scene;
}

std::vector<Camera> fixed_view_ring(int count, double elevation_degrees, double radius,
                                    int width, int height, double fov_y_degrees, double t_near,
                                    double t_far) {
  if (count < 2 || radius <= 0.0) fail("camera", "view ring needs at least 2 cameras, radius > 0");
  double el = elevation_degrees * M_PI / 180.0;
  std::vector<Camera> cams;
  cams.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    double az = 2.0 * M_PI * i / count;  // azimuth 0 on +z, advancing toward +x
    Vec3 eye{radius * std::cos(el) * std::sin(az), radius * std::sin(el),
             radius * std::cos(el) * std::cos(az)};
    Camera cam;
    cam.width = width;
    cam.height = height;
    cam.fov_y_deg = fov_y_degrees;
    cam.t_near = t_near;
    cam.t_far = t_far;
    cam.camera_to_world = look_at(eye, Vec3{0, 0, 0}, Vec3{0, 1, 0});
    cams.push_back(cam);
  }
  return cams;
}

PosedImageSet render_ground_truth(const AnalyticScene& scene, const std::vector<Camera>& cameras,
                                  const GroundTruthSettings& settings) {
  if (cameras.size() < 2) fail("render", "a posed image set needs at least 2 views");
  PosedImageSet set;
  set.cameras = cameras;
  set.scene_name = scene.name;
  set.settings = settings;
  set.background = scene.background;
  set.images.resize(cameras.size());
  bool sdf = scene.field.kind == AnalyticField::Kind::kSdf;
  for (size_t v = 0; v < cameras.size(); ++v) {
    const Camera& cam = cameras[v];
    ImageF& img = set.images[v];
    img = ImageF::zeros(cam.width, cam.height);
    parallel_for(0, cam.height, [&](int64_t row) {
      int py = static_cast<int>(row);
      for (int px = 0; px < cam.width; ++px) {
        Ray ray = generate_ray(cam, px, py);
        NeusAnalyticRender r =
            sdf ? neus_render_analytic(scene.field, ray, settings.sdf_sharpness,
                                       settings.sdf_samples)
                : render_slab_ray(scene.field, ray);
        double alpha = 1.0 - r.t_rem;
        Vec3 fg = r.weight_sum > 1e-12 ? r.foreground / r.weight_sum : Vec3{0, 0, 0};
        float* out = img.pixel(px, py);
        out[0] = static_cast<float>(fg.x);
        out[1] = static_cast<float>(fg.y);
        out[2] = static_cast<float>(fg.z);
        out[3] = static_cast<float>(alpha);
      }
    });
  }
  return set;
}

}  // namespace fieldray
