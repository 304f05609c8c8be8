// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "fieldray/util/error.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

// Closed-form scene field used both as ground truth for synthetic datasets
// and as a drop-in geometry for renderer tests. `value` is a signed distance
// for kSdf scenes and a volume density for kDensity scenes.
struct AnalyticField {
  enum class Kind { kSdf, kDensity };

  Kind kind = Kind::kSdf;
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> color;  // rgb in [0,1]
};

// Central differences; the analytic fields are smooth away from medial axes.
inline Vec3 analytic_gradient(const AnalyticField& field, const Vec3& p, double h = 1e-4) {
  auto d = [&](Vec3 a, Vec3 b) { return (field.value(a) - field.value(b)) / (2.0 * h); };
  return Vec3{d({p.x + h, p.y, p.z}, {p.x - h, p.y, p.z}),
              d({p.x, p.y + h, p.z}, {p.x, p.y - h, p.z}),
              d({p.x, p.y, p.z + h}, {p.x, p.y, p.z - h})};
}

// Sign of a cosine product gives axis-aligned checker cells without the
// coordinate-plane degeneracy a floor()-parity checker has at 0.
inline Vec3 checker_color(const Vec3& p, double cells_per_unit = 4.0) {
  double w = M_PI * cells_per_unit;
  double s = std::cos(w * p.x) * std::cos(w * p.y) * std::cos(w * p.z);
  return s >= 0.0 ? Vec3{0.9, 0.25, 0.2} : Vec3{0.95, 0.9, 0.85};
}

inline double sphere_sdf(const Vec3& p, const Vec3& c, double r) { return norm(p - c) - r; }

inline AnalyticField make_checker_sphere(double radius = 0.6) {
  AnalyticField f;
  f.kind = AnalyticField::Kind::kSdf;
  f.value = [radius](const Vec3& p) { return sphere_sdf(p, Vec3{0, 0, 0}, radius); };
  f.color = [](const Vec3& p) { return checker_color(p); };
  return f;
}

inline AnalyticField make_torus(double major = 0.45, double minor = 0.2) {
  AnalyticField f;
  f.kind = AnalyticField::Kind::kSdf;
  f.value = [major, minor](const Vec3& p) {
    double q = std::sqrt(p.x * p.x + p.z * p.z) - major;
    return std::sqrt(q * q + p.y * p.y) - minor;
  };
  f.color = [](const Vec3& p) {
    // hue varies with azimuth so view-dependent errors show up in renders
    double a = 0.5 + 0.5 * std::sin(4.0 * std::atan2(p.x, p.z));
    return Vec3{0.2 + 0.6 * a, 0.5, 0.9 - 0.6 * a};
  };
  return f;
}

// Small sphere in front of a large one along +z; used to test occlusion
// ordering and first-crossing weight mass.
inline AnalyticField make_two_spheres() {
  AnalyticField f;
  f.kind = AnalyticField::Kind::kSdf;
  f.value = [](const Vec3& p) {
    double a = sphere_sdf(p, Vec3{0, 0, 0.45}, 0.22);
    double b = sphere_sdf(p, Vec3{0, 0, -0.2}, 0.5);
    return std::min(a, b);
  };
  f.color = [](const Vec3& p) {
    double a = sphere_sdf(p, Vec3{0, 0, 0.45}, 0.22);
    double b = sphere_sdf(p, Vec3{0, 0, -0.2}, 0.5);
    return a <= b ? Vec3{0.9, 0.7, 0.15} : Vec3{0.2, 0.35, 0.85};
  };
  return f;
}

// Constant-density axial slab with constant color. Density and color are
// piecewise constant along every ray, so the closed-form ray integral is
// exact for it; that makes the slab the quadrature oracle scene. Density
// fields have no signed distance, so this scene is volume-renderer-only.
inline AnalyticField make_slab(double z_lo = -0.25, double z_hi = 0.25, double density = 6.0) {
  AnalyticField f;
  f.kind = AnalyticField::Kind::kDensity;
  f.value = [z_lo, z_hi, density](const Vec3& p) {
    return (p.z >= z_lo && p.z <= z_hi) ? density : 0.0;
  };
  f.color = [](const Vec3&) { return Vec3{0.8, 0.55, 0.3}; };
  return f;
}


inline AnalyticField make_analytic_scene(const std::string& name) {
  if (name == "checker_sphere") return make_checker_sphere();
  if (name == "torus") return make_torus();
  if (name == "two_spheres") return make_two_spheres();
  if (name == "slab") return make_slab();
  fail("config", "unknown scene '" + name + "'");
}

}  // namespace fieldray
