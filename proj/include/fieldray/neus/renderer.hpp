// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fieldray/fields/analytic.hpp"
#include "fieldray/fields/logistic.hpp"
#include "fieldray/fields/sdf_field.hpp"
#include "fieldray/geometry/camera.hpp"
#include "fieldray/nerf/renderer.hpp"
#include "fieldray/nerf/sampling.hpp"

namespace fieldray {

struct NeusConfig {
  int n_samples = 96;  // points per ray; one pass, no hierarchical stage
  double eikonal_weight = 0.1;
  Vec3 background{1.0, 1.0, 1.0};
};

// ---------------------------------------------------------------------------
// Plain (non-graph) evaluation, used by the dataset generator and as the
// small-scale reference in tests.

// alpha = max((Phi_s(f_i) - Phi_s(f_next)) / Phi_s(f_i), 0), exact for linear
// SDF within the segment. Evaluated in log space; when Phi_s(f_i) underflows
// (s*f_i < log 1e-12) the segment is treated as fully transparent.
inline double neus_alpha_value(double f_i, double f_next, double s) {
  if (s <= 0.0) fail("render", "neus alpha needs s > 0");
  double a = s * f_i, b = s * f_next;
  if (a < -27.6) return 0.0;
  if (b >= a) return 0.0;
  // 1 - Phi(b)/Phi(a) = -expm1(log Phi(b) - log Phi(a))
  return -std::expm1(log_logistic_cdf(b) - log_logistic_cdf(a));
}

struct NeusWeights {
  std::vector<double> alphas;   // N-1
  std::vector<double> weights;  // N-1
  double t_rem = 1.0;
};

inline NeusWeights neus_weights_value(std::span<const double> f, double s) {
  if (f.size() < 2) fail("render", "need at least two SDF samples per ray");
  NeusWeights out;
  out.alphas.resize(f.size() - 1);
  out.weights.resize(f.size() - 1);
  double trans = 1.0;
  for (size_t i = 0; i + 1 < f.size(); ++i) {
    double a = neus_alpha_value(f[i], f[i + 1], s);
    out.alphas[i] = a;
    out.weights[i] = trans * a;
    trans *= 1.0 - a;
  }
  out.t_rem = trans;
  return out;
}

struct NeusAnalyticRender {
  Vec3 foreground{0, 0, 0};  // sum of w_i * c_i, not normalized
  double weight_sum = 0.0;
  double t_rem = 1.0;

  Vec3 composited(const Vec3& background) const { return foreground + background * t_rem; }
};

// Deterministic reference render of an analytic SDF scene: n regular sample
// points (midpoint lattice, no jitter), colors at segment midpoints. Used for
// ground-truth images, so it is double precision and RNG-free.
inline NeusAnalyticRender neus_render_analytic(const AnalyticField& field, const Ray& ray,
                                               double s, int n_points,
                                               std::vector<double>* weights_out = nullptr) {
  if (field.kind != AnalyticField::Kind::kSdf) fail("render", "sdf render needs an SDF field");
  if (n_points < 2) fail("render", "need at least two samples");
  double len = ray.t_far - ray.t_near;
  std::vector<double> t(static_cast<size_t>(n_points));
  for (int i = 0; i < n_points; ++i)
    t[i] = ray.t_near + (i + 0.5) * len / n_points;
  std::vector<double> f(t.size());
  for (size_t i = 0; i < t.size(); ++i) f[i] = field.value(ray.at(t[i]));
  NeusWeights w = neus_weights_value(f, s);
  NeusAnalyticRender out;
  for (size_t i = 0; i + 1 < t.size(); ++i) {
    if (w.weights[i] == 0.0) continue;
    Vec3 c = field.color(ray.at(0.5 * (t[i] + t[i + 1])));
    out.foreground = out.foreground + c * w.weights[i];
    out.weight_sum += w.weights[i];
  }
  out.t_rem = w.t_rem;
  if (weights_out) *weights_out = std::move(w.weights);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiable graph assembly.

// f: [R,N] SDF at sample points; rgb: [R,N-1,3] colors at segment midpoints;
// s_log: scalar log-sharpness parameter; background: [3].
template <typename T>
RenderNodes<T> neus_render(Tape<T>& tape, typename Tape<T>::Id f, typename Tape<T>::Id rgb,
                           typename Tape<T>::Id s_log, typename Tape<T>::Id background) {
  Shape fs = tape.shape(f);
  if (fs.rank != 2 || fs.dim(1) < 2) fail("render", "neus_render expects f [R,N], N >= 2");
  int rays = fs.dim(0), n = fs.dim(1);
  {
    auto fd = tape.data(f);
    for (int64_t i = 0; i < fs.count(); ++i)
      if (!std::isfinite(static_cast<double>(fd[i])))
        fail("render", "non-finite sdf on ray " + std::to_string(i / n));
  }
  auto s = tape.exp(s_log);
  auto alpha = tape.neus_alpha(f, s);       // [R,N-1]
  auto comp = tape.alpha_composite(alpha);  // [R,N]
  auto w = tape.slice(comp, 1, 0, n - 1);
  auto t_rem = tape.slice(comp, 1, n - 1, 1);
  auto wc = tape.mul(tape.reshape(w, Shape::of(rays, n - 1, 1)), rgb);
  auto color = tape.add(tape.sum_axis(wc, 1), tape.mul(t_rem, background));
  return {color, w, t_rem};
}

template <typename T>
struct NeusPassGraph {
  RenderNodes<T> render;
  std::vector<std::vector<double>> t;  // sample positions used per ray
};

// Stratified single-pass render of a ray batch through the SDF network.
// Sample positions are encoded off-tape; colors are evaluated at segment
// midpoints with the raw (unit) view direction.
template <typename T>
NeusPassGraph<T> build_neus_pass(Tape<T>& tape, const BoundParams<T>& bound,
                                 const std::string& prefix, std::span<const Ray> rays,
                                 std::span<Stream> ray_streams, const NeusConfig& cfg) {
  int r_count = static_cast<int>(rays.size());
  if (r_count == 0) fail("render", "empty ray batch");
  if (ray_streams.size() != rays.size()) fail("render", "one stream per ray required");
  int n = cfg.n_samples;
  int pw = SdfArch::pos_width();
  NeusPassGraph<T> out;
  out.t.resize(r_count);

  std::vector<T> enc_f(static_cast<size_t>(r_count) * n * pw);
  std::vector<T> off_f(static_cast<size_t>(r_count) * n);
  std::vector<T> enc_m(static_cast<size_t>(r_count) * (n - 1) * pw);
  std::vector<T> dirs(static_cast<size_t>(r_count) * (n - 1) * 3);
  std::vector<double> p(3);
  for (int r = 0; r < r_count; ++r) {
    Stream s = ray_streams[r].fork("neus");
    out.t[r] = stratified_samples(s, rays[r].t_near, rays[r].t_far, n);
    for (int i = 0; i < n; ++i) {
      size_t row = static_cast<size_t>(r) * n + i;
      Vec3 x = rays[r].at(out.t[r][i]);
      p = {x.x, x.y, x.z};
      auto e = positional_encode(p, SdfArch::kPosLevels);
      std::copy(e.begin(), e.end(), enc_f.begin() + row * pw);
      off_f[row] = static_cast<T>(norm(x) - SdfArch::kInitRadius);
    }
    for (int i = 0; i + 1 < n; ++i) {
      size_t row = static_cast<size_t>(r) * (n - 1) + i;
      Vec3 m = rays[r].at(0.5 * (out.t[r][i] + out.t[r][i + 1]));
      p = {m.x, m.y, m.z};
      auto e = positional_encode(p, SdfArch::kPosLevels);
      std::copy(e.begin(), e.end(), enc_m.begin() + row * pw);
      dirs[3 * row] = static_cast<T>(rays[r].dir.x);
      dirs[3 * row + 1] = static_cast<T>(rays[r].dir.y);
      dirs[3 * row + 2] = static_cast<T>(rays[r].dir.z);
    }
  }
  auto enc_f_id =
      tape.constant(Shape::of(r_count * n, pw), std::span<const T>(enc_f), "enc_sdf");
  auto off_id =
      tape.constant(Shape::of(r_count * n, 1), std::span<const T>(off_f), "sdf_offset");
  auto enc_m_id = tape.constant(Shape::of(r_count * (n - 1), pw), std::span<const T>(enc_m),
                                "enc_mid");
  auto dir_id = tape.constant(Shape::of(r_count * (n - 1), 3), std::span<const T>(dirs), "dirs");
  std::vector<T> bgv = {static_cast<T>(cfg.background.x), static_cast<T>(cfg.background.y),
                        static_cast<T>(cfg.background.z)};
  auto bg_id = tape.constant(Shape::of(3), std::span<const T>(bgv), "background");

  auto f = tape.reshape(sdf_build_f(tape, bound, prefix, enc_f_id, off_id), Shape::of(r_count, n));
  auto rgb = tape.reshape(sdf_build_color(tape, bound, prefix, enc_m_id, dir_id),
                          Shape::of(r_count, n - 1, 3));
  out.render = neus_render(tape, f, rgb, bound.at(prefix + "/s_log"), bg_id);
  return out;
}

// |grad f| at probe points via central differences of the network itself
// (six extra f evaluations per point, all on the tape, so the result is
// differentiable w.r.t. the parameters).
template <typename T>
typename Tape<T>::Id sdf_grad_norm_fd(Tape<T>& tape, const BoundParams<T>& bound,
                                      const std::string& prefix, std::span<const Vec3> points,
                                      double h = 1e-2) {
  int e = static_cast<int>(points.size());
  if (e == 0) fail("render", "no eikonal probe points");
  int pw = SdfArch::pos_width();
  // layout: 6 blocks of E rows: +x, -x, +y, -y, +z, -z
  std::vector<T> enc(static_cast<size_t>(6) * e * pw);
  std::vector<T> off(static_cast<size_t>(6) * e);
  std::vector<double> p(3);
  for (int block = 0; block < 6; ++block) {
    int axis = block / 2;
    double sign = block % 2 == 0 ? 1.0 : -1.0;
    for (int i = 0; i < e; ++i) {
      Vec3 x = points[i];
      x[axis] += sign * h;
      size_t row = static_cast<size_t>(block) * e + i;
      p = {x.x, x.y, x.z};
      auto enc_row = positional_encode(p, SdfArch::kPosLevels);
      std::copy(enc_row.begin(), enc_row.end(), enc.begin() + row * pw);
      off[row] = static_cast<T>(norm(x) - SdfArch::kInitRadius);
    }
  }
  auto enc_id = tape.constant(Shape::of(6 * e, pw), std::span<const T>(enc), "enc_eik");
  auto off_id = tape.constant(Shape::of(6 * e, 1), std::span<const T>(off), "eik_offset");
  auto f = sdf_build_f(tape, bound, prefix, enc_id, off_id);  // [6E,1]
  auto gsq = tape.constant_scalar(T(1e-12));
  for (int axis = 0; axis < 3; ++axis) {
    auto fp = tape.slice(f, 0, (2 * axis) * e, e);
    auto fm = tape.slice(f, 0, (2 * axis + 1) * e, e);
    auto g = tape.affine(tape.sub(fp, fm), 1.0 / (2.0 * h), 0.0);
    gsq = tape.add(gsq, tape.mul(g, g));
  }
  return tape.sqrt(gsq);  // [E,1]
}

// Full-frame inference, chunked; same per-pixel stream contract as the NeRF
// renderer (fork(seed, pixel index, pass)), so output is independent of
// chunking. Alpha stores 1 - T_rem.
template <typename T>
ImageF neus_render_image(const ParameterSet<T>& params, const Camera& cam,
                         const NeusConfig& cfg, uint64_t seed, const std::string& prefix,
                         int chunk_rays = 256) {
  ImageF img = ImageF::zeros(cam.width, cam.height);
  int total = cam.width * cam.height;
  int chunks = (total + chunk_rays - 1) / chunk_rays;
  parallel_for(0, chunks, [&](int64_t chunk) {
    int begin = static_cast<int>(chunk) * chunk_rays, end = std::min(total, begin + chunk_rays);
    std::vector<Ray> rays;
    std::vector<Stream> streams;
    rays.reserve(end - begin);
    for (int idx = begin; idx < end; ++idx) {
      rays.push_back(generate_ray(cam, idx % cam.width, idx / cam.width));
      streams.push_back(Stream(seed).fork(static_cast<uint64_t>(idx)));
    }
    Tape<T> tape;
    auto bound = bind_constants(tape, params);
    auto graph = build_neus_pass(tape, bound, prefix, rays, std::span<Stream>(streams), cfg);
    auto color = tape.data(graph.render.color);
    auto t_rem = tape.data(graph.render.t_rem);
    for (int idx = begin; idx < end; ++idx) {
      float* px = img.pixel(idx % cam.width, idx / cam.width);
      size_t r = static_cast<size_t>(idx - begin);
      px[0] = static_cast<float>(color[3 * r]);
      px[1] = static_cast<float>(color[3 * r + 1]);
      px[2] = static_cast<float>(color[3 * r + 2]);
      px[3] = static_cast<float>(1.0 - static_cast<double>(t_rem[r]));
    }
  });
  return img;
}

// mean squared color error + lambda * mean (|grad f| - 1)^2.
template <typename T>
typename Tape<T>::Id neus_loss(Tape<T>& tape, typename Tape<T>::Id color,
                               typename Tape<T>::Id truth, typename Tape<T>::Id grad_norm,
                               double lambda) {
  Shape cs = tape.shape(color);
  if (cs.count() == 0) fail("render", "empty ray batch");
  auto dc = tape.sub(color, truth);
  auto mse = tape.affine(tape.sum(tape.mul(dc, dc)), 1.0 / cs.count(), 0.0);
  auto dg = tape.affine(grad_norm, 1.0, -1.0);
  auto eik = tape.affine(tape.sum(tape.mul(dg, dg)), 1.0 / tape.shape(grad_norm).count(), 0.0);
  return tape.add(mse, tape.affine(eik, lambda, 0.0));
}

}  // namespace fieldray
