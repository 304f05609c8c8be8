// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fieldray/fields/analytic.hpp"
#include "fieldray/fields/radiance_field.hpp"
#include "fieldray/geometry/camera.hpp"
#include "fieldray/nerf/sampling.hpp"
#include "fieldray/util/image.hpp"
#include "fieldray/util/parallel.hpp"

namespace fieldray {

struct NerfConfig {
  int n_coarse = 64;
  int n_fine = 64;
  Vec3 background{1.0, 1.0, 1.0};
};

// ---------------------------------------------------------------------------
// Closed-form reference: exact expected color for piecewise-constant density
// and color along a ray. Matches the quadrature exactly when sample
// boundaries align with the pieces, which is what makes it usable as an
// equivalence oracle.

struct PiecewiseProfile {
  std::vector<double> knots;  // P+1 ascending sample-space positions
  std::vector<double> sigma;  // P densities, >= 0
  std::vector<Vec3> color;    // P colors
};

struct AnalyticRender {
  Vec3 rgb;
  double t_rem = 1.0;
};

inline AnalyticRender render_ray_analytic(const PiecewiseProfile& prof, const Vec3& background) {
  size_t pieces = prof.sigma.size();
  if (prof.knots.size() != pieces + 1 || prof.color.size() != pieces)
    fail("render", "piecewise profile arrays disagree");
  double trans = 1.0;
  Vec3 c{0, 0, 0};
  for (size_t i = 0; i < pieces; ++i) {
    double len = prof.knots[i + 1] - prof.knots[i];
    if (len < 0.0 || prof.sigma[i] < 0.0) fail("render", "invalid piecewise profile");
    double absorb = -std::expm1(-prof.sigma[i] * len);  // 1 - e^{-sigma len}
    c = c + prof.color[i] * (trans * absorb);
    trans *= std::exp(-prof.sigma[i] * len);
  }
  return {c + background * trans, trans};
}

// ---------------------------------------------------------------------------
// Differentiable quadrature (graph assembly).

template <typename T>
struct RenderNodes {
  typename Tape<T>::Id color;    // [R,3], background composited
  typename Tape<T>::Id weights;  // [R,S]
  typename Tape<T>::Id t_rem;    // [R,1]
};

// sigma [R,S], rgb [R,S,3], deltas [R,S] (constant), background [3].
// alpha_i = 1 - exp(-clamp(sigma_i * delta_i, 0, 80)); weights and remaining
// transmittance come from the fused compositing op.
template <typename T>
RenderNodes<T> render_quadrature(Tape<T>& tape, typename Tape<T>::Id sigma,
                                 typename Tape<T>::Id rgb, typename Tape<T>::Id deltas,
                                 typename Tape<T>::Id background) {
  Shape ss = tape.shape(sigma);
  if (ss.rank != 2) fail("render", "render_quadrature expects sigma [R,S], got " + ss.str());
  int rays = ss.dim(0), s = ss.dim(1);
  {
    auto sd = tape.data(sigma);
    for (int64_t i = 0; i < ss.count(); ++i)
      if (!std::isfinite(static_cast<double>(sd[i])))
        fail("render", "non-finite sigma on ray " + std::to_string(i / s));
  }
  auto sdelta = tape.clamp(tape.mul(sigma, deltas), 0.0, 80.0);
  auto alpha = tape.affine(tape.exp(tape.affine(sdelta, -1.0, 0.0)), -1.0, 1.0);
  auto comp = tape.alpha_composite(alpha);  // [R,S+1]
  auto w = tape.slice(comp, 1, 0, s);
  auto t_rem = tape.slice(comp, 1, s, 1);
  auto wc = tape.mul(tape.reshape(w, Shape::of(rays, s, 1)), rgb);
  auto fg = tape.sum_axis(wc, 1);  // [R,3]
  auto color = tape.add(fg, tape.mul(t_rem, background));
  return {color, w, t_rem};
}

// Sum over rays and channels of both coarse and fine squared errors.
template <typename T>
typename Tape<T>::Id nerf_loss(Tape<T>& tape, typename Tape<T>::Id coarse,
                               typename Tape<T>::Id fine, typename Tape<T>::Id truth) {
  if (tape.shape(coarse).count() == 0) fail("render", "empty ray batch");
  auto dc = tape.sub(coarse, truth);
  auto df = tape.sub(fine, truth);
  return tape.add(tape.sum(tape.mul(dc, dc)), tape.sum(tape.mul(df, df)));
}

// ---------------------------------------------------------------------------
// Field-driven passes: encode sample positions off-tape (they carry no
// gradient), run the radiance network, composite.

template <typename T>
RenderNodes<T> build_nerf_pass(Tape<T>& tape, const BoundParams<T>& bound,
                               const std::string& prefix, std::span<const Ray> rays,
                               const std::vector<std::vector<double>>& ts,
                               const Vec3& background) {
  int r_count = static_cast<int>(rays.size());
  int s = static_cast<int>(ts.empty() ? 0 : ts[0].size());
  if (r_count == 0 || s == 0) fail("render", "empty ray batch");
  int pw = RadianceArch::pos_width(), dw = RadianceArch::dir_width();
  std::vector<T> enc_x(static_cast<size_t>(r_count) * s * pw);
  std::vector<T> enc_d(static_cast<size_t>(r_count) * s * dw);
  std::vector<T> deltas(static_cast<size_t>(r_count) * s);
  std::vector<float> dir_enc;
  std::vector<double> p(3);
  for (int r = 0; r < r_count; ++r) {
    if (static_cast<int>(ts[r].size()) != s) fail("render", "ragged sample counts in batch");
    const Ray& ray = rays[r];
    p = {ray.dir.x, ray.dir.y, ray.dir.z};
    dir_enc = positional_encode(p, RadianceArch::kDirLevels);
    for (int i = 0; i < s; ++i) {
      size_t row = static_cast<size_t>(r) * s + i;
      Vec3 x = ray.at(ts[r][i]);
      p = {x.x, x.y, x.z};
      auto e = positional_encode(p, RadianceArch::kPosLevels);
      std::copy(e.begin(), e.end(), enc_x.begin() + row * pw);
      std::copy(dir_enc.begin(), dir_enc.end(), enc_d.begin() + row * dw);
      double next = i + 1 < s ? ts[r][i + 1] : ray.t_far;
      deltas[row] = static_cast<T>(std::max(0.0, next - ts[r][i]));
    }
  }
  auto enc_x_id = tape.constant(Shape::of(r_count * s, pw), std::span<const T>(enc_x), "enc_x");
  auto enc_d_id = tape.constant(Shape::of(r_count * s, dw), std::span<const T>(enc_d), "enc_d");
  auto delta_id = tape.constant(Shape::of(r_count, s), std::span<const T>(deltas), "deltas");
  std::vector<T> bg = {static_cast<T>(background.x), static_cast<T>(background.y),
                       static_cast<T>(background.z)};
  auto bg_id = tape.constant(Shape::of(3), std::span<const T>(bg), "background");

  auto nodes = radiance_build(tape, bound, prefix, enc_x_id, enc_d_id);
  auto sigma = tape.reshape(nodes.sigma, Shape::of(r_count, s));
  auto rgb = tape.reshape(nodes.rgb, Shape::of(r_count, s, 3));
  return render_quadrature(tape, sigma, rgb, delta_id, bg_id);
}

template <typename T>
struct NerfBatchGraph {
  RenderNodes<T> coarse;
  RenderNodes<T> fine;
};

// Two-pass render of a ray batch on one tape: coarse stratified pass, then a
// fine pass whose sample locations are drawn from the coarse weights
// (detached; read back as plain numbers). ray_streams[i] must be the per-ray
// stream; passes fork it so coarse and fine draws are independent.
template <typename T>
NerfBatchGraph<T> nerf_render_batch(Tape<T>& tape, const BoundParams<T>& bound,
                                    std::span<const Ray> rays, std::span<Stream> ray_streams,
                                    const NerfConfig& cfg, const std::string& coarse_prefix,
                                    const std::string& fine_prefix) {
  size_t r_count = rays.size();
  if (ray_streams.size() != r_count) fail("render", "one stream per ray required");
  std::vector<std::vector<double>> t_coarse(r_count);
  for (size_t r = 0; r < r_count; ++r) {
    Stream s = ray_streams[r].fork("coarse");
    t_coarse[r] = stratified_samples(s, rays[r].t_near, rays[r].t_far, cfg.n_coarse);
  }
  auto coarse = build_nerf_pass(tape, bound, coarse_prefix, rays, t_coarse, cfg.background);

  auto wdata = tape.data(coarse.weights);
  std::vector<std::vector<double>> t_fine(r_count);
  for (size_t r = 0; r < r_count; ++r) {
    std::vector<double> w(cfg.n_coarse);
    for (int i = 0; i < cfg.n_coarse; ++i)
      w[i] = static_cast<double>(wdata[r * cfg.n_coarse + i]);
    Stream s = ray_streams[r].fork("fine");
    t_fine[r] =
        hierarchical_resample(t_coarse[r], w, s, cfg.n_fine, rays[r].t_near, rays[r].t_far);
  }
  auto fine = build_nerf_pass(tape, bound, fine_prefix, rays, t_fine, cfg.background);
  return {coarse, fine};
}

// ---------------------------------------------------------------------------
// Full-frame inference. Deterministic for a given seed: every pixel's draws
// come from fork(seed, pixel index, pass), independent of chunking or worker
// count. Alpha channel stores 1 - T_rem of the fine pass.

template <typename T>
ImageF render_image(const ParameterSet<T>& params, const Camera& cam, const NerfConfig& cfg,
                    uint64_t seed, int chunk_rays = 256) {
  ImageF img = ImageF::zeros(cam.width, cam.height);
  int total = cam.width * cam.height;
  int chunks = (total + chunk_rays - 1) / chunk_rays;
  parallel_for(0, chunks, [&](int chunk) {
    int begin = chunk * chunk_rays, end = std::min(total, begin + chunk_rays);
    std::vector<Ray> rays;
    std::vector<Stream> streams;
    rays.reserve(end - begin);
    for (int idx = begin; idx < end; ++idx) {
      rays.push_back(generate_ray(cam, idx % cam.width, idx / cam.width));
      streams.push_back(Stream(seed).fork(static_cast<uint64_t>(idx)));
    }
    Tape<T> tape;
    auto bound = bind_constants(tape, params);
    auto graph = nerf_render_batch(tape, bound, rays, std::span<Stream>(streams), cfg, "coarse",
                                   "fine");
    auto color = tape.data(graph.fine.color);
    auto t_rem = tape.data(graph.fine.t_rem);
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

}  // namespace fieldray
