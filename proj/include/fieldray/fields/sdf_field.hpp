// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fieldray/fields/analytic.hpp"
#include "fieldray/fields/encoding.hpp"
#include "fieldray/fields/mlp.hpp"
#include "fieldray/mesh/grid.hpp"
#include "fieldray/util/parallel.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

// Signed distance network with a view-dependent color head.
// Trunk: enc(x)[60] -> 4x128 ReLU -> 1, output layer zero-initialized, plus a
// fixed analytic offset |x| - 0.5, so training starts from an exact sphere of
// radius 0.5 (geometric initialization). Color head sees enc(x)[60] plus the
// raw unit view direction. The logistic sharpness s is trained in log space.
struct SdfArch {
  static constexpr int kPosLevels = 9;
  static constexpr double kInitRadius = 0.5;

  static int pos_width() { return encoding_width(3, kPosLevels); }
  static MlpSpec trunk() { return {{pos_width(), 128, 128, 128, 128, 1}}; }
  static MlpSpec head() { return {{pos_width() + 3, 64, 64, 3}}; }
};

template <typename T>
void sdf_init(ParameterSet<T>& params, const std::string& prefix, Stream rng,
              double s_init = 10.0) {
  mlp_init(params, prefix + "/trunk", SdfArch::trunk(), rng.fork("trunk"), /*zero_last=*/true);
  mlp_init(params, prefix + "/head", SdfArch::head(), rng.fork("head"));
  params.add(prefix + "/s_log", Shape::scalar(), {static_cast<T>(std::log(s_init))});
}

// f(x) for precomputed encodings; `offset` is the constant |x| - 0.5 column.
// Returns [n,1].
template <typename T>
typename Tape<T>::Id sdf_build_f(Tape<T>& tape, const BoundParams<T>& bound,
                                 const std::string& prefix, typename Tape<T>::Id enc_x,
                                 typename Tape<T>::Id offset) {
  auto raw = mlp_forward(tape, bound, prefix + "/trunk", SdfArch::trunk(), enc_x);
  auto f = tape.add(raw, offset);
  tape.set_label(f, prefix + "/f");
  return f;
}

// f(x) with x as a live graph input [n,3]; encoding and offset are built on
// the tape so backward() yields df/dx. Used for SDF gradients and eikonal
// probes.
template <typename T>
typename Tape<T>::Id sdf_build_f_from_points(Tape<T>& tape, const BoundParams<T>& bound,
                                             const std::string& prefix,
                                             typename Tape<T>::Id points) {
  int n = tape.shape(points).dim(0);
  auto enc_x = tape.posenc(points, SdfArch::kPosLevels);
  auto raw = mlp_forward(tape, bound, prefix + "/trunk", SdfArch::trunk(), enc_x);
  auto sq = tape.sum_axis(tape.mul(points, points), 1);                       // [n]
  auto norm = tape.sqrt(tape.add(tape.reshape(sq, Shape::of(n, 1)),
                                 tape.constant_scalar(T(1e-12))));            // [n,1]
  auto f = tape.add(raw, tape.affine(norm, T(1), static_cast<T>(-SdfArch::kInitRadius)));
  tape.set_label(f, prefix + "/f");
  return f;
}

// Color head: enc(x)[60] ++ raw unit direction [3]. Returns [n,3] in (0,1).
template <typename T>
typename Tape<T>::Id sdf_build_color(Tape<T>& tape, const BoundParams<T>& bound,
                                     const std::string& prefix, typename Tape<T>::Id enc_x,
                                     typename Tape<T>::Id dirs) {
  auto head_in = tape.concat(enc_x, dirs, 1);
  auto rgb = tape.sigmoid(mlp_forward(tape, bound, prefix + "/head", SdfArch::head(), head_in));
  tape.set_label(rgb, prefix + "/rgb");
  return rgb;
}

template <typename T>
double sdf_sharpness(const ParameterSet<T>& params, const std::string& prefix) {
  return std::exp(static_cast<double>(params.at(prefix + "/s_log").data[0]));
}

// Plain evaluation at points (throwaway tape).
template <typename T>
std::vector<double> sdf_eval(const ParameterSet<T>& params, const std::string& prefix,
                             std::span<const Vec3> xs) {
  size_t n = xs.size();
  std::vector<T> enc(n * static_cast<size_t>(SdfArch::pos_width()));
  std::vector<T> off(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> p = {xs[i].x, xs[i].y, xs[i].z};
    auto e = positional_encode(p, SdfArch::kPosLevels);
    std::copy(e.begin(), e.end(), enc.begin() + i * e.size());
    off[i] = static_cast<T>(norm(xs[i]) - SdfArch::kInitRadius);
  }
  Tape<T> tape;
  auto bound = bind_params(tape, params);
  auto enc_id = tape.constant(Shape::of(static_cast<int>(n), SdfArch::pos_width()),
                              std::span<const T>(enc), "enc_x");
  auto off_id = tape.constant(Shape::of(static_cast<int>(n), 1), std::span<const T>(off), "offset");
  auto f = sdf_build_f(tape, bound, prefix, enc_id, off_id);
  auto out = tape.data(f);
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) r[i] = out[i];
  return r;
}

// Gradient of the network SDF via reverse mode with x as the input leaf.
template <typename T>
std::vector<Vec3> sdf_gradient(const ParameterSet<T>& params, const std::string& prefix,
                               std::span<const Vec3> xs) {
  size_t n = xs.size();
  std::vector<T> pts(n * 3);
  for (size_t i = 0; i < n; ++i) {
    pts[3 * i] = static_cast<T>(xs[i].x);
    pts[3 * i + 1] = static_cast<T>(xs[i].y);
    pts[3 * i + 2] = static_cast<T>(xs[i].z);
  }
  Tape<T> tape;
  auto bound = bind_params(tape, params);
  auto x_id = tape.input(Shape::of(static_cast<int>(n), 3), std::span<const T>(pts), "points");
  auto f = sdf_build_f_from_points(tape, bound, prefix, x_id);
  tape.backward(tape.sum(f));  // rows are independent, so d sum/dx row i = grad f_i
  auto g = tape.grad(x_id);
  std::vector<Vec3> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = Vec3{double(g[3 * i]), double(g[3 * i + 1]), double(g[3 * i + 2])};
  return out;
}

// Gradient of an analytic SDF: central differences, matching the network
// path's contract (unit-ish direction near the surface, not normalized here).
inline std::vector<Vec3> sdf_gradient(const AnalyticField& field, std::span<const Vec3> xs,
                                      double h = 1e-4) {
  std::vector<Vec3> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = analytic_gradient(field, xs[i], h);
  return out;
}

// Network SDF on a corner lattice, evaluated one z-slab at a time so the
// per-batch graphs stay small.
template <typename T>
ScalarGrid sample_sdf_grid(const ParameterSet<T>& params, const std::string& prefix, Vec3 lo,
                           Vec3 hi, int resolution) {
  ScalarGrid g;
  g.nx = g.ny = g.nz = resolution;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(static_cast<size_t>(resolution) * resolution * resolution);
  parallel_for(0, resolution, [&](int64_t iz) {
    std::vector<Vec3> slab(static_cast<size_t>(resolution) * resolution);
    for (int iy = 0; iy < resolution; ++iy)
      for (int ix = 0; ix < resolution; ++ix)
        slab[static_cast<size_t>(iy) * resolution + ix] = g.position(ix, iy, static_cast<int>(iz));
    std::vector<double> f = sdf_eval(params, prefix, slab);
    std::copy(f.begin(), f.end(),
              g.values.begin() + static_cast<size_t>(iz) * resolution * resolution);
  });
  return g;
}

}  // namespace fieldray
