// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fieldray/fields/encoding.hpp"
#include "fieldray/fields/mlp.hpp"
#include "fieldray/mesh/grid.hpp"
#include "fieldray/util/parallel.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

// Density + view-dependent color network. The trunk sees only encoded
// positions, so sigma is independent of view direction by construction.
// Trunk: enc(x)[60] -> 4x128 ReLU -> [1 + 64]; column 0 becomes sigma via
// softplus, columns 1..64 feed the color head together with enc(d)[24].
struct RadianceArch {
  static constexpr int kPosLevels = 9;
  static constexpr int kDirLevels = 3;
  static constexpr int kFeatureWidth = 64;

  static int pos_width() { return encoding_width(3, kPosLevels); }
  static int dir_width() { return encoding_width(3, kDirLevels); }
  static MlpSpec trunk() { return {{pos_width(), 128, 128, 128, 128, 1 + kFeatureWidth}}; }
  static MlpSpec head() { return {{kFeatureWidth + dir_width(), 64, 64, 3}}; }
};

template <typename T>
void radiance_init(ParameterSet<T>& params, const std::string& prefix, Stream rng) {
  mlp_init(params, prefix + "/trunk", RadianceArch::trunk(), rng.fork("trunk"));
  mlp_init(params, prefix + "/head", RadianceArch::head(), rng.fork("head"));
}

template <typename T>
struct RadianceNodes {
  typename Tape<T>::Id sigma;  // [n]
  typename Tape<T>::Id rgb;    // [n,3]
};

// enc_x: [n,60] encoded positions; enc_d: [n,24] encoded unit directions.
template <typename T>
RadianceNodes<T> radiance_build(Tape<T>& tape, const BoundParams<T>& bound,
                                const std::string& prefix, typename Tape<T>::Id enc_x,
                                typename Tape<T>::Id enc_d) {
  int n = tape.shape(enc_x).dim(0);
  auto trunk = mlp_forward(tape, bound, prefix + "/trunk", RadianceArch::trunk(), enc_x);
  auto sigma = tape.reshape(tape.softplus(tape.slice(trunk, 1, 0, 1)), Shape::of(n));
  auto feat = tape.slice(trunk, 1, 1, RadianceArch::kFeatureWidth);
  auto head_in = tape.concat(feat, enc_d, 1);
  auto rgb = tape.sigmoid(mlp_forward(tape, bound, prefix + "/head", RadianceArch::head(), head_in));
  tape.set_label(sigma, prefix + "/sigma");
  tape.set_label(rgb, prefix + "/rgb");
  return {sigma, rgb};
}

/// Convenience for tests and grid extraction: evaluate the field at points
// (and directions) on a throwaway tape.
template <typename T>
void radiance_eval(const ParameterSet<T>& params, const std::string& prefix,
                   std::span<const Vec3> xs, std::span<const Vec3> ds,
                   std::vector<double>* sigma_out, std::vector<Vec3>* rgb_out) {
  size_t n = xs.size();
  std::vector<double> px(3);
  std::vector<T> enc_x(n * static_cast<size_t>(RadianceArch::pos_width()));
  std::vector<T> enc_d(n * static_cast<size_t>(RadianceArch::dir_width()));
  for (size_t i = 0; i < n; ++i) {
    px = {xs[i].x, xs[i].y, xs[i].z};
    auto ex = positional_encode(px, RadianceArch::kPosLevels);
    std::copy(ex.begin(), ex.end(), enc_x.begin() + i * ex.size());
    const Vec3& d = ds.empty() ? Vec3{0, 0, -1} : ds[i];
    px = {d.x, d.y, d.z};
    auto ed = positional_encode(px, RadianceArch::kDirLevels);
    std::copy(ed.begin(), ed.end(), enc_d.begin() + i * ed.size());
  }
  Tape<T> tape;
  auto bound = bind_params(tape, params);
  auto ids_x = tape.constant(Shape::of(static_cast<int>(n), RadianceArch::pos_width()),
                             std::span<const T>(enc_x), "enc_x");
  auto ids_d = tape.constant(Shape::of(static_cast<int>(n), RadianceArch::dir_width()),
                             std::span<const T>(enc_d), "enc_d");
  auto nodes = radiance_build(tape, bound, prefix, ids_x, ids_d);
  auto sig = tape.data(nodes.sigma);
  auto rgb = tape.data(nodes.rgb);
  if (sigma_out) {
    sigma_out->resize(n);
    for (size_t i = 0; i < n; ++i) (*sigma_out)[i] = sig[i];
  }
  if (rgb_out) {
    rgb_out->resize(n);
    for (size_t i = 0; i < n; ++i)
      (*rgb_out)[i] = Vec3{double(rgb[3 * i]), double(rgb[3 * i + 1]), double(rgb[3 * i + 2])};
  }
}

// Density on a corner lattice, one z-slab per batch. Level sets of sigma are
// what density-field mesh extraction walks.
template <typename T>
ScalarGrid sample_density_grid(const ParameterSet<T>& params, const std::string& prefix, Vec3 lo,
                               Vec3 hi, int resolution) {
  ScalarGrid g;
  g.nx = g.ny = g.nz = resolution;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(static_cast<size_t>(resolution) * resolution * resolution);
  parallel_for(0, resolution, [&](int64_t iz) {
    std::vector<Vec3> slab(static_cast<size_t>(resolution) * resolution);
    std::vector<double> sigma;
    for (int iy = 0; iy < resolution; ++iy)
      for (int ix = 0; ix < resolution; ++ix)
        slab[static_cast<size_t>(iy) * resolution + ix] = g.position(ix, iy, static_cast<int>(iz));
    radiance_eval(params, prefix, slab, {}, &sigma, nullptr);
    std::copy(sigma.begin(), sigma.end(),
              g.values.begin() + static_cast<size_t>(iz) * resolution * resolution);
  });
  return g;
}

}  // namespace fieldray
