// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fieldray/util/error.hpp"
#include "fieldray/util/parallel.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

// Axis-aligned lattice of field samples; values are at cell corners, so a
// resolution of n gives n-1 cells per axis.
struct ScalarGrid {
  int nx = 0, ny = 0, nz = 0;
  Vec3 lo{-1, -1, -1}, hi{1, 1, 1};
  std::vector<double> values;  // x fastest, then y, then z

  double at(int ix, int iy, int iz) const {
    return values[(static_cast<size_t>(iz) * ny + iy) * nx + ix];
  }
  Vec3 position(int ix, int iy, int iz) const {
    auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
    return {lerp(lo.x, hi.x, nx > 1 ? double(ix) / (nx - 1) : 0.0),
            lerp(lo.y, hi.y, ny > 1 ? double(iy) / (ny - 1) : 0.0),
            lerp(lo.z, hi.z, nz > 1 ? double(iz) / (nz - 1) : 0.0)};
  }
  Vec3 cell_size() const {
    return {(hi.x - lo.x) / (nx - 1), (hi.y - lo.y) / (ny - 1), (hi.z - lo.z) / (nz - 1)};
  }
};

inline ScalarGrid sample_grid(const std::function<double(const Vec3&)>& field, Vec3 lo, Vec3 hi,
                              int nx, int ny, int nz) {
  if (nx < 2 || ny < 2 || nz < 2) fail("field", "grid resolution must be at least 2 per axis");
  if (nx > 256 || ny > 256 || nz > 256) fail("field", "grid resolution capped at 256 per axis");
  ScalarGrid g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(static_cast<size_t>(nx) * ny * nz);
  parallel_for(0, nz, [&](int iz) {
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        double v = field(g.position(ix, iy, iz));
        if (!std::isfinite(v))
          fail("field", "non-finite field value at lattice (" + std::to_string(ix) + "," +
                            std::to_string(iy) + "," + std::to_string(iz) + ")");
        g.values[(static_cast<size_t>(iz) * ny + iy) * nx + ix] = v;
      }
  });
  return g;
}

}  // namespace fieldray
