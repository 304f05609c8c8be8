// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fieldray/mesh/grid.hpp"
#include "fieldray/util/vec.hpp"

namespace fieldray {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

// Isosurface of grid at `iso` with vertices on lattice edges via linear
// interpolation, shared through edge-keyed welding. Triangles wind so normals
// point toward increasing field values (outward for an SDF). Watertight on
// closed surfaces fully inside the grid: face ambiguities are resolved by the
// face-center average, which both cells sharing a face agree on.
TriangleMesh marching_cubes(const ScalarGrid& grid, double iso);

}  // namespace fieldray
