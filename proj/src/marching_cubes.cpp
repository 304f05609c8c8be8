// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/mesh/marching_cubes.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "fieldray/util/error.hpp"

namespace fieldray {
namespace {

// Corner c in 0..7 sits at offset ((c>>0)&1, (c>>1)&1, (c>>2)&1).
int corner_of(int x, int y, int z) { return x + 2 * y + 4 * z; }

struct CubeEdge {
  int a, b;  // corners, a < b
  int axis;  // differing axis
};

struct EdgeTable {
  std::array<CubeEdge, 12> edges;
  int id[8][8];  // corner pair -> edge id
};

const EdgeTable& edge_table() {
  static const EdgeTable table = [] {
    EdgeTable t{};
    for (auto& row : t.id)
      for (auto& v : row) v = -1;
    int n = 0;
    for (int a = 0; a < 8; ++a)
      for (int b = a + 1; b < 8; ++b) {
        int diff = a ^ b;
        if (diff != 1 && diff != 2 && diff != 4) continue;
        t.edges[n] = {a, b, diff == 1 ? 0 : (diff == 2 ? 1 : 2)};
        t.id[a][b] = t.id[b][a] = n;
        ++n;
      }
    return t;
  }();
  return table;
}

// Corners of face (axis, side) in counter-clockwise order as seen from
// outside the cube.
std::array<int, 4> face_corners(int axis, int side) {
  int u = (axis + 1) % 3, w = (axis + 2) % 3;
  auto corner = [&](int uu, int ww) {
    int c[3] = {0, 0, 0};
    c[axis] = side;
    c[u] = uu;
    c[w] = ww;
    return corner_of(c[0], c[1], c[2]);
  };
  if (side == 1) return {corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)};
  return {corner(0, 0), corner(0, 1), corner(1, 1), corner(1, 0)};
}

// Directed isoline segments of one cell, indexed by starting cube edge.
// Walking each face CCW from outside, a crossing from inside to outside is an
// exit and starts a segment; the matching entry ends it. On ambiguous faces
// (four crossings) the pairing follows the face-center average, the one
// choice both adjacent cells make identically.
void cell_segments(const double corner_values[8], double iso, int start_to_end[12]) {
  const EdgeTable& et = edge_table();
  bool inside[8];
  for (int c = 0; c < 8; ++c) inside[c] = corner_values[c] < iso;

  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      std::array<int, 4> fc = face_corners(axis, side);
      int cross_edges[4], cross_count = 0;
      bool cross_exit[4];
      for (int i = 0; i < 4; ++i) {
        int ca = fc[i], cb = fc[(i + 1) % 4];
        if (inside[ca] == inside[cb]) continue;
        cross_edges[cross_count] = et.id[ca][cb];
        cross_exit[cross_count] = inside[ca];
        ++cross_count;
      }
      if (cross_count == 0) continue;
      if (cross_count == 2) {
        if (cross_exit[0] == cross_exit[1]) fail("field", "marching cubes: crossing parity");
        int ex = cross_exit[0] ? 0 : 1;
        start_to_end[cross_edges[ex]] = cross_edges[1 - ex];
        continue;
      }
      if (cross_count != 4) fail("field", "marching cubes: odd face crossing count");
      double center =
          0.25 * (corner_values[fc[0]] + corner_values[fc[1]] + corner_values[fc[2]] +
                  corner_values[fc[3]]);
      // center inside: pair each exit with the next entry along the walk,
      // keeping the two inside corners connected; otherwise with the previous
      // entry, separating them.
      int step = center < iso ? 1 : 3;
      for (int i = 0; i < 4; ++i) {
        if (!cross_exit[i]) continue;
        int j = (i + step) % 4;
        if (cross_exit[j]) fail("field", "marching cubes: crossing parity");
        start_to_end[cross_edges[i]] = cross_edges[j];
      }
    }
}

uint64_t lattice_edge_key(const ScalarGrid& g, int ix, int iy, int iz, int axis) {
  uint64_t point = (static_cast<uint64_t>(iz) * g.ny + iy) * g.nx + ix;
  return point * 3 + static_cast<uint64_t>(axis);
}

}  // namespace

TriangleMesh marching_cubes(const ScalarGrid& grid, double iso) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2 ||
      grid.values.size() != static_cast<size_t>(grid.nx) * grid.ny * grid.nz)
    fail("field", "marching cubes: malformed grid");
  const EdgeTable& et = edge_table();
  TriangleMesh mesh;
  std::unordered_map<uint64_t, int> vertex_of_edge;
  double corner_values[8];

  for (int iz = 0; iz + 1 < grid.nz; ++iz)
    for (int iy = 0; iy + 1 < grid.ny; ++iy)
      for (int ix = 0; ix + 1 < grid.nx; ++ix) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          corner_values[c] = grid.at(ix + (c & 1), iy + ((c >> 1) & 1), iz + ((c >> 2) & 1));
          if (corner_values[c] < iso) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;

        int start_to_end[12];
        std::fill(start_to_end, start_to_end + 12, -1);
        cell_segments(corner_values, iso, start_to_end);

        // Resolve each cut cube edge to a welded vertex index.
        int vertex_at[12];
        std::fill(vertex_at, vertex_at + 12, -1);
        for (int e = 0; e < 12; ++e) {
          if (start_to_end[e] < 0) continue;
          for (int cut : {e, start_to_end[e]}) {
            if (vertex_at[cut] >= 0) continue;
            const CubeEdge& ce = et.edges[cut];
            int ox = ix + (ce.a & 1), oy = iy + ((ce.a >> 1) & 1), oz = iz + ((ce.a >> 2) & 1);
            uint64_t key = lattice_edge_key(grid, ox, oy, oz, ce.axis);
            auto [it, fresh] = vertex_of_edge.emplace(key, static_cast<int>(mesh.vertices.size()));
            if (fresh) {
              double f0 = corner_values[ce.a], f1 = corner_values[ce.b];
              double t = f1 != f0 ? (iso - f0) / (f1 - f0) : 0.5;
              t = std::clamp(t, 0.0, 1.0);
              Vec3 p0 = grid.position(ox, oy, oz);
              Vec3 p1 = p0;
              p1[ce.axis] += grid.cell_size()[ce.axis];
              mesh.vertices.push_back(p0 + (p1 - p0) * t);
            }
            vertex_at[cut] = it->second;
          }
        }

        // Chain segments into loops and fan-triangulate. The walk convention
        // traces loops with the inside region on the left; reversing the fan
        // makes normals point toward larger field values.
        bool used[12] = {};
        for (int e0 = 0; e0 < 12; ++e0) {
          if (start_to_end[e0] < 0 || used[e0]) continue;
          int loop[12], len = 0;
          int e = e0;
          do {
            if (len >= 12 || used[e]) fail("field", "marching cubes: open segment chain");
            used[e] = true;
            loop[len++] = e;
            e = start_to_end[e];
            if (e < 0) fail("field", "marching cubes: open segment chain");
          } while (e != e0);
          for (int i = 1; i + 1 < len; ++i) {
            int a = vertex_at[loop[0]], b = vertex_at[loop[i + 1]], c = vertex_at[loop[i]];
            Vec3 va = mesh.vertices[a];
            Vec3 ab = mesh.vertices[b] - va, ac = mesh.vertices[c] - va;
            if (0.5 * norm(cross(ab, ac)) < 1e-12) continue;
            mesh.triangles.push_back({a, b, c});
          }
        }
      }
  return mesh;
}

}  // namespace fieldray
