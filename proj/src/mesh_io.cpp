// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/mesh/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fieldray/util/error.hpp"

namespace fieldray {

void export_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("io", "cannot open " + path + " for writing");
  char line[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
    out << line;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(line, sizeof line, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out << line;
  }
  if (!out.good()) fail("io", "write failed for " + path);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open " + path);
  TriangleMesh mesh;
  std::string line, tag;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) fail("io", "malformed vertex in " + path);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      std::string part;
      for (int i = 0; i < 3; ++i) {
        if (!(ls >> part)) fail("io", "malformed face in " + path);
        f[i] = std::stoi(part.substr(0, part.find('/'))) - 1;  // v or v/vt/vn form
        if (f[i] < 0) fail("io", "face index out of range in " + path);
      }
      if (ls >> part) fail("io", "non-triangle face in " + path);
      mesh.triangles.push_back(f);
    }
  }
  for (const auto& t : mesh.triangles)
    for (int idx : t)
      if (idx >= static_cast<int>(mesh.vertices.size()))
        fail("io", "face index out of range in " + path);
  return mesh;
}

}  // namespace fieldray
