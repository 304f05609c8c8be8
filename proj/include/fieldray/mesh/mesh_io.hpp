// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "fieldray/mesh/marching_cubes.hpp"

namespace fieldray {

// ASCII OBJ with v/f records, 1-based indices, fixed formatting so identical
// meshes produce identical files.
void export_obj(const TriangleMesh& mesh, const std::string& path);

// Minimal OBJ reader for round-trip checks: v and f records only, triangles
// required.
TriangleMesh load_obj(const std::string& path);

}  // namespace fieldray
