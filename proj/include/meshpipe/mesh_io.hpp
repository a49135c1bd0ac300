// Copyright 2026 The Meshpipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "meshpipe/mesh.hpp"

namespace meshpipe {

enum class MeshFormat { Obj, PlyAscii, PlyBinary };

/// Picks OBJ for .obj and binary PLY for .ply.
MeshFormat format_from_path(const std::string& path);

/// Parses OBJ (v/f records; polygons fan-triangulated from the first vertex;
/// vt/vn/materials ignored) or PLY (ASCII or binary little-endian). The
/// result is validated; degenerate faces are removed. Throws ValidationError
/// with a line or byte offset on malformed input or an empty mesh.
TriangleMesh load_mesh(const std::string& path);
TriangleMesh load_mesh(const std::string& path, MeshFormat format);

/// Writes OBJ text at 9 significant digits, or PLY with float64 positions
/// (bit-exact round trip in binary). Face labels, when present, are written
/// to PLY as a per-face int property. Refuses meshes without faces.
void save_mesh(const TriangleMesh& mesh, const std::string& path);
void save_mesh(const TriangleMesh& mesh, const std::string& path, MeshFormat format);

}  // namespace meshpipe
