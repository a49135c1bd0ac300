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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshpipe/core.hpp"

namespace meshpipe {

/// Indexed triangle soup. Positions are double precision model units.
/// Per-face part labels are optional and carried through IO when present.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3i> faces;
  std::vector<int> face_labels;  // empty or one label per face

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  Aabb bounds() const;
  Vec3 face_normal(std::size_t f) const;       // unit length, zero if degenerate
  double face_area(std::size_t f) const;
  Vec3 face_centroid(std::size_t f) const;

  /// Signed volume by the divergence theorem; positive for outward-oriented
  /// closed surfaces.
  double signed_volume() const;
};

struct ValidationReport {
  bool watertight = false;           // every edge has exactly two incident faces
  bool manifold = false;             // edge- and vertex-manifold
  bool consistently_oriented = false;
  int degenerate_face_count = 0;     // removed by validate()
  int boundary_edge_count = 0;
  int non_manifold_edge_count = 0;
  int connected_components = 0;

  std::string to_json() const;
};

/// Undirected edge with incident faces and (for 2-incident edges) the
/// interior dihedral angle in radians; pi means flat.
struct Edge {
  int v0 = 0, v1 = 0;                // v0 < v1
  std::vector<int> incident_faces;
  double dihedral = 0.0;             // valid only when incident_faces.size() == 2

  bool boundary() const { return incident_faces.size() == 1; }
  bool non_manifold() const { return incident_faces.size() > 2; }
};

struct EdgeSet {
  std::vector<Edge> edges;

  std::size_t size() const { return edges.size(); }
};

/// Uniform scale followed by translation: p' = scale * p + translation.
struct NormalizationTransform {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * p + translation; }
  Vec3 apply_inverse(const Vec3& p) const { return (p - translation) / scale; }
  TriangleMesh apply(const TriangleMesh& mesh) const;
  TriangleMesh apply_inverse(const TriangleMesh& mesh) const;
};

/// Removes degenerate faces (repeated vertex index, or area below
/// 1e-12 * bbox_diagonal^2) in place and reports topology. Faces are
/// otherwise untouched.
ValidationReport validate(TriangleMesh& mesh);

/// Checks indices are in range, no NaN/inf positions. Throws ValidationError.
void check_mesh(const TriangleMesh& mesh);

/// All undirected edges with incident-face lists and dihedral angles.
EdgeSet build_edge_set(const TriangleMesh& mesh);

/// Interior manifold edges whose dihedral deviates from flat by more than
/// angle_threshold: |pi - dihedral| > threshold. Boundary and non-manifold
/// edges are never classified sharp.
EdgeSet detect_sharp_edges(const TriangleMesh& mesh, double angle_threshold);
EdgeSet detect_sharp_edges(const EdgeSet& all_edges, double angle_threshold);

/// Scales/translates so the bounding box is centered at the origin with the
/// longest axis spanning 1 - 2*margin. Aspect ratio preserved.
std::pair<TriangleMesh, NormalizationTransform> normalize_to_unit_cube(
    const TriangleMesh& mesh, double margin);

/// V - E + F over the current face set.
long euler_characteristic(const TriangleMesh& mesh);

}  // namespace meshpipe
