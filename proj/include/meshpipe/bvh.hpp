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

#include <vector>

#include "meshpipe/mesh.hpp"

namespace meshpipe {

/// Closest point on triangle abc to p (Ericson's region test). This is the
/// single arithmetic path used by both BVH traversal and exhaustive scans,
/// so their distances agree bit-for-bit.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

struct ClosestHit {
  double squared_distance = 0.0;
  Vec3 point = Vec3::Zero();
  int triangle = -1;
};

/// Binary AABB tree over triangles; median split on the longest axis of the
/// centroid bounds. Nodes are stored depth-first; leaves own a contiguous
/// range of the triangle permutation.
class MeshBvh {
 public:
  struct Node {
    Aabb box;
    int left = -1;    // internal: child node index; leaf: -1
    int right = -1;
    int begin = 0;    // leaf triangle range in `order`
    int end = 0;

    bool leaf() const { return left < 0; }
  };

  MeshBvh() = default;
  MeshBvh(const TriangleMesh& mesh, int leaf_size = 8);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& order() const { return order_; }
  int leaf_size() const { return leaf_size_; }
  bool empty() const { return nodes_.empty(); }

  ClosestHit closest_point(const TriangleMesh& mesh, const Vec3& p) const;

  /// Minimum distance between two meshes' surfaces via simultaneous
  /// traversal. Also reports a realizing point pair.
  static double surface_distance(const MeshBvh& bvh_a, const TriangleMesh& a,
                                 const MeshBvh& bvh_b, const TriangleMesh& b,
                                 Vec3* point_a = nullptr, Vec3* point_b = nullptr);

 private:
  int build(const TriangleMesh& mesh, std::vector<Vec3>& centroids, int begin,
            int end);

  std::vector<Node> nodes_;
  std::vector<int> order_;
  int leaf_size_ = 8;
};

/// Exhaustive nearest-triangle scan; the oracle that BVH queries must match.
ClosestHit closest_point_exhaustive(const TriangleMesh& mesh, const Vec3& p);

}  // namespace meshpipe
