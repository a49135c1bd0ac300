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
#include <functional>
#include <unordered_map>
#include <vector>

#include "meshpipe/bvh.hpp"
#include "meshpipe/mesh.hpp"

namespace meshpipe {

struct SignedDistanceResult {
  double distance = 0.0;       // negative inside (winding > 0.5)
  Vec3 nearest_point = Vec3::Zero();
  double winding = 0.0;
  bool uncertain = false;      // winding in [0.4, 0.6]
};

enum class BatchGrouping { None, Morton };

/// Signed distance against a fixed mesh: unsigned part from BVH closest-point
/// queries, sign from the generalized winding number (sum of signed solid
/// angles / 4pi, thresholded at 0.5). Meshes above `exact_max_triangles` use
/// a BVH-clustered dipole far field for the winding sum; smaller meshes are
/// evaluated exactly.
class SdfEvaluator {
 public:
  SdfEvaluator(const MeshBvh& bvh, const TriangleMesh& mesh,
               int exact_max_triangles = 50000, double far_field_beta = 10.0);

  SignedDistanceResult evaluate(const Vec3& p) const;
  double unsigned_distance(const Vec3& p, Vec3* nearest = nullptr) const;
  double winding_number(const Vec3& p) const;
  /// Full O(T) solid-angle sum, regardless of mesh size.
  double winding_number_exact(const Vec3& p) const;

  const MeshBvh& bvh() const { return *bvh_; }
  const TriangleMesh& mesh() const { return *mesh_; }
  bool clustered() const { return !moments_.empty(); }

 private:
  struct NodeMoment {
    Vec3 centroid = Vec3::Zero();     // area-weighted
    Vec3 area_normal = Vec3::Zero();  // sum of area-weighted face normals
    double radius = 0.0;              // bounds all node geometry around centroid
  };

  double winding_clustered(const Vec3& p, int node) const;

  const MeshBvh* bvh_;
  const TriangleMesh* mesh_;
  std::vector<NodeMoment> moments_;  // empty when evaluating exactly
  double beta_;
};

/// One-shot convenience; prefer a long-lived SdfEvaluator for many queries.
SignedDistanceResult signed_distance(const MeshBvh& bvh, const TriangleMesh& mesh,
                                     const Vec3& point);

/// Per-point results are bitwise identical across grouping modes; Morton mode
/// only reorders evaluation for BVH traversal locality.
std::vector<SignedDistanceResult> batch_signed_distance(
    const SdfEvaluator& sdf, const std::vector<Vec3>& points,
    BatchGrouping grouping);
std::vector<SignedDistanceResult> batch_signed_distance(
    const MeshBvh& bvh, const TriangleMesh& mesh, const std::vector<Vec3>& points,
    BatchGrouping grouping);

/// Narrow-band SDF samples on the virtual N^3 lattice over [-0.5, 0.5]^3.
/// Active cells are exactly those whose center lies within tau of the
/// surface; corner values are shared between neighboring cells.
struct SparseSdfGrid {
  struct Cell {
    Vec3i coord;
    // Corner c offsets the min lattice corner by (c&1, c>>1&1, c>>2&1).
    std::array<double, 8> corners;
  };

  int resolution = 0;
  double tau = 0.0;
  std::vector<Cell> cells;  // sorted by (i, j, k)

  double cell_size() const { return 1.0 / resolution; }
  Vec3 lattice_point(int i, int j, int k) const {
    double h = cell_size();
    return Vec3(i * h - 0.5, j * h - 0.5, k * h - 0.5);
  }
  Vec3 cell_center(const Vec3i& c) const {
    double h = cell_size();
    return Vec3((c.x() + 0.5) * h - 0.5, (c.y() + 0.5) * h - 0.5,
                (c.z() + 0.5) * h - 0.5);
  }
  bool cell_has_sign_change(const Cell& cell) const;

  /// Index into `cells` or -1. Built lazily by `build_index()`.
  int find(const Vec3i& coord) const;
  void build_index();

  void save(const std::string& path) const;
  static SparseSdfGrid load(const std::string& path);

 private:
  std::unordered_map<std::uint64_t, int> index_;
};

struct SampleStats {
  std::int64_t center_evaluations = 0;   // flood-fill cell center queries
  std::int64_t corner_evaluations = 0;   // lattice point queries
  std::int64_t winding_evaluations = 0;  // full winding computations
  std::int64_t total_point_evaluations() const {
    return center_evaluations + corner_evaluations;
  }
};

/// Field seam for sampling: must report a signed distance and the nearest
/// surface point (analytic fields in tests, mesh SDFs in production).
using SdfField = std::function<SignedDistanceResult(const Vec3&)>;

/// Band discovery by breadth-first flood from seed cells over 26-neighbor
/// adjacency, accepting cells whose center unsigned distance is <= tau.
/// Requires resolution >= 8 and tau >= 2 * cell_size. For watertight,
/// consistently oriented input the sign of each lattice value is resolved by
/// safe-edge propagation (winding evaluated once per region the surface
/// cannot cross); otherwise every lattice point gets a full winding query.
/// Either way values equal signed_distance at the same points bitwise.
SparseSdfGrid sample_sparse_grid(const SdfEvaluator& sdf, int resolution,
                                 double tau, SampleStats* stats = nullptr);
SparseSdfGrid sample_sparse_grid(const MeshBvh& bvh, const TriangleMesh& mesh,
                                 int resolution, double tau,
                                 SampleStats* stats = nullptr);

/// Same discovery, arbitrary field, explicit seeds.
SparseSdfGrid sample_sparse_grid_field(const SdfField& field, int resolution,
                                       double tau, std::vector<Vec3i> seed_cells,
                                       SampleStats* stats = nullptr);

/// Cells of the virtual lattice overlapped by triangle bounding boxes;
/// the default flood seeds.
std::vector<Vec3i> triangle_seed_cells(const TriangleMesh& mesh, int resolution);

/// Signed distances at lattice points of the N-resolution grid, equal to
/// signed_distance at each point bitwise. Watertight oriented meshes resolve
/// signs by safe-edge propagation over the point set; otherwise each point
/// gets a winding query.
std::vector<double> signed_lattice_values(const SdfEvaluator& sdf,
                                          const std::vector<Vec3i>& points,
                                          int resolution,
                                          SampleStats* stats = nullptr);

std::uint64_t cell_key(const Vec3i& c);

}  // namespace meshpipe
