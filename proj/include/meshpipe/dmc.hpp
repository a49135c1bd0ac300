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
#include <vector>

#include "meshpipe/sdf.hpp"
#include "meshpipe/voxel.hpp"

namespace meshpipe {

/// Surface crossing on a lattice edge with the outward-of-negative normal.
struct HermiteSample {
  Vec3i edge_origin;   // lattice point at the low end of the edge
  int axis = 0;        // 0=x, 1=y, 2=z
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // unit, oriented negative -> positive side
  bool on_sharp_edge = false;  // near a detected sharp edge of the source mesh
  // Distance from the interpolated crossing to the actual surface; large
  // values flag cross-sheet interpolation near creases and down-weight the
  // constraint.
  double position_error = 0.0;
};

enum class QefMode { L2, LInf };

struct ExtractionConfig {
  int resolution = 64;
  QefMode qef_mode = QefMode::LInf;
  int irls_iterations = 16;
  double lambda = 1e-3;        // regularizer scale; effective weight is
                               // lambda * constraint_count
  bool clamp_to_cell = true;
  double sharp_angle = 30.0 * M_PI / 180.0;  // sharp-edge detection threshold
  double sharp_weight = 2.0;   // constraint weight for sharp hermite samples
};

struct QefProblem {
  struct Constraint {
    Vec3 point;
    Vec3 normal;   // unit length
    double weight = 1.0;
  };
  std::vector<Constraint> constraints;
  Vec3 mass_point = Vec3::Zero();  // plain mean of constraint points
  Aabb cell_bounds;
};

struct QefDiagnostics {
  std::int64_t singular_fallbacks = 0;
  std::int64_t clamped = 0;
  // Max residual of each accepted LInf iterate, starting from the L2 seed;
  // non-increasing by construction.
  std::vector<double> linf_residual_trace;
};

/// L2 mode solves the regularized normal equations. LInf mode approximates
/// the minimax placement by iteratively reweighted least squares with the
/// exponent ramped 2 -> 8; the best (lowest max-residual) iterate is kept, so
/// raising the iteration cap never worsens the result.
Vec3 solve_qef(const QefProblem& problem, const ExtractionConfig& config,
               QefDiagnostics* diagnostics = nullptr);

/// Max over constraints of |n . (x - p)|, ignoring weights.
double qef_max_residual(const QefProblem& problem, const Vec3& x);

/// One sample per active lattice edge with a corner sign change. Crossings
/// by linear interpolation; normals from the direction to the nearest
/// surface point, oriented along increasing SDF. The mesh overload falls
/// back to the nearest triangle's plane normal where the crossing sits on
/// the surface.
std::vector<HermiteSample> collect_hermite(const SparseSdfGrid& grid,
                                           const SdfField& field);
std::vector<HermiteSample> collect_hermite(const SparseSdfGrid& grid,
                                           const MeshBvh& bvh,
                                           const TriangleMesh& mesh);

/// Flags samples lying within `max_distance` of any detected sharp edge of
/// the source mesh; those constraints get ExtractionConfig::sharp_weight.
void mark_sharp_samples(std::vector<HermiteSample>& samples,
                        const TriangleMesh& source_mesh, double sharp_angle,
                        double max_distance);

/// A sign-change lattice edge whose surrounding cells are not all active.
struct BandIncompleteError : StageError {
  explicit BandIncompleteError(std::vector<Vec3i> cells);
  std::vector<Vec3i> missing_cells;
};

struct ExtractStats {
  std::int64_t sign_change_cells = 0;
  QefDiagnostics qef;
};

/// One QEF vertex per sign-change cell, one quad (two triangles, split on
/// the shorter diagonal) per sign-change lattice edge, oriented so normals
/// run from negative to positive SDF. Throws BandIncompleteError when a
/// sign-change edge lacks one of its four cells.
TriangleMesh extract_dual_mesh(const SparseSdfGrid& grid,
                               const std::vector<HermiteSample>& hermite,
                               const ExtractionConfig& config,
                               ExtractStats* stats = nullptr);

struct HierarchicalStats {
  std::int64_t coarse_occupied = 0;
  std::int64_t mid_evaluations = 0;
  std::int64_t fine_cells_evaluated = 0;
  std::int64_t fine_point_evaluations = 0;  // lattice corner queries
  bool empty_prior = false;
};

/// Extraction restricted by the occupancy prior: fine cells are sampled only
/// inside occupied coarse blocks whose 2^3-cell mid blocks pass an |SDF|
/// filter that provably keeps every possible sign-change cell. Produces the
/// same mesh as dense-band extraction whenever the prior covers all true
/// sign-change cells.
TriangleMesh extract_hierarchical(const SdfEvaluator& sdf, const VoxelPrior& prior,
                                  int fine_resolution, double tau,
                                  const ExtractionConfig& config,
                                  HierarchicalStats* stats = nullptr,
                                  SparseSdfGrid* out_grid = nullptr);

/// normalize(d input) -> sparse band -> hermite (+sharp weighting) -> dual
/// mesh. Input must already sit inside [-0.5, 0.5]^3 with room for the band.
TriangleMesh remesh_watertight(const TriangleMesh& mesh, const ExtractionConfig& config,
                               double tau = 0.0,  // 0 -> 3 * cell_size
                               ExtractStats* stats = nullptr,
                               SampleStats* sample_stats = nullptr);

}  // namespace meshpipe
