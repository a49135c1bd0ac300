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

#include <cstdint>

#include "meshpipe/mesh.hpp"

namespace meshpipe {

/// Accumulated plane quadric: cost(x) = (x,1)^T Q (x,1).
struct VertexQuadric {
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  bool boundary_penalized = false;

  void add_plane(const Vec3& unit_normal, double offset, double weight);
  double cost(const Vec3& x) const;
};

/// Minimizer of the summed quadric; falls back to the best of the two
/// endpoints and the midpoint when the system is singular.
struct CollapseCandidate {
  double cost = 0.0;
  Vec3 position = Vec3::Zero();
  bool used_fallback = false;
};
CollapseCandidate collapse_cost(const VertexQuadric& qa, const VertexQuadric& qb,
                                const Vec3& pa, const Vec3& pb);

struct DecimateStats {
  std::int64_t collapses = 0;
  std::int64_t rejected_link = 0;
  std::int64_t rejected_flip = 0;
  std::int64_t endpoint_retries = 0;
  double total_cost = 0.0;     // summed quadric cost of performed collapses
  bool reached_target = true;  // false when topology stopped decimation early
};

/// Greedy quadric-error edge collapse to at most `target_faces` faces.
/// Collapses that flip an incident face normal are retried once with
/// endpoint placement and otherwise discarded; the link condition keeps the
/// output manifold. With preserve_sharp, edges sharper than sharp_threshold
/// cost 10x. Requires manifold watertight input and target_faces >= 4.
TriangleMesh decimate_to(const TriangleMesh& mesh, int target_faces,
                         bool preserve_sharp = false,
                         double sharp_threshold = 30.0 * M_PI / 180.0,
                         DecimateStats* stats = nullptr);

}  // namespace meshpipe
