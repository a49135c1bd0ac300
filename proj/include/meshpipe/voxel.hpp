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
#include <string>
#include <vector>

#include "meshpipe/mesh.hpp"
#include "meshpipe/sdf.hpp"

namespace meshpipe {

enum class Structuring { Chebyshev, L1 };

/// Binary occupancy over an M^3 grid spanning [-0.5, 0.5]^3.
struct VoxelPrior {
  int resolution = 0;
  int dilation_radius = 0;           // total radius applied so far
  std::string provenance;            // source mesh identifier
  std::vector<std::uint64_t> bits;   // M^3 bits, x-major (x + M*(y + M*z))

  double cell_size() const { return 1.0 / resolution; }
  std::size_t bit_count() const {
    std::size_t m = std::size_t(resolution);
    return m * m * m;
  }
  bool occupied(int x, int y, int z) const {
    std::size_t i = std::size_t(x) +
                    std::size_t(resolution) * (std::size_t(y) +
                                               std::size_t(resolution) * std::size_t(z));
    return (bits[i >> 6] >> (i & 63)) & 1;
  }
  void set(int x, int y, int z) {
    std::size_t i = std::size_t(x) +
                    std::size_t(resolution) * (std::size_t(y) +
                                               std::size_t(resolution) * std::size_t(z));
    bits[i >> 6] |= std::uint64_t(1) << (i & 63);
  }
  std::size_t occupied_count() const;
  /// Occupied coordinates in x-major scan order.
  std::vector<Vec3i> occupied_cells() const;

  void save_binary(const std::string& path) const;
  static VoxelPrior load_binary(const std::string& path);
  std::string to_json() const;
};

/// Occupied-cell centers sorted by Morton code.
struct VoxelPositionalEncoding {
  std::vector<Vec3i> cells;
  std::vector<Vec3> centers;

  void save_csv(const std::string& path) const;
};

/// Exact triangle vs cell-AABB overlap (separating axis test, boundary
/// touching counts). Conservative by construction: no false negatives.
bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c,
                          const Vec3& box_center, const Vec3& box_half);

/// Marks every cell whose AABB any triangle touches. Requires resolution >= 4
/// and a mesh normalized into [-0.5, 0.5]^3.
VoxelPrior voxelize_surface(const TriangleMesh& mesh, int resolution);

VoxelPrior dilate(const VoxelPrior& prior, int radius,
                  Structuring structuring = Structuring::Chebyshev);

VoxelPositionalEncoding positional_encoding(const VoxelPrior& prior);

struct CoverageReport {
  std::vector<Vec3i> missed_sign_change_cells;  // fine cells, sorted

  bool ok() const { return missed_sign_change_cells.empty(); }
};

/// Fine sign-change cells whose coarse ancestor is unoccupied. An empty
/// report certifies the hierarchical-extraction equivalence precondition.
CoverageReport coverage_check(const VoxelPrior& prior, const SparseSdfGrid& grid);

}  // namespace meshpipe
