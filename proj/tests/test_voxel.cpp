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

#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "meshpipe/voxel.hpp"

using namespace meshpipe;

namespace {

// Exhaustive all-triangles x all-cells oracle.
VoxelPrior voxelize_bruteforce(const TriangleMesh& mesh, int m) {
  VoxelPrior prior;
  prior.resolution = m;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  const double h = 1.0 / m;
  for (int z = 0; z < m; ++z)
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x) {
        Vec3 center((x + 0.5) * h - 0.5, (y + 0.5) * h - 0.5, (z + 0.5) * h - 0.5);
        for (const auto& f : mesh.faces)
          if (triangle_box_overlap(mesh.vertices[f[0]], mesh.vertices[f[1]],
                                   mesh.vertices[f[2]], center,
                                   Vec3::Constant(0.5 * h))) {
            prior.set(x, y, z);
            break;
          }
      }
  return prior;
}

}  // namespace

TEST_SUITE("voxel") {

TEST_CASE("triangle inside one cell occupies exactly that cell") {
  TriangleMesh mesh;
  mesh.vertices = {{0.01, 0.01, 0.01}, {0.05, 0.01, 0.01}, {0.01, 0.05, 0.01}};
  mesh.faces = {{0, 1, 2}};
  VoxelPrior prior = voxelize_surface(mesh, 8);
  CHECK(prior.occupied_count() == 1);
  CHECK(prior.occupied(4, 4, 4));
}

TEST_CASE("unit cube surface at M=4 fills the 56 boundary cells") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.5);
  VoxelPrior prior = voxelize_surface(mesh, 4);
  CHECK(prior.occupied_count() == 56);
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        bool interior = x > 0 && x < 3 && y > 0 && y < 3 && z > 0 && z < 3;
        CHECK(prior.occupied(x, y, z) == !interior);
      }
}

TEST_CASE("voxelization equals the exhaustive oracle at M=16") {
  TriangleMesh mesh = fixtures::bumpy_sphere(2, 0.35, 0.08, 5);
  VoxelPrior fast = voxelize_surface(mesh, 16);
  VoxelPrior slow = voxelize_bruteforce(mesh, 16);
  CHECK(fast.bits == slow.bits);
}

TEST_CASE("voxelize rejects tiny resolutions") {
  CHECK_THROWS_AS(voxelize_surface(fixtures::cube(Vec3::Zero(), 0.4), 3),
                  ValidationError);
}

TEST_CASE("chebyshev dilation of one interior cell fills the 27 neighborhood") {
  VoxelPrior prior;
  prior.resolution = 8;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  prior.set(4, 4, 4);
  VoxelPrior grown = dilate(prior, 1, Structuring::Chebyshev);
  CHECK(grown.occupied_count() == 27);
  CHECK(grown.dilation_radius == 1);
}

TEST_CASE("l1 dilation of one interior cell fills 7 cells") {
  VoxelPrior prior;
  prior.resolution = 8;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  prior.set(4, 4, 4);
  CHECK(dilate(prior, 1, Structuring::L1).occupied_count() == 7);
}

TEST_CASE("radius zero dilation is identity") {
  VoxelPrior prior = voxelize_surface(fixtures::cube(Vec3::Zero(), 0.3), 8);
  VoxelPrior same = dilate(prior, 0);
  CHECK(same.bits == prior.bits);
}

TEST_CASE("dilation is extensive, monotone, and composable") {
  VoxelPrior prior = voxelize_surface(fixtures::icosphere(2, 0.35), 12);
  VoxelPrior one = dilate(prior, 1);
  VoxelPrior two = dilate(prior, 2);
  for (std::size_t w = 0; w < prior.bits.size(); ++w) {
    CHECK((prior.bits[w] & ~one.bits[w]) == 0);  // X subset of dilate(X, 1)
    CHECK((one.bits[w] & ~two.bits[w]) == 0);
  }
  VoxelPrior composed = dilate(one, 1);
  CHECK(composed.bits == two.bits);
}

TEST_CASE("dilation clips at the grid boundary") {
  VoxelPrior prior;
  prior.resolution = 4;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  prior.set(0, 0, 0);
  CHECK(dilate(prior, 1).occupied_count() == 8);
}

TEST_CASE("positional encoding of an empty prior is empty") {
  VoxelPrior prior;
  prior.resolution = 4;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  CHECK(positional_encoding(prior).cells.empty());
}

TEST_CASE("positional encoding centers use the cell-center formula") {
  VoxelPrior prior;
  prior.resolution = 2;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  prior.set(0, 0, 0);
  VoxelPositionalEncoding enc = positional_encoding(prior);
  REQUIRE(enc.centers.size() == 1);
  CHECK((enc.centers[0] - Vec3(-0.25, -0.25, -0.25)).norm() < 1e-15);
}

TEST_CASE("full grid encoding is morton sorted and bijective") {
  VoxelPrior prior;
  prior.resolution = 4;
  prior.bits.assign((prior.bit_count() + 63) / 64, ~std::uint64_t(0));
  VoxelPositionalEncoding enc = positional_encoding(prior);
  REQUIRE(enc.cells.size() == 64);
  std::uint64_t previous = 0;
  for (std::size_t i = 0; i < enc.cells.size(); ++i) {
    std::uint64_t code = morton3(std::uint32_t(enc.cells[i].x()),
                                 std::uint32_t(enc.cells[i].y()),
                                 std::uint32_t(enc.cells[i].z()));
    if (i) CHECK(code > previous);
    previous = code;
  }
}

TEST_CASE("coverage check validates the hierarchical precondition") {
  TriangleMesh mesh = fixtures::icosphere(3, 0.4);
  MeshBvh bvh(mesh);
  SdfEvaluator sdf(bvh, mesh);
  SparseSdfGrid grid = sample_sparse_grid(sdf, 32, 3.0 / 32);

  VoxelPrior good = dilate(voxelize_surface(mesh, 8), 1);
  CHECK(coverage_check(good, grid).ok());

  VoxelPrior empty;
  empty.resolution = 8;
  empty.bits.assign((empty.bit_count() + 63) / 64, 0);
  CoverageReport report = coverage_check(empty, grid);
  std::size_t sign_change = 0;
  for (const auto& cell : grid.cells)
    if (grid.cell_has_sign_change(cell)) ++sign_change;
  CHECK(report.missed_sign_change_cells.size() == sign_change);

  VoxelPrior full;
  full.resolution = 8;
  full.bits.assign((full.bit_count() + 63) / 64, ~std::uint64_t(0));
  CHECK(coverage_check(full, grid).ok());
}

TEST_CASE("prior binary serialization round trips") {
  VoxelPrior prior = dilate(voxelize_surface(fixtures::cube(Vec3::Zero(), 0.3), 8), 1);
  std::filesystem::create_directories("test_tmp/voxel");
  prior.save_binary("test_tmp/voxel/prior.mpvx");
  VoxelPrior back = VoxelPrior::load_binary("test_tmp/voxel/prior.mpvx");
  CHECK(back.resolution == prior.resolution);
  CHECK(back.dilation_radius == prior.dilation_radius);
  CHECK(back.bits == prior.bits);
  CHECK(prior.to_json().find("\"occupied\"") != std::string::npos);
}

}  // TEST_SUITE
