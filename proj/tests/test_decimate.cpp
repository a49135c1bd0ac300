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

#include <cmath>

#include "fixtures.hpp"
#include "meshpipe/decimate.hpp"

using namespace meshpipe;

TEST_SUITE("decimate") {

TEST_CASE("target at or above current face count is a no-op") {
  TriangleMesh cube = fixtures::cube(Vec3::Zero(), 0.5);
  TriangleMesh out = decimate_to(cube, 12);
  CHECK(out.faces.size() == 12);
  CHECK(fixtures::hausdorff_distance(out, cube) < 1e-12);
}

TEST_CASE("subdivided cube collapses losslessly to 12 faces") {
  TriangleMesh cube = fixtures::subdivide_midpoint(fixtures::cube(Vec3::Zero(), 0.5), 3);
  REQUIRE(cube.faces.size() == 768);
  DecimateStats stats;
  TriangleMesh out = decimate_to(cube, 12, false, 0.5, &stats);
  CHECK(out.faces.size() == 12);
  CHECK(stats.reached_target);
  CHECK(fixtures::hausdorff_distance(out, fixtures::cube(Vec3::Zero(), 0.5)) <= 1e-6);
  TriangleMesh check = out;
  ValidationReport report = validate(check);
  CHECK(report.watertight);
  CHECK(report.manifold);
}

TEST_CASE("sphere decimation preserves topology") {
  TriangleMesh sphere = fixtures::icosphere(4, 0.4);
  REQUIRE(sphere.faces.size() == 5120);
  TriangleMesh out = decimate_to(sphere, 320);
  CHECK(out.faces.size() <= 320);
  CHECK(out.faces.size() >= 318);
  ValidationReport report = validate(out);
  CHECK(report.watertight);
  CHECK(report.manifold);
  CHECK(euler_characteristic(out) == 2);
}

TEST_CASE("budget is monotone across targets") {
  TriangleMesh sphere = fixtures::icosphere(3, 0.4);
  std::size_t previous = sphere.faces.size();
  double previous_cost = 0.0;
  for (int target : {1000, 700, 400, 150, 40}) {
    DecimateStats stats;
    TriangleMesh out = decimate_to(sphere, target, false, 0.5, &stats);
    CHECK(out.faces.size() <= previous);
    CHECK(out.faces.size() <= std::size_t(target));
    // Lower budgets extend the collapse sequence, accumulating cost.
    CHECK(stats.total_cost >= previous_cost - 1e-15);
    previous = out.faces.size();
    previous_cost = stats.total_cost;
  }
}

TEST_CASE("collapse cost of coplanar neighborhoods is zero") {
  // Two vertices on a flat sheet: their quadrics annihilate in-plane points.
  VertexQuadric qa, qb;
  qa.add_plane(Vec3(0, 0, 1), -0.2, 1.0);
  qb.add_plane(Vec3(0, 0, 1), -0.2, 2.0);
  CollapseCandidate cand =
      collapse_cost(qa, qb, Vec3(0, 0, 0.2), Vec3(1, 0, 0.2));
  CHECK(cand.cost <= 1e-15);
}

TEST_CASE("collapse cost at a cube corner is positive") {
  VertexQuadric qa, qb;
  qa.add_plane(Vec3(1, 0, 0), -0.5, 1.0);
  qa.add_plane(Vec3(0, 1, 0), -0.5, 1.0);
  qa.add_plane(Vec3(0, 0, 1), -0.5, 1.0);
  qb.add_plane(Vec3(1, 0, 0), -0.5, 1.0);
  // Moving away from the corner must cost; force placement off-corner.
  CollapseCandidate cand =
      collapse_cost(qa, qb, Vec3(0.5, 0.5, 0.5), Vec3(0.5, 0.2, 0.5));
  CHECK(cand.cost >= 0.0);
  VertexQuadric sum;
  sum.q = qa.q + qb.q;
  CHECK(sum.cost(Vec3(0.4, 0.4, 0.4)) > 1e-4);
}

TEST_CASE("collapse cost equals direct quadratic form evaluation") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    VertexQuadric qa, qb;
    for (int i = 0; i < 4; ++i) {
      Vec3 n = rng.unit_vector();
      qa.add_plane(n, rng.uniform(-0.5, 0.5), rng.uniform(0.1, 2.0));
      n = rng.unit_vector();
      qb.add_plane(n, rng.uniform(-0.5, 0.5), rng.uniform(0.1, 2.0));
    }
    Vec3 pa(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vec3 pb(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    CollapseCandidate cand = collapse_cost(qa, qb, pa, pb);
    VertexQuadric sum;
    sum.q = qa.q + qb.q;
    CHECK(cand.cost == doctest::Approx(sum.cost(cand.position)).epsilon(1e-9));
  }
}

TEST_CASE("preserve_sharp keeps the 12 cube edges to the end") {
  TriangleMesh cube = fixtures::subdivide_midpoint(fixtures::cube(Vec3::Zero(), 0.5), 3);
  TriangleMesh out = decimate_to(cube, 12, true, 30.0 * M_PI / 180.0);
  REQUIRE(out.faces.size() == 12);
  EdgeSet sharp = detect_sharp_edges(out, 30.0 * M_PI / 180.0);
  CHECK(sharp.size() == 12);
  for (const auto& e : sharp.edges)
    CHECK(std::abs(e.dihedral - M_PI / 2) < 1e-6);
}

TEST_CASE("non-manifold input is rejected") {
  TriangleMesh open = fixtures::open_cube(Vec3::Zero(), 0.5);
  CHECK_THROWS_AS(decimate_to(open, 6), ValidationError);
  CHECK_THROWS_AS(decimate_to(fixtures::cube(Vec3::Zero(), 0.5), 3),
                  ValidationError);
}

TEST_CASE("decimated output stays watertight over a sweep") {
  TriangleMesh blob = fixtures::bumpy_sphere(3, 0.4, 0.08, 19);
  for (int target : {700, 300, 120}) {
    TriangleMesh out = decimate_to(blob, target);
    ValidationReport report = validate(out);
    CHECK(report.watertight);
    CHECK(report.manifold);
  }
}

}  // TEST_SUITE
