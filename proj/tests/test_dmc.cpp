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
#include "meshpipe/dmc.hpp"
#include "meshpipe/parts.hpp"
#include "meshpipe/voxel.hpp"

using namespace meshpipe;

namespace {

ExtractionConfig config_for(int resolution, QefMode mode = QefMode::LInf) {
  ExtractionConfig config;
  config.resolution = resolution;
  config.qef_mode = mode;
  return config;
}

SparseSdfGrid sphere_grid(int n, double radius, double tau_cells = 3.0) {
  Vec3i seed(n / 2, n / 2, int((radius + 0.5) * n) % n);
  return sample_sparse_grid_field(fixtures::sphere_field(radius), n,
                                  tau_cells / n, {seed});
}

double sphere_hausdorff(const TriangleMesh& mesh, double radius) {
  // Directed both ways against the analytic sphere.
  double worst = 0.0;
  for (const auto& v : mesh.vertices)
    worst = std::max(worst, std::abs(v.norm() - radius));
  PointCloudSample surface = sample_surface(mesh, 5000, 3);
  for (const auto& p : surface.points)
    worst = std::max(worst, std::abs(p.norm() - radius));
  MeshBvh bvh(mesh);
  Rng rng(9);
  for (int i = 0; i < 5000; ++i) {
    Vec3 p = radius * rng.unit_vector();
    ClosestHit hit = bvh.closest_point(mesh, p);
    worst = std::max(worst, std::sqrt(hit.squared_distance));
  }
  return worst;
}

}  // namespace

TEST_SUITE("dmc") {

TEST_CASE("hermite crossing by linear interpolation") {
  // One cell with a single sign change along the x edge at the origin.
  SparseSdfGrid grid;
  grid.resolution = 8;
  grid.tau = 0.5;
  SparseSdfGrid::Cell cell;
  cell.coord = Vec3i(4, 4, 4);
  cell.corners = {-0.25, 0.75, 0.1, 0.6, 0.2, 0.7, 0.3, 0.8};
  grid.cells.push_back(cell);
  grid.build_index();
  auto samples = collect_hermite(grid, fixtures::sphere_field(10.0));
  bool found = false;
  for (const auto& s : samples)
    if (s.axis == 0 && s.edge_origin == Vec3i(4, 4, 4)) {
      found = true;
      double h = grid.cell_size();
      Vec3 origin = grid.lattice_point(4, 4, 4);
      CHECK(s.point.x() == doctest::Approx(origin.x() + 0.25 * h).epsilon(1e-12));
      CHECK(s.point.y() == doctest::Approx(origin.y()).epsilon(1e-12));
    }
  CHECK(found);
}

TEST_CASE("sphere hermite normals are radial within 2 degrees") {
  SparseSdfGrid grid = sphere_grid(64, 0.4);
  auto samples = collect_hermite(grid, fixtures::sphere_field(0.4));
  REQUIRE(samples.size() > 1000);
  for (const auto& s : samples) {
    CHECK(std::abs(s.normal.norm() - 1.0) < 1e-9);
    double c = std::clamp(s.normal.dot(s.point.normalized()), -1.0, 1.0);
    CHECK(std::acos(c) < 2.0 * M_PI / 180.0);
  }
}

TEST_CASE("grid without sign changes yields no hermite samples") {
  SparseSdfGrid grid;
  grid.resolution = 8;
  grid.tau = 0.5;
  SparseSdfGrid::Cell cell;
  cell.coord = Vec3i(1, 1, 1);
  cell.corners = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  grid.cells.push_back(cell);
  grid.build_index();
  CHECK(collect_hermite(grid, fixtures::sphere_field(0.4)).empty());
}

TEST_CASE("qef reproduces the intersection of three orthogonal planes") {
  const Vec3 q(0.03, -0.01, 0.02);
  QefProblem problem;
  problem.constraints = {{q + Vec3(0, 0.1, 0.2), Vec3(1, 0, 0), 1.0},
                         {q + Vec3(0.1, 0, -0.1), Vec3(0, 1, 0), 1.0},
                         {q + Vec3(-0.2, 0.1, 0), Vec3(0, 0, 1), 1.0}};
  for (const auto& c : problem.constraints) problem.mass_point += c.point / 3.0;
  for (QefMode mode : {QefMode::L2, QefMode::LInf}) {
    ExtractionConfig config = config_for(8, mode);
    config.lambda = 0.0;
    config.clamp_to_cell = false;
    Vec3 x = solve_qef(problem, config);
    CHECK((x - q).norm() < 1e-9);
  }
}

TEST_CASE("single plane with lambda projects the mass point") {
  QefProblem problem;
  problem.constraints = {{Vec3(0, 0, 0.25), Vec3(0, 0, 1), 1.0}};
  problem.mass_point = Vec3(0.1, -0.05, 0.1);
  ExtractionConfig config = config_for(8, QefMode::L2);
  config.lambda = 1e-6;
  config.clamp_to_cell = false;
  Vec3 x = solve_qef(problem, config);
  Vec3 expected(0.1, -0.05, 0.25);  // projection onto the plane z = 0.25
  CHECK((x - expected).norm() < 1e-6);
}

TEST_CASE("singular qef with lambda zero falls back to the mass point") {
  QefProblem problem;
  problem.constraints = {{Vec3(0, 0, 0.25), Vec3(0, 0, 1), 1.0}};
  problem.mass_point = Vec3(0.1, -0.05, 0.1);
  ExtractionConfig config = config_for(8, QefMode::L2);
  config.lambda = 0.0;
  config.clamp_to_cell = false;
  QefDiagnostics diag;
  Vec3 x = solve_qef(problem, config, &diag);
  CHECK(diag.singular_fallbacks == 1);
  CHECK((x - problem.mass_point).norm() < 1e-12);
}

// Oracle: brute-force minimax over a 41^3 lattice spanning the cell.
TEST_CASE("linf solution beats the lattice oracle on noisy corner planes") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 corner(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                      rng.uniform(-0.2, 0.2));
    const double h = 0.5;
    QefProblem problem;
    problem.cell_bounds.expand(corner - Vec3::Constant(h / 2));
    problem.cell_bounds.expand(corner + Vec3::Constant(h / 2));
    for (int i = 0; i < 8; ++i) {
      Vec3 n = Vec3(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1).normalized();
      n = (n + 0.1 * rng.unit_vector()).normalized();
      Vec3 p = corner + 0.01 * rng.unit_vector();
      problem.constraints.push_back({p, n, 1.0});
      problem.mass_point += p / 8.0;
    }
    ExtractionConfig config = config_for(8, QefMode::LInf);
    config.lambda = 0.0;
    config.irls_iterations = 16;
    config.clamp_to_cell = true;
    Vec3 x = solve_qef(problem, config);

    double oracle = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix < 41; ++ix)
      for (int iy = 0; iy < 41; ++iy)
        for (int iz = 0; iz < 41; ++iz) {
          Vec3 p = problem.cell_bounds.min +
                   Vec3(ix, iy, iz) / 40.0 * h;
          oracle = std::min(oracle, qef_max_residual(problem, p));
        }
    CHECK(qef_max_residual(problem, x) <= oracle + 1e-3 * h);
  }
}

TEST_CASE("l2 objective gradient vanishes at the solution") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    QefProblem problem;
    int m = 4 + int(rng.below(6));
    for (int i = 0; i < m; ++i) {
      Vec3 p(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
      problem.constraints.push_back({p, rng.unit_vector(), 1.0});
      problem.mass_point += p / double(m);
    }
    ExtractionConfig config = config_for(8, QefMode::L2);
    config.lambda = 1e-3;
    config.clamp_to_cell = false;
    Vec3 x = solve_qef(problem, config);
    const double lambda_eff = config.lambda * m;
    auto objective = [&](const Vec3& v) {
      double sum = lambda_eff * (v - problem.mass_point).squaredNorm();
      for (const auto& c : problem.constraints) {
        double r = c.normal.dot(v - c.point);
        sum += r * r;
      }
      return sum;
    };
    Vec3 gradient;
    const double eps = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 dp = Vec3::Zero(), dm = Vec3::Zero();
      dp[k] = eps;
      dm[k] = -eps;
      gradient[k] = (objective(x + dp) - objective(x + dm)) / (2 * eps);
    }
    CHECK(gradient.norm() <= 1e-6);
  }
}

// The max residual of the accepted IRLS iterates never increases.
TEST_CASE("linf iteration trace is monotone in max residual") {
  Rng rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    QefProblem problem;
    int m = 5 + int(rng.below(5));
    for (int i = 0; i < m; ++i) {
      Vec3 p(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
      problem.constraints.push_back({p, rng.unit_vector(), 1.0});
      problem.mass_point += p / double(m);
    }
    ExtractionConfig config = config_for(8, QefMode::LInf);
    config.lambda = 1e-4;
    config.clamp_to_cell = false;
    QefDiagnostics diag;
    Vec3 x = solve_qef(problem, config, &diag);
    REQUIRE(diag.linf_residual_trace.size() >= 1);
    for (std::size_t k = 1; k < diag.linf_residual_trace.size(); ++k)
      CHECK(diag.linf_residual_trace[k] <=
            diag.linf_residual_trace[k - 1] + 1e-9);
    // The returned vertex realizes the best recorded objective.
    double final_residual = qef_max_residual(problem, x);
    CHECK(final_residual <=
          diag.linf_residual_trace.front() + 1e-12);
  }
}

TEST_CASE("all-positive grid extracts an empty mesh") {
  SparseSdfGrid grid;
  grid.resolution = 8;
  grid.tau = 0.5;
  SparseSdfGrid::Cell cell;
  cell.coord = Vec3i(2, 2, 2);
  cell.corners = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  grid.cells.push_back(cell);
  grid.build_index();
  TriangleMesh mesh = extract_dual_mesh(grid, {}, config_for(8));
  CHECK(mesh.empty());
}

TEST_CASE("sphere extraction is watertight with small Hausdorff error") {
  const int n = 64;
  const double r = 0.4;
  SparseSdfGrid grid = sphere_grid(n, r);
  auto hermite = collect_hermite(grid, fixtures::sphere_field(r));
  TriangleMesh mesh = extract_dual_mesh(grid, hermite, config_for(n));
  ValidationReport report = validate(mesh);
  CHECK(report.watertight);
  CHECK(report.manifold);
  CHECK(euler_characteristic(mesh) == 2);
  CHECK(sphere_hausdorff(mesh, r) <= 2.0 / n);
}

TEST_CASE("sphere extraction error halves when resolution doubles") {
  double coarse = 0.0, fine = 0.0;
  for (int n : {32, 64}) {
    SparseSdfGrid grid = sphere_grid(n, 0.4);
    auto hermite = collect_hermite(grid, fixtures::sphere_field(0.4));
    TriangleMesh mesh = extract_dual_mesh(grid, hermite, config_for(n));
    (n == 32 ? coarse : fine) = sphere_hausdorff(mesh, 0.4);
  }
  CHECK(coarse / fine >= 2.0 / 1.5);  // halving within a factor of 1.5
}

TEST_CASE("cube remesh places linf vertices at the true corners") {
  TriangleMesh cube = fixtures::cube(Vec3::Zero(), 0.4);
  const int n = 128;
  ExtractionConfig config = config_for(n, QefMode::LInf);
  TriangleMesh mesh = remesh_watertight(cube, config);
  ValidationReport report = validate(mesh);
  CHECK(report.watertight);
  const double h = 1.0 / n;
  for (int i = 0; i < 8; ++i) {
    Vec3 corner(i & 1 ? 0.4 : -0.4, i & 2 ? 0.4 : -0.4, i & 4 ? 0.4 : -0.4);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : mesh.vertices) best = std::min(best, (v - corner).norm());
    CHECK(best <= 1.5 * h);
  }
}

TEST_CASE("band-incomplete grid raises an error naming cells") {
  SparseSdfGrid grid = sphere_grid(32, 0.35);
  // Drop one sign-change cell to break a quad ring.
  for (std::size_t i = 0; i < grid.cells.size(); ++i)
    if (grid.cell_has_sign_change(grid.cells[i])) {
      grid.cells.erase(grid.cells.begin() + std::ptrdiff_t(i));
      break;
    }
  grid.build_index();
  auto hermite = collect_hermite(grid, fixtures::sphere_field(0.35));
  CHECK_THROWS_AS(extract_dual_mesh(grid, hermite, config_for(32)),
                  BandIncompleteError);
  try {
    extract_dual_mesh(grid, hermite, config_for(32));
  } catch (const BandIncompleteError& e) {
    CHECK(!e.missing_cells.empty());
  }
}

TEST_CASE("open cube remesh closes the hole with matching volume") {
  TriangleMesh open = fixtures::open_cube(Vec3::Zero(), 0.4);
  const int n = 64;
  TriangleMesh mesh = remesh_watertight(open, config_for(n));
  ValidationReport report = validate(mesh);
  CHECK(report.watertight);
  CHECK(report.manifold);
  const double reference = 0.8 * 0.8 * 0.8;
  CHECK(std::abs(mesh.signed_volume()) > 0.9 * reference);
  CHECK(std::abs(mesh.signed_volume()) < 1.1 * reference);
}

TEST_CASE("watertight sphere remesh stays within 2h of the input") {
  TriangleMesh sphere = fixtures::icosphere(4, 0.4);
  const int n = 64;
  TriangleMesh mesh = remesh_watertight(sphere, config_for(n));
  CHECK(validate(mesh).watertight);
  CHECK(fixtures::hausdorff_distance(mesh, sphere) <= 2.0 / n);
}

TEST_CASE("hierarchical extraction equals dense extraction with a good prior") {
  TriangleMesh sphere = fixtures::icosphere(3, 0.4);
  MeshBvh bvh(sphere);
  SdfEvaluator sdf(bvh, sphere);
  const int n = 64;
  const double tau = 3.0 / n;
  ExtractionConfig config = config_for(n);

  SparseSdfGrid dense = sample_sparse_grid(sdf, n, tau);
  auto hermite = collect_hermite(dense, bvh, sphere);
  mark_sharp_samples(hermite, sphere, config.sharp_angle, 0.75 / n);
  TriangleMesh dense_mesh = extract_dual_mesh(dense, hermite, config);

  VoxelPrior prior = dilate(voxelize_surface(sphere, n / 8), 1);
  HierarchicalStats stats;
  TriangleMesh hier_mesh = extract_hierarchical(sdf, prior, n, tau, config, &stats);

  REQUIRE(hier_mesh.vertices.size() == dense_mesh.vertices.size());
  REQUIRE(hier_mesh.faces.size() == dense_mesh.faces.size());
  for (std::size_t i = 0; i < dense_mesh.vertices.size(); ++i)
    CHECK((hier_mesh.vertices[i] - dense_mesh.vertices[i]).norm() <= 1e-12);
  for (std::size_t i = 0; i < dense_mesh.faces.size(); ++i)
    CHECK(hier_mesh.faces[i] == dense_mesh.faces[i]);

  CHECK(stats.fine_cells_evaluated <=
        std::int64_t(prior.occupied_count()) * (n / prior.resolution) *
            (n / prior.resolution) * (n / prior.resolution));
}

TEST_CASE("empty prior yields an empty mesh and a warning flag") {
  TriangleMesh sphere = fixtures::icosphere(2, 0.4);
  MeshBvh bvh(sphere);
  SdfEvaluator sdf(bvh, sphere);
  VoxelPrior prior;
  prior.resolution = 8;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  HierarchicalStats stats;
  TriangleMesh mesh =
      extract_hierarchical(sdf, prior, 64, 3.0 / 64, config_for(64), &stats);
  CHECK(mesh.empty());
  CHECK(stats.empty_prior);
}

TEST_CASE("under-covered prior is detected as a band break") {
  TriangleMesh sphere = fixtures::icosphere(3, 0.4);
  MeshBvh bvh(sphere);
  SdfEvaluator sdf(bvh, sphere);
  const int n = 64;
  VoxelPrior prior = dilate(voxelize_surface(sphere, n / 8), 1);
  // Cripple the prior: clear every occupied block in the +x half.
  VoxelPrior bad = prior;
  for (int z = 0; z < bad.resolution; ++z)
    for (int y = 0; y < bad.resolution; ++y)
      for (int x = bad.resolution / 2; x < bad.resolution; ++x) {
        std::size_t i = std::size_t(x) +
                        std::size_t(bad.resolution) *
                            (std::size_t(y) +
                             std::size_t(bad.resolution) * std::size_t(z));
        bad.bits[i >> 6] &= ~(std::uint64_t(1) << (i & 63));
      }
  CHECK_THROWS_AS(
      extract_hierarchical(sdf, bad, n, 3.0 / n, config_for(n)),
      BandIncompleteError);
}

TEST_CASE("rotated cube dihedral error is lower in linf mode than l2") {
  TriangleMesh cube = fixtures::rotated_cube(0.24);
  const int n = 96;
  double linf_error = fixtures::cube_sharp_dihedral_error(
      remesh_watertight(cube, config_for(n, QefMode::LInf)), cube, 1.0 / n);
  double l2_error = fixtures::cube_sharp_dihedral_error(
      remesh_watertight(cube, config_for(n, QefMode::L2)), cube, 1.0 / n);
  CHECK(linf_error < l2_error);
}

}  // TEST_SUITE
