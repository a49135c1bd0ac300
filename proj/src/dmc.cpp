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

#include "meshpipe/dmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace meshpipe {

namespace {

// Edges of a cell as (corner, corner, axis); corner bit c maps to offset
// (c&1, c>>1&1, c>>2&1).
constexpr int kCellEdges[12][3] = {
    {0, 1, 0}, {2, 3, 0}, {4, 5, 0}, {6, 7, 0},
    {0, 2, 1}, {1, 3, 1}, {4, 6, 1}, {5, 7, 1},
    {0, 4, 2}, {1, 5, 2}, {2, 6, 2}, {3, 7, 2},
};

inline Vec3i corner_offset(int c) { return Vec3i(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

inline std::uint64_t edge_key(const Vec3i& origin, int axis) {
  return (cell_key(origin) << 2) | std::uint64_t(axis);
}

inline bool negative(double v) { return v < 0.0; }

}  // namespace

double qef_max_residual(const QefProblem& problem, const Vec3& x) {
  double worst = 0.0;
  for (const auto& c : problem.constraints)
    worst = std::max(worst, std::abs(c.normal.dot(x - c.point)));
  return worst;
}

namespace {

// Weighted regularized normal equations: (sum u n n^T + lam I) x =
// sum u n (n.p) + lam m. Returns false when the lam = 0 system is rank
// deficient.
bool solve_normal_equations(const QefProblem& problem,
                            const std::vector<double>& weights, double lambda,
                            Vec3& out) {
  Mat3 A = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& c = problem.constraints[i];
    double u = weights[i];
    A += u * (c.normal * c.normal.transpose());
    b += u * c.normal * c.normal.dot(c.point);
  }
  A += lambda * Mat3::Identity();
  b += lambda * problem.mass_point;
  Eigen::SelfAdjointEigenSolver<Mat3> eigen(A);
  const Vec3 ev = eigen.eigenvalues();
  double max_ev = ev.cwiseAbs().maxCoeff();
  if (!(max_ev > 0.0) || ev.minCoeff() <= 1e-10 * max_ev) return false;
  out = eigen.eigenvectors() *
        (eigen.eigenvectors().transpose() * b).cwiseQuotient(ev);
  return out.allFinite();
}

}  // namespace

Vec3 solve_qef(const QefProblem& problem, const ExtractionConfig& config,
               QefDiagnostics* diagnostics) {
  if (problem.constraints.empty())
    throw StageError("QEF problem has no constraints");
  const std::size_t m = problem.constraints.size();
  const double lambda = config.lambda * double(m);

  std::vector<double> weights(m);
  for (std::size_t i = 0; i < m; ++i) weights[i] = problem.constraints[i].weight;

  Vec3 x;
  if (!solve_normal_equations(problem, weights, lambda, x)) {
    if (diagnostics) ++diagnostics->singular_fallbacks;
    x = problem.mass_point;
  }

  if (config.qef_mode == QefMode::LInf && config.irls_iterations > 1) {
    // Weighted minimax: minimize max_i w_i |r_i(x)|.
    auto weighted_max = [&](const Vec3& v) {
      double worst = 0.0;
      for (const auto& c : problem.constraints)
        worst = std::max(worst, c.weight * std::abs(c.normal.dot(v - c.point)));
      return worst;
    };
    Vec3 best = x;
    double best_residual = weighted_max(x);
    if (diagnostics) diagnostics->linf_residual_trace.push_back(best_residual);
    Vec3 prev = x;
    for (int k = 1; k < config.irls_iterations; ++k) {
      double p = 2.0 + 6.0 * double(k) / double(config.irls_iterations - 1);
      double scale = weighted_max(prev);
      if (scale <= 0.0) break;  // already interpolating every plane
      const double softening = 1e-2 * scale;
      std::vector<double> irls(m);
      double top = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& c = problem.constraints[i];
        double rho = c.weight * std::abs(c.normal.dot(prev - c.point));
        irls[i] = c.weight * c.weight *
                  std::pow(rho * rho + softening * softening, 0.5 * (p - 2.0));
        top = std::max(top, irls[i]);
      }
      if (top <= 0.0) break;
      // Normalize to max 1 with a floor: satisfied constraints keep a little
      // weight so the system stays full rank instead of draining into the
      // mass-point regularizer.
      for (auto& u : irls) u = std::max(u / top, 0.05);
      Vec3 next;
      if (!solve_normal_equations(problem, irls, lambda, next)) {
        if (diagnostics) ++diagnostics->singular_fallbacks;
        break;
      }
      // Damped acceptance keeps the objective non-increasing.
      double residual = weighted_max(next);
      int halvings = 0;
      while (residual > best_residual + 1e-12 && halvings < 3) {
        next = 0.5 * (next + prev);
        residual = weighted_max(next);
        ++halvings;
      }
      if (residual > best_residual + 1e-12) break;
      prev = next;
      if (diagnostics) diagnostics->linf_residual_trace.push_back(residual);
      if (residual < best_residual) {
        best_residual = residual;
        best = next;
      }
    }
    x = best;
  }

  if (config.clamp_to_cell && !problem.cell_bounds.empty()) {
    Vec3 clamped = x.cwiseMax(problem.cell_bounds.min).cwiseMin(problem.cell_bounds.max);
    if (diagnostics && clamped != x) ++diagnostics->clamped;
    x = clamped;
  }
  return x;
}

namespace {

struct NormalSample {
  Vec3 normal;
  double position_error;
};

std::vector<HermiteSample> collect_hermite_impl(
    const SparseSdfGrid& grid,
    const std::function<NormalSample(const Vec3&, const Vec3&, double)>& normal_fn) {
  // normal_fn(crossing, oriented_axis_direction, h) -> unit normal + error.
  std::vector<HermiteSample> samples;
  std::unordered_map<std::uint64_t, int> seen;
  const double h = grid.cell_size();
  for (const auto& cell : grid.cells) {
    for (const auto& e : kCellEdges) {
      double d0 = cell.corners[std::size_t(e[0])];
      double d1 = cell.corners[std::size_t(e[1])];
      if (negative(d0) == negative(d1)) continue;
      Vec3i origin = cell.coord + corner_offset(e[0]);
      if (!seen.emplace(edge_key(origin, e[2]), int(samples.size())).second)
        continue;
      HermiteSample s;
      s.edge_origin = origin;
      s.axis = e[2];
      double t = d0 / (d0 - d1);
      Vec3 p0 = grid.lattice_point(origin.x(), origin.y(), origin.z());
      Vec3 axis_dir = Vec3::Zero();
      axis_dir[e[2]] = 1.0;
      s.point = p0 + t * h * axis_dir;
      Vec3 oriented = negative(d0) ? axis_dir : Vec3(-axis_dir);
      NormalSample n = normal_fn(s.point, oriented, h);
      s.normal = n.normal;
      s.position_error = n.position_error;
      samples.push_back(s);
    }
  }
  std::sort(samples.begin(), samples.end(),
            [](const HermiteSample& a, const HermiteSample& b) {
              return edge_key(a.edge_origin, a.axis) < edge_key(b.edge_origin, b.axis);
            });
  return samples;
}

Vec3 orient_along(const Vec3& n, const Vec3& oriented) {
  return n.dot(oriented) < 0.0 ? Vec3(-n) : n;
}

}  // namespace

std::vector<HermiteSample> collect_hermite(const SparseSdfGrid& grid,
                                           const SdfField& field) {
  return collect_hermite_impl(grid, [&](const Vec3& x, const Vec3& oriented,
                                        double h) -> NormalSample {
    SignedDistanceResult r = field(x);
    Vec3 dir = x - r.nearest_point;
    double len = dir.norm();
    if (len < 1e-7 * h) return {oriented, 0.0};  // crossing sits on the surface
    return {orient_along(dir / len, oriented), len};
  });
}

std::vector<HermiteSample> collect_hermite(const SparseSdfGrid& grid,
                                           const MeshBvh& bvh,
                                           const TriangleMesh& mesh) {
  // cos(25 degrees): beyond this the nearest point sits on a crease or
  // corner and the offset direction is a cone direction, not a surface
  // normal; the nearest triangle's plane is the reliable constraint there.
  constexpr double kConeCos = 0.906;
  return collect_hermite_impl(grid, [&](const Vec3& x, const Vec3& oriented,
                                        double h) -> NormalSample {
    ClosestHit hit = bvh.closest_point(mesh, x);
    Vec3 tri_normal = mesh.face_normal(std::size_t(hit.triangle));
    Vec3 dir = x - hit.point;
    double len = dir.norm();
    if (len < 1e-7 * h)
      return {tri_normal.squaredNorm() > 0.0 ? orient_along(tri_normal, oriented)
                                             : oriented,
              0.0};
    dir /= len;
    if (tri_normal.squaredNorm() > 0.0 && std::abs(dir.dot(tri_normal)) < kConeCos)
      return {orient_along(tri_normal, oriented), len};
    return {orient_along(dir, oriented), len};
  });
}

void mark_sharp_samples(std::vector<HermiteSample>& samples,
                        const TriangleMesh& source_mesh, double sharp_angle,
                        double max_distance) {
  EdgeSet sharp = detect_sharp_edges(source_mesh, sharp_angle);
  if (sharp.edges.empty() || samples.empty()) return;

  // Bucket sharp segments on a coarse uniform grid so marking stays linear.
  const int grid_res = 32;
  const double cell = 1.0;  // domain [-0.5, 0.5] divided below
  (void)cell;
  auto bucket_of = [&](const Vec3& p) {
    Vec3i b;
    for (int a = 0; a < 3; ++a)
      b[a] = std::clamp(int(std::floor((p[a] + 0.5) * grid_res)), 0, grid_res - 1);
    return b;
  };
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;
  for (std::size_t s = 0; s < sharp.edges.size(); ++s) {
    const Edge& e = sharp.edges[s];
    Aabb box;
    box.expand(source_mesh.vertices[e.v0]);
    box.expand(source_mesh.vertices[e.v1]);
    box.min -= Vec3::Constant(max_distance);
    box.max += Vec3::Constant(max_distance);
    Vec3i lo = bucket_of(box.min), hi = bucket_of(box.max);
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x)
          buckets[cell_key(Vec3i(x, y, z))].push_back(int(s));
  }
  auto segment_distance = [&](const Vec3& p, const Edge& e) {
    const Vec3& a = source_mesh.vertices[e.v0];
    const Vec3& b = source_mesh.vertices[e.v1];
    Vec3 ab = b - a;
    double t = ab.squaredNorm() > 0.0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
  };
  for (auto& sample : samples) {
    auto it = buckets.find(cell_key(bucket_of(sample.point)));
    if (it == buckets.end()) continue;
    for (int s : it->second)
      if (segment_distance(sample.point, sharp.edges[std::size_t(s)]) <= max_distance) {
        sample.on_sharp_edge = true;
        break;
      }
  }
}

BandIncompleteError::BandIncompleteError(std::vector<Vec3i> cells)
    : StageError([&cells] {
        std::ostringstream os;
        os << "sign-change edge with missing neighbor cell(s):";
        for (std::size_t i = 0; i < cells.size() && i < 16; ++i)
          os << " (" << cells[i].x() << ',' << cells[i].y() << ',' << cells[i].z()
             << ')';
        if (cells.size() > 16) os << " ... " << cells.size() << " total";
        return os.str();
      }()),
      missing_cells(std::move(cells)) {}

TriangleMesh extract_dual_mesh(const SparseSdfGrid& grid,
                               const std::vector<HermiteSample>& hermite,
                               const ExtractionConfig& config,
                               ExtractStats* stats) {
  TriangleMesh out;
  if (grid.cells.empty()) return out;

  // One vertex per sign-change cell, in sorted cell order.
  std::vector<int> vertex_of(grid.cells.size(), -1);
  std::unordered_map<std::uint64_t, const HermiteSample*> sample_at;
  sample_at.reserve(hermite.size());
  for (const auto& s : hermite) sample_at[edge_key(s.edge_origin, s.axis)] = &s;

  const double h = grid.cell_size();
  QefDiagnostics qef_diag;
  std::vector<QefProblem> problems;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& cell = grid.cells[i];
    if (!grid.cell_has_sign_change(cell)) continue;
    QefProblem problem;
    for (const auto& e : kCellEdges) {
      double d0 = cell.corners[std::size_t(e[0])];
      double d1 = cell.corners[std::size_t(e[1])];
      if (negative(d0) == negative(d1)) continue;
      Vec3i origin = cell.coord + corner_offset(e[0]);
      auto it = sample_at.find(edge_key(origin, e[2]));
      if (it == sample_at.end())
        throw StageError("hermite data missing for a sign-change edge");
      const HermiteSample& s = *it->second;
      // Cross-sheet interpolation near creases leaves the crossing visibly
      // off the surface; such constraints carry less weight.
      double err_scale = 0.05 * h;
      double quality = 1.0 / (1.0 + std::pow(s.position_error / err_scale, 2.0));
      double weight = (s.on_sharp_edge ? config.sharp_weight : 1.0) * quality;
      problem.constraints.push_back({s.point, s.normal, weight});
    }
    for (const auto& c : problem.constraints) problem.mass_point += c.point;
    problem.mass_point /= double(problem.constraints.size());
    Vec3 lo = grid.lattice_point(cell.coord.x(), cell.coord.y(), cell.coord.z());
    problem.cell_bounds.expand(lo);
    problem.cell_bounds.expand(lo + Vec3::Constant(h));
    vertex_of[i] = int(problems.size());
    problems.push_back(std::move(problem));
  }
  if (stats) stats->sign_change_cells = std::int64_t(problems.size());

  out.vertices.resize(problems.size());
  std::vector<QefDiagnostics> diags(problems.size());
  parallel_for(std::int64_t(problems.size()), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      out.vertices[std::size_t(i)] =
          solve_qef(problems[std::size_t(i)], config, &diags[std::size_t(i)]);
  }, 128);
  for (const auto& d : diags) {
    qef_diag.singular_fallbacks += d.singular_fallbacks;
    qef_diag.clamped += d.clamped;
  }
  if (stats) stats->qef = qef_diag;

  // One quad per sign-change lattice edge, stitched over the four cells
  // around the edge; cyclic order keeps normals on the negative->positive
  // side.
  std::vector<Vec3i> missing;
  for (const auto& s : hermite) {
    const int a = s.axis, b = (a + 1) % 3, c = (a + 2) % 3;
    Vec3i base = s.edge_origin;
    std::array<Vec3i, 4> ring;
    ring[0] = base;
    ring[1] = base; ring[1][b] -= 1;
    ring[2] = base; ring[2][b] -= 1; ring[2][c] -= 1;
    ring[3] = base; ring[3][c] -= 1;
    std::array<int, 4> verts{};
    bool complete = true;
    for (int k = 0; k < 4; ++k) {
      int cell_index = grid.find(ring[std::size_t(k)]);
      int v = cell_index >= 0 ? vertex_of[std::size_t(cell_index)] : -1;
      if (v < 0) {
        missing.push_back(ring[std::size_t(k)]);
        complete = false;
      } else {
        verts[std::size_t(k)] = v;
      }
    }
    if (!complete) continue;

    // Sign at the edge origin decides the facing: negative origin means the
    // SDF increases along +axis, so the CCW-from-+axis ring faces +axis.
    int cell_index = grid.find(s.edge_origin);
    bool flip = !negative(grid.cells[std::size_t(cell_index)].corners[0]);
    std::array<int, 4> q = verts;
    if (flip) std::swap(q[1], q[3]);

    double diag02 = (out.vertices[std::size_t(q[0])] - out.vertices[std::size_t(q[2])])
                        .squaredNorm();
    double diag13 = (out.vertices[std::size_t(q[1])] - out.vertices[std::size_t(q[3])])
                        .squaredNorm();
    if (diag02 <= diag13) {
      out.faces.emplace_back(q[0], q[1], q[2]);
      out.faces.emplace_back(q[0], q[2], q[3]);
    } else {
      out.faces.emplace_back(q[1], q[2], q[3]);
      out.faces.emplace_back(q[1], q[3], q[0]);
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end(), [](const Vec3i& x, const Vec3i& y) {
      return cell_key(x) < cell_key(y);
    });
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    throw BandIncompleteError(std::move(missing));
  }
  return out;
}

TriangleMesh remesh_watertight(const TriangleMesh& mesh, const ExtractionConfig& config,
                               double tau, ExtractStats* stats,
                               SampleStats* sample_stats) {
  MeshBvh bvh(mesh);
  SdfEvaluator sdf(bvh, mesh);
  if (tau <= 0.0) tau = 3.0 / config.resolution;
  SparseSdfGrid grid = sample_sparse_grid(sdf, config.resolution, tau, sample_stats);
  std::vector<HermiteSample> hermite = collect_hermite(grid, bvh, mesh);
  if (config.sharp_weight > 1.0)
    mark_sharp_samples(hermite, mesh, config.sharp_angle,
                       0.75 * grid.cell_size());
  return extract_dual_mesh(grid, hermite, config, stats);
}

TriangleMesh extract_hierarchical(const SdfEvaluator& sdf, const VoxelPrior& prior,
                                  int fine_resolution, double tau,
                                  const ExtractionConfig& config,
                                  HierarchicalStats* stats,
                                  SparseSdfGrid* out_grid) {
  if (fine_resolution % prior.resolution != 0)
    throw ValidationError("prior resolution must divide fine resolution");
  if (fine_resolution % 2 != 0)
    throw ValidationError("fine resolution must be even");
  if (fine_resolution < 8) throw ValidationError("grid resolution must be >= 8");
  if (tau < 2.0 / fine_resolution)
    throw ValidationError("band half-width tau must be >= 2 * cell_size");

  const int ratio = fine_resolution / prior.resolution;
  const double h = 1.0 / fine_resolution;
  HierarchicalStats local;
  HierarchicalStats& st = stats ? *stats : local;

  std::vector<Vec3i> coarse = prior.occupied_cells();
  st.coarse_occupied = std::int64_t(coarse.size());
  st.empty_prior = coarse.empty();

  // Mid blocks of 2^3 fine cells inside occupied coarse blocks. A fine cell
  // can contain a sign change only if the surface passes within sqrt(3)/2 h
  // of its center, which puts it within sqrt(3) h of the mid-block center;
  // pruning at that bound provably keeps every sign-change cell (never
  // looser than the 2*tau band filter).
  const double tau_mid = std::min(2.0 * tau, std::sqrt(3.0) * h * (1.0 + 1e-9));
  std::vector<Vec3i> fine_cells;
  if (ratio == 1) {
    // Prior is already at the fine scale; no mid filter applies.
    fine_cells = coarse;
  } else {
    const int mid_per_coarse = ratio / 2;
    std::vector<Vec3i> mid_blocks;
    for (const auto& cc : coarse)
      for (int z = 0; z < mid_per_coarse; ++z)
        for (int y = 0; y < mid_per_coarse; ++y)
          for (int x = 0; x < mid_per_coarse; ++x)
            mid_blocks.emplace_back(cc.x() * mid_per_coarse + x,
                                    cc.y() * mid_per_coarse + y,
                                    cc.z() * mid_per_coarse + z);
    std::sort(mid_blocks.begin(), mid_blocks.end(),
              [](const Vec3i& a, const Vec3i& b) {
                return cell_key(a) < cell_key(b);
              });

    std::vector<char> mid_pass(mid_blocks.size(), 0);
    const double mid_size = 2.0 * h;
    parallel_for(std::int64_t(mid_blocks.size()),
                 [&](std::int64_t begin, std::int64_t end) {
                   for (std::int64_t i = begin; i < end; ++i) {
                     const Vec3i& m = mid_blocks[std::size_t(i)];
                     Vec3 center((m.x() + 0.5) * mid_size - 0.5,
                                 (m.y() + 0.5) * mid_size - 0.5,
                                 (m.z() + 0.5) * mid_size - 0.5);
                     mid_pass[std::size_t(i)] =
                         sdf.unsigned_distance(center) <= tau_mid;
                   }
                 }, 64);
    st.mid_evaluations = std::int64_t(mid_blocks.size());

    // Corner-sample every fine cell of the surviving mid blocks.
    for (std::size_t i = 0; i < mid_blocks.size(); ++i) {
      if (!mid_pass[i]) continue;
      const Vec3i& m = mid_blocks[i];
      for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y)
          for (int x = 0; x < 2; ++x)
            fine_cells.emplace_back(m.x() * 2 + x, m.y() * 2 + y, m.z() * 2 + z);
    }
  }
  std::sort(fine_cells.begin(), fine_cells.end(), [](const Vec3i& a, const Vec3i& b) {
    return cell_key(a) < cell_key(b);
  });
  fine_cells.erase(std::unique(fine_cells.begin(), fine_cells.end()), fine_cells.end());
  st.fine_cells_evaluated = std::int64_t(fine_cells.size());

  std::unordered_map<std::uint64_t, int> point_index;
  std::vector<Vec3i> points;
  std::vector<std::array<int, 8>> cell_corner_ids(fine_cells.size());
  for (std::size_t i = 0; i < fine_cells.size(); ++i)
    for (int c = 0; c < 8; ++c) {
      Vec3i corner = fine_cells[i] + corner_offset(c);
      auto [it, inserted] = point_index.emplace(cell_key(corner), int(points.size()));
      if (inserted) points.push_back(corner);
      cell_corner_ids[i][std::size_t(c)] = it->second;
    }
  st.fine_point_evaluations = std::int64_t(points.size());

  std::vector<double> values = signed_lattice_values(sdf, points, fine_resolution);

  SparseSdfGrid grid;
  grid.resolution = fine_resolution;
  grid.tau = tau;
  for (std::size_t i = 0; i < fine_cells.size(); ++i) {
    SparseSdfGrid::Cell cell;
    cell.coord = fine_cells[i];
    double min_abs = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 8; ++c) {
      cell.corners[std::size_t(c)] = values[std::size_t(cell_corner_ids[i][std::size_t(c)])];
      min_abs = std::min(min_abs, std::abs(cell.corners[std::size_t(c)]));
    }
    if (min_abs <= tau) grid.cells.push_back(cell);
  }
  grid.build_index();
  if (out_grid) *out_grid = grid;

  std::vector<HermiteSample> hermite = collect_hermite(grid, sdf.bvh(), sdf.mesh());
  if (config.sharp_weight > 1.0)
    mark_sharp_samples(hermite, sdf.mesh(), config.sharp_angle, 0.75 * h);
  return extract_dual_mesh(grid, hermite, config, nullptr);
}

}  // namespace meshpipe
