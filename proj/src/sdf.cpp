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

#include "meshpipe/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace meshpipe {

namespace {

// Signed solid angle of triangle (v0, v1, v2) seen from p; positive when the
// face normal points away from p (Van Oosterom & Strackee).
inline double solid_angle(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                          const Vec3& p) {
  const Vec3 a = v0 - p, b = v1 - p, c = v2 - p;
  const double la = a.norm(), lb = b.norm(), lc = c.norm();
  const double numerator = a.dot(b.cross(c));
  const double denominator =
      la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
  return 2.0 * std::atan2(numerator, denominator);
}

constexpr double kFourPi = 4.0 * M_PI;

}  // namespace

SdfEvaluator::SdfEvaluator(const MeshBvh& bvh, const TriangleMesh& mesh,
                           int exact_max_triangles, double far_field_beta)
    : bvh_(&bvh), mesh_(&mesh), beta_(far_field_beta) {
  if (int(mesh.faces.size()) <= exact_max_triangles) return;
  // Bottom-up area-weighted moments per BVH node for the dipole far field.
  // Children sit at higher indices than their parent, so a reverse sweep
  // finalizes them first.
  const auto& nodes = bvh.nodes();
  moments_.resize(nodes.size());
  std::vector<double> areas(nodes.size(), 0.0);
  for (int n = int(nodes.size()) - 1; n >= 0; --n) {
    const auto& node = nodes[std::size_t(n)];
    NodeMoment& m = moments_[std::size_t(n)];
    if (node.leaf()) {
      double area = 0.0;
      Vec3 weighted = Vec3::Zero();
      for (int i = node.begin; i < node.end; ++i) {
        int t = bvh.order()[std::size_t(i)];
        const Vec3i& f = mesh.faces[std::size_t(t)];
        Vec3 an = 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                            .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
        double a = an.norm();
        m.area_normal += an;
        weighted += a * mesh.face_centroid(std::size_t(t));
        area += a;
      }
      areas[std::size_t(n)] = area;
      m.centroid = area > 0.0 ? Vec3(weighted / area) : node.box.center();
      for (int i = node.begin; i < node.end; ++i) {
        const Vec3i& f = mesh.faces[std::size_t(bvh.order()[std::size_t(i)])];
        for (int k = 0; k < 3; ++k)
          m.radius = std::max(m.radius, (mesh.vertices[f[k]] - m.centroid).norm());
      }
    } else {
      double la = areas[std::size_t(node.left)], ra = areas[std::size_t(node.right)];
      const NodeMoment& l = moments_[std::size_t(node.left)];
      const NodeMoment& r = moments_[std::size_t(node.right)];
      areas[std::size_t(n)] = la + ra;
      m.area_normal = l.area_normal + r.area_normal;
      m.centroid = la + ra > 0.0
                       ? Vec3((la * l.centroid + ra * r.centroid) / (la + ra))
                       : node.box.center();
      m.radius = std::max((l.centroid - m.centroid).norm() + l.radius,
                          (r.centroid - m.centroid).norm() + r.radius);
    }
  }
}

double SdfEvaluator::winding_number_exact(const Vec3& p) const {
  double sum = 0.0;
  for (const auto& f : mesh_->faces)
    sum += solid_angle(mesh_->vertices[f[0]], mesh_->vertices[f[1]],
                       mesh_->vertices[f[2]], p);
  return sum / kFourPi;
}

double SdfEvaluator::winding_clustered(const Vec3& p, int node_index) const {
  const auto& node = bvh_->nodes()[std::size_t(node_index)];
  const NodeMoment& m = moments_[std::size_t(node_index)];
  const Vec3 d = m.centroid - p;
  const double dist = d.norm();
  if (dist > beta_ * m.radius && dist > 0.0) {
    // Dipole far field: sum of per-face solid angles collapses to the
    // area-weighted normal against the cluster direction.
    return m.area_normal.dot(d) / (dist * dist * dist);
  }
  if (node.leaf()) {
    double sum = 0.0;
    for (int i = node.begin; i < node.end; ++i) {
      const Vec3i& f = mesh_->faces[std::size_t(bvh_->order()[std::size_t(i)])];
      sum += solid_angle(mesh_->vertices[f[0]], mesh_->vertices[f[1]],
                         mesh_->vertices[f[2]], p);
    }
    return sum;
  }
  return winding_clustered(p, node.left) + winding_clustered(p, node.right);
}

double SdfEvaluator::winding_number(const Vec3& p) const {
  if (moments_.empty()) return winding_number_exact(p);
  return winding_clustered(p, 0) / kFourPi;
}

double SdfEvaluator::unsigned_distance(const Vec3& p, Vec3* nearest) const {
  ClosestHit hit = bvh_->closest_point(*mesh_, p);
  if (nearest) *nearest = hit.point;
  return std::sqrt(hit.squared_distance);
}

SignedDistanceResult SdfEvaluator::evaluate(const Vec3& p) const {
  SignedDistanceResult r;
  r.distance = unsigned_distance(p, &r.nearest_point);
  r.winding = winding_number(p);
  if (r.winding > 0.5) r.distance = -r.distance;
  r.uncertain = r.winding >= 0.4 && r.winding <= 0.6;
  return r;
}

SignedDistanceResult signed_distance(const MeshBvh& bvh, const TriangleMesh& mesh,
                                     const Vec3& point) {
  return SdfEvaluator(bvh, mesh).evaluate(point);
}

std::vector<SignedDistanceResult> batch_signed_distance(
    const SdfEvaluator& sdf, const std::vector<Vec3>& points,
    BatchGrouping grouping) {
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  if (grouping == BatchGrouping::Morton) {
    std::vector<std::uint64_t> codes(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      codes[i] = morton3_point(points[i]);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return codes[std::size_t(a)] < codes[std::size_t(b)] ||
             (codes[std::size_t(a)] == codes[std::size_t(b)] && a < b);
    });
  }
  std::vector<SignedDistanceResult> results(points.size());
  parallel_for(std::int64_t(points.size()), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      int src = order[std::size_t(i)];
      results[std::size_t(src)] = sdf.evaluate(points[std::size_t(src)]);
    }
  }, 256);
  return results;
}

std::vector<SignedDistanceResult> batch_signed_distance(
    const MeshBvh& bvh, const TriangleMesh& mesh, const std::vector<Vec3>& points,
    BatchGrouping grouping) {
  SdfEvaluator sdf(bvh, mesh);
  return batch_signed_distance(sdf, points, grouping);
}

bool SparseSdfGrid::cell_has_sign_change(const Cell& cell) const {
  bool neg = false, pos = false;
  for (double v : cell.corners) (v < 0.0 ? neg : pos) = true;
  return neg && pos;
}

std::uint64_t cell_key(const Vec3i& c) {
  return (std::uint64_t(std::uint32_t(c.x())) << 42) |
         (std::uint64_t(std::uint32_t(c.y()) & 0x1fffff) << 21) |
         (std::uint64_t(std::uint32_t(c.z()) & 0x1fffff));
}

void SparseSdfGrid::build_index() {
  index_.clear();
  index_.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    index_[cell_key(cells[i].coord)] = int(i);
}

int SparseSdfGrid::find(const Vec3i& coord) const {
  auto it = index_.find(cell_key(coord));
  return it == index_.end() ? -1 : it->second;
}

void SparseSdfGrid::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const char magic[8] = {'M', 'P', 'S', 'G', '0', '0', '0', '1'};
  out.write(magic, 8);
  std::int64_t n = resolution, count = std::int64_t(cells.size());
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&tau), 8);
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (const auto& cell : cells) {
    std::int32_t ijk[3] = {cell.coord.x(), cell.coord.y(), cell.coord.z()};
    out.write(reinterpret_cast<const char*>(ijk), 12);
    out.write(reinterpret_cast<const char*>(cell.corners.data()), 64);
  }
  if (!out) throw Error("write failure on " + path);
}

SparseSdfGrid SparseSdfGrid::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "MPSG0001", 8) != 0)
    throw ValidationError(path + ": bad sparse grid magic");
  SparseSdfGrid grid;
  std::int64_t n = 0, count = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&grid.tau), 8);
  in.read(reinterpret_cast<char*>(&count), 8);
  if (!in || n < 8 || count < 0)
    throw ValidationError(path + ": bad sparse grid header");
  grid.resolution = int(n);
  grid.cells.resize(std::size_t(count));
  for (auto& cell : grid.cells) {
    std::int32_t ijk[3];
    in.read(reinterpret_cast<char*>(ijk), 12);
    in.read(reinterpret_cast<char*>(cell.corners.data()), 64);
    cell.coord = Vec3i(ijk[0], ijk[1], ijk[2]);
    if (!in) throw ValidationError(path + ": truncated sparse grid");
  }
  grid.build_index();
  return grid;
}

namespace {

struct LatticeMap {
  std::unordered_map<std::uint64_t, int> index;
  std::vector<Vec3i> points;

  int intern(const Vec3i& p) {
    auto [it, inserted] = index.emplace(cell_key(p), int(points.size()));
    if (inserted) points.push_back(p);
    return it->second;
  }
};

// True when the surface provably cannot cross the lattice segment between
// two points with unsigned distances u0, u1 at spacing h.
inline bool safe_edge(double u0, double u1, double h) { return u0 > h || u1 > h; }

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[std::size_t(x)] != x)
      x = parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
    return x;
  }
  void unite(int a, int b) { parent[std::size_t(find(a))] = find(b); }
};

bool orientation_allows_propagation(const TriangleMesh& mesh) {
  EdgeSet edges = build_edge_set(mesh);
  if (mesh.faces.empty()) return false;
  for (const auto& e : edges.edges) {
    if (e.incident_faces.size() != 2) return false;
    auto direction = [&](int face) {
      const Vec3i& tri = mesh.faces[std::size_t(face)];
      for (int k = 0; k < 3; ++k)
        if (tri[k] == e.v0 && tri[(k + 1) % 3] == e.v1) return 1;
      return -1;
    };
    if (direction(e.incident_faces[0]) == direction(e.incident_faces[1]))
      return false;
  }
  return true;
}

struct FloodResult {
  std::vector<Vec3i> active;             // sorted
  LatticeMap lattice;                    // corner points of active cells
  std::vector<std::array<int, 8>> cell_corner_ids;
};

FloodResult flood_band(const std::function<double(const Vec3&)>& unsigned_dist,
                       int resolution, double tau, std::vector<Vec3i> seeds,
                       SampleStats* stats) {
  const double h = 1.0 / resolution;
  auto center = [&](const Vec3i& c) {
    return Vec3((c.x() + 0.5) * h - 0.5, (c.y() + 0.5) * h - 0.5,
                (c.z() + 0.5) * h - 0.5);
  };
  std::sort(seeds.begin(), seeds.end(), [](const Vec3i& a, const Vec3i& b) {
    return cell_key(a) < cell_key(b);
  });
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::unordered_set<std::uint64_t> enqueued;
  for (const auto& s : seeds) enqueued.insert(cell_key(s));
  std::vector<Vec3i> wave = std::move(seeds);
  std::vector<Vec3i> active;
  std::vector<double> distances;
  while (!wave.empty()) {
    distances.assign(wave.size(), 0.0);
    parallel_for(std::int64_t(wave.size()), [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i)
        distances[std::size_t(i)] = unsigned_dist(center(wave[std::size_t(i)]));
    }, 64);
    if (stats) stats->center_evaluations += std::int64_t(wave.size());
    std::vector<Vec3i> next;
    for (std::size_t i = 0; i < wave.size(); ++i) {
      if (distances[i] > tau) continue;
      active.push_back(wave[i]);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy && !dz) continue;
            Vec3i nb = wave[i] + Vec3i(dx, dy, dz);
            if ((nb.array() < 0).any() || (nb.array() >= resolution).any()) continue;
            if (enqueued.insert(cell_key(nb)).second) next.push_back(nb);
          }
    }
    std::sort(next.begin(), next.end(), [](const Vec3i& a, const Vec3i& b) {
      return cell_key(a) < cell_key(b);
    });
    wave = std::move(next);
  }
  std::sort(active.begin(), active.end(), [](const Vec3i& a, const Vec3i& b) {
    return cell_key(a) < cell_key(b);
  });

  FloodResult result;
  result.cell_corner_ids.resize(active.size());
  for (std::size_t i = 0; i < active.size(); ++i)
    for (int c = 0; c < 8; ++c) {
      Vec3i corner = active[i] + Vec3i(c & 1, (c >> 1) & 1, (c >> 2) & 1);
      result.cell_corner_ids[i][std::size_t(c)] = result.lattice.intern(corner);
    }
  result.active = std::move(active);
  return result;
}

SparseSdfGrid assemble_grid(const FloodResult& flood, int resolution, double tau,
                            const std::vector<double>& corner_values) {
  SparseSdfGrid grid;
  grid.resolution = resolution;
  grid.tau = tau;
  grid.cells.resize(flood.active.size());
  for (std::size_t i = 0; i < flood.active.size(); ++i) {
    grid.cells[i].coord = flood.active[i];
    for (int c = 0; c < 8; ++c)
      grid.cells[i].corners[std::size_t(c)] =
          corner_values[std::size_t(flood.cell_corner_ids[i][std::size_t(c)])];
  }
  grid.build_index();
  return grid;
}

void check_grid_args(int resolution, double tau) {
  if (resolution < 8) throw ValidationError("grid resolution must be >= 8");
  if (tau < 2.0 / resolution)
    throw ValidationError("band half-width tau must be >= 2 * cell_size");
}

}  // namespace

std::vector<Vec3i> triangle_seed_cells(const TriangleMesh& mesh, int resolution) {
  std::vector<Vec3i> seeds;
  const double h = 1.0 / resolution;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    Aabb box;
    for (int k = 0; k < 3; ++k) box.expand(mesh.vertices[mesh.faces[f][k]]);
    Vec3i lo, hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::clamp(int(std::floor((box.min[a] + 0.5) / h)), 0, resolution - 1);
      hi[a] = std::clamp(int(std::floor((box.max[a] + 0.5) / h)), 0, resolution - 1);
    }
    for (int i = lo.x(); i <= hi.x(); ++i)
      for (int j = lo.y(); j <= hi.y(); ++j)
        for (int k = lo.z(); k <= hi.z(); ++k) seeds.emplace_back(i, j, k);
  }
  std::sort(seeds.begin(), seeds.end(), [](const Vec3i& a, const Vec3i& b) {
    return cell_key(a) < cell_key(b);
  });
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

namespace {

// Band discovery over a signed field. A cell is active when its center is
// within tau of the surface, or when its corner signs disagree: the second
// clause never fires for fields whose sign flips only at distance zero
// (watertight meshes, true SDFs) but keeps the sign membrane across holes of
// open input, which is what lets remeshing close them.
SparseSdfGrid flood_band_signed(const std::function<double(const Vec3&)>& value_at,
                                const std::function<double(const Vec3&)>& center_unsigned,
                                int resolution, double tau,
                                std::vector<Vec3i> seeds, SampleStats* stats) {
  const double h = 1.0 / resolution;
  auto lattice = [&](const Vec3i& p) {
    return Vec3(p.x() * h - 0.5, p.y() * h - 0.5, p.z() * h - 0.5);
  };
  auto center = [&](const Vec3i& c) {
    return Vec3((c.x() + 0.5) * h - 0.5, (c.y() + 0.5) * h - 0.5,
                (c.z() + 0.5) * h - 0.5);
  };
  std::unordered_map<std::uint64_t, double> point_value;
  auto corner_value = [&](const Vec3i& p) {
    auto [it, inserted] = point_value.emplace(cell_key(p), 0.0);
    if (inserted) {
      it->second = value_at(lattice(p));
      if (stats) ++stats->corner_evaluations;
    }
    return it->second;
  };
  auto cell_sign_change = [&](const Vec3i& c) {
    bool neg = false, pos = false;
    for (int k = 0; k < 8; ++k) {
      double v = corner_value(c + Vec3i(k & 1, (k >> 1) & 1, (k >> 2) & 1));
      (v < 0.0 ? neg : pos) = true;
    }
    return neg && pos;
  };

  std::sort(seeds.begin(), seeds.end(), [](const Vec3i& a, const Vec3i& b) {
    return cell_key(a) < cell_key(b);
  });
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  std::unordered_set<std::uint64_t> enqueued;
  for (const auto& s : seeds) enqueued.insert(cell_key(s));
  std::vector<Vec3i> wave = std::move(seeds);
  std::vector<Vec3i> active;
  std::vector<double> distances;
  while (!wave.empty()) {
    distances.assign(wave.size(), 0.0);
    parallel_for(std::int64_t(wave.size()), [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i)
        distances[std::size_t(i)] = center_unsigned(center(wave[std::size_t(i)]));
    }, 64);
    if (stats) stats->center_evaluations += std::int64_t(wave.size());
    std::vector<Vec3i> next;
    for (std::size_t i = 0; i < wave.size(); ++i) {
      if (distances[i] > tau && !cell_sign_change(wave[i])) continue;
      active.push_back(wave[i]);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy && !dz) continue;
            Vec3i nb = wave[i] + Vec3i(dx, dy, dz);
            if ((nb.array() < 0).any() || (nb.array() >= resolution).any()) continue;
            if (enqueued.insert(cell_key(nb)).second) next.push_back(nb);
          }
    }
    std::sort(next.begin(), next.end(), [](const Vec3i& a, const Vec3i& b) {
      return cell_key(a) < cell_key(b);
    });
    wave = std::move(next);
  }
  std::sort(active.begin(), active.end(), [](const Vec3i& a, const Vec3i& b) {
    return cell_key(a) < cell_key(b);
  });

  SparseSdfGrid grid;
  grid.resolution = resolution;
  grid.tau = tau;
  grid.cells.resize(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    grid.cells[i].coord = active[i];
    for (int k = 0; k < 8; ++k)
      grid.cells[i].corners[std::size_t(k)] =
          corner_value(active[i] + Vec3i(k & 1, (k >> 1) & 1, (k >> 2) & 1));
  }
  grid.build_index();
  return grid;
}

}  // namespace

SparseSdfGrid sample_sparse_grid_field(const SdfField& field, int resolution,
                                       double tau, std::vector<Vec3i> seed_cells,
                                       SampleStats* stats) {
  check_grid_args(resolution, tau);
  return flood_band_signed(
      [&](const Vec3& p) { return field(p).distance; },
      [&](const Vec3& p) { return std::abs(field(p).distance); }, resolution, tau,
      std::move(seed_cells), stats);
}

std::vector<double> signed_lattice_values(const SdfEvaluator& sdf,
                                          const std::vector<Vec3i>& points,
                                          int resolution, SampleStats* stats) {
  const std::size_t n_points = points.size();
  const double h = 1.0 / resolution;
  auto point_at = [&](std::size_t i) {
    const Vec3i& p = points[i];
    return Vec3(p.x() * h - 0.5, p.y() * h - 0.5, p.z() * h - 0.5);
  };
  std::vector<double> unsigned_values(n_points);
  parallel_for(std::int64_t(n_points), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      unsigned_values[std::size_t(i)] = sdf.unsigned_distance(point_at(std::size_t(i)));
  }, 256);
  if (stats) stats->corner_evaluations += std::int64_t(n_points);

  std::vector<double> values(n_points);
  if (orientation_allows_propagation(sdf.mesh())) {
    // The surface cannot cross a lattice segment when either endpoint is
    // farther than the segment length; points joined by such edges share
    // their inside/outside state, so one winding query decides the whole
    // region.
    std::unordered_map<std::uint64_t, int> index;
    index.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) index[cell_key(points[i])] = int(i);
    DisjointSet dsu(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        Vec3i q = points[i];
        q[axis] += 1;
        auto it = index.find(cell_key(q));
        if (it == index.end()) continue;
        std::size_t j = std::size_t(it->second);
        if (safe_edge(unsigned_values[i], unsigned_values[j], h))
          dsu.unite(int(i), int(j));
      }
    }
    std::vector<int> representative(n_points, -1);
    std::vector<int> roots;
    for (std::size_t i = 0; i < n_points; ++i) {
      int root = dsu.find(int(i));
      if (representative[std::size_t(root)] < 0) {
        representative[std::size_t(root)] = int(i);
        roots.push_back(root);
      }
    }
    std::vector<double> root_winding(n_points, 0.0);
    parallel_for(std::int64_t(roots.size()), [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t r = begin; r < end; ++r) {
        int root = roots[std::size_t(r)];
        int rep = representative[std::size_t(root)];
        root_winding[std::size_t(root)] =
            sdf.winding_number(point_at(std::size_t(rep)));
      }
    }, 1);
    if (stats) stats->winding_evaluations += std::int64_t(roots.size());
    for (std::size_t i = 0; i < n_points; ++i) {
      bool inside = root_winding[std::size_t(dsu.find(int(i)))] > 0.5;
      values[i] = inside ? -unsigned_values[i] : unsigned_values[i];
    }
  } else {
    parallel_for(std::int64_t(n_points), [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i) {
        bool inside = sdf.winding_number(point_at(std::size_t(i))) > 0.5;
        values[std::size_t(i)] =
            inside ? -unsigned_values[std::size_t(i)] : unsigned_values[std::size_t(i)];
      }
    }, 64);
    if (stats) stats->winding_evaluations += std::int64_t(n_points);
  }
  return values;
}

SparseSdfGrid sample_sparse_grid(const SdfEvaluator& sdf, int resolution,
                                 double tau, SampleStats* stats) {
  check_grid_args(resolution, tau);
  auto unsigned_dist = [&](const Vec3& p) { return sdf.unsigned_distance(p); };
  if (orientation_allows_propagation(sdf.mesh())) {
    // Watertight input: the sign can only flip on the surface, so a plain
    // distance flood finds every sign-change cell and corner signs resolve
    // by safe-edge propagation.
    FloodResult flood = flood_band(unsigned_dist, resolution, tau,
                                   triangle_seed_cells(sdf.mesh(), resolution),
                                   stats);
    std::vector<double> values =
        signed_lattice_values(sdf, flood.lattice.points, resolution, stats);
    return assemble_grid(flood, resolution, tau, values);
  }
  // Open or unoriented input: per-point winding queries, and the flood also
  // tracks the sign membrane across holes so extraction can close them.
  return flood_band_signed(
      [&](const Vec3& p) {
        if (stats) ++stats->winding_evaluations;
        return sdf.evaluate(p).distance;
      },
      unsigned_dist, resolution, tau, triangle_seed_cells(sdf.mesh(), resolution),
      stats);
}

SparseSdfGrid sample_sparse_grid(const MeshBvh& bvh, const TriangleMesh& mesh,
                                 int resolution, double tau, SampleStats* stats) {
  SdfEvaluator sdf(bvh, mesh);
  return sample_sparse_grid(sdf, resolution, tau, stats);
}

}  // namespace meshpipe
