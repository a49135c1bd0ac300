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

#include "meshpipe/decimate.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <unordered_set>

namespace meshpipe {

void VertexQuadric::add_plane(const Vec3& n, double d, double w) {
  Eigen::Vector4d p(n.x(), n.y(), n.z(), d);
  q += w * (p * p.transpose());
}

double VertexQuadric::cost(const Vec3& x) const {
  Eigen::Vector4d v(x.x(), x.y(), x.z(), 1.0);
  return v.dot(q * v);
}

CollapseCandidate collapse_cost(const VertexQuadric& qa, const VertexQuadric& qb,
                                const Vec3& pa, const Vec3& pb) {
  VertexQuadric sum;
  sum.q = qa.q + qb.q;
  CollapseCandidate cand;
  Mat3 A = sum.q.topLeftCorner<3, 3>();
  Vec3 b = sum.q.topRightCorner<3, 1>();
  Eigen::SelfAdjointEigenSolver<Mat3> eigen(A);
  const Vec3 ev = eigen.eigenvalues();
  double max_ev = ev.cwiseAbs().maxCoeff();
  if (max_ev > 0.0 && ev.minCoeff() > 1e-9 * max_ev) {
    cand.position = eigen.eigenvectors() *
                    (eigen.eigenvectors().transpose() * Vec3(-b)).cwiseQuotient(ev);
  } else {
    cand.used_fallback = true;
    Vec3 mid = 0.5 * (pa + pb);
    double ca = sum.cost(pa), cb = sum.cost(pb), cm = sum.cost(mid);
    if (cm <= ca && cm <= cb) cand.position = mid;
    else cand.position = ca <= cb ? pa : pb;
  }
  cand.cost = std::max(0.0, sum.cost(cand.position));
  return cand;
}

namespace {

inline std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

struct QueueEntry {
  double cost;
  int v0, v1;            // v0 < v1
  Vec3 position;
  std::uint32_t stamp0, stamp1;
  bool endpoint_retry;   // second chance with endpoint placement

  bool operator>(const QueueEntry& o) const {
    if (cost != o.cost) return cost > o.cost;
    if (v0 != o.v0) return v0 > o.v0;
    return v1 > o.v1;
  }
};

}  // namespace

TriangleMesh decimate_to(const TriangleMesh& input, int target_faces,
                         bool preserve_sharp, double sharp_threshold,
                         DecimateStats* stats) {
  if (target_faces < 4)
    throw ValidationError("decimation target must be >= 4 faces");
  TriangleMesh mesh = input;
  ValidationReport report = validate(mesh);
  if (!report.manifold || !report.watertight)
    throw ValidationError("decimation requires a manifold watertight mesh");

  DecimateStats local;
  DecimateStats& st = stats ? *stats : local;
  if (int(mesh.faces.size()) <= target_faces) {
    st.reached_target = true;
    return mesh;
  }

  const std::size_t nv = mesh.vertices.size();
  std::vector<VertexQuadric> quadrics(nv);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    Vec3 n = mesh.face_normal(f);
    double area = mesh.face_area(f);
    if (!(area > 0.0)) continue;
    double d = -n.dot(mesh.vertices[mesh.faces[f][0]]);
    for (int k = 0; k < 3; ++k)
      quadrics[std::size_t(mesh.faces[f][k])].add_plane(n, d, area);
  }
  // Boundary edges (none on watertight input) get a perpendicular
  // constraint plane so rims do not drift.
  {
    EdgeSet edges = build_edge_set(mesh);
    for (const auto& e : edges.edges) {
      if (!e.boundary()) continue;
      const Vec3& a = mesh.vertices[e.v0];
      const Vec3& b = mesh.vertices[e.v1];
      Vec3 fn = mesh.face_normal(std::size_t(e.incident_faces[0]));
      Vec3 n = (b - a).cross(fn);
      double len = n.norm();
      if (len <= 0.0) continue;
      n /= len;
      double w = 100.0 * (b - a).squaredNorm();
      quadrics[std::size_t(e.v0)].add_plane(n, -n.dot(a), w);
      quadrics[std::size_t(e.v1)].add_plane(n, -n.dot(a), w);
      quadrics[std::size_t(e.v0)].boundary_penalized = true;
      quadrics[std::size_t(e.v1)].boundary_penalized = true;
    }
  }

  std::unordered_set<std::uint64_t> sharp_pairs;
  if (preserve_sharp) {
    EdgeSet sharp = detect_sharp_edges(mesh, sharp_threshold);
    for (const auto& e : sharp.edges) sharp_pairs.insert(pair_key(e.v0, e.v1));
  }

  std::vector<std::vector<int>> vertex_faces(nv);
  std::vector<char> face_alive(mesh.faces.size(), 1);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    for (int k = 0; k < 3; ++k)
      vertex_faces[std::size_t(mesh.faces[f][k])].push_back(int(f));

  std::vector<std::uint32_t> stamp(nv, 0);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;

  auto sharp_multiplier = [&](int a, int b) {
    return preserve_sharp && sharp_pairs.count(pair_key(a, b)) ? 10.0 : 1.0;
  };
  auto push_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    CollapseCandidate cand = collapse_cost(quadrics[std::size_t(a)],
                                           quadrics[std::size_t(b)],
                                           mesh.vertices[std::size_t(a)],
                                           mesh.vertices[std::size_t(b)]);
    queue.push({cand.cost * sharp_multiplier(a, b), a, b, cand.position,
                stamp[std::size_t(a)], stamp[std::size_t(b)], false});
  };

  {
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
      for (int k = 0; k < 3; ++k) {
        int a = mesh.faces[f][k], b = mesh.faces[f][(k + 1) % 3];
        if (seen.insert(pair_key(a, b)).second) push_edge(a, b);
      }
  }

  auto neighbors = [&](int v) {
    std::set<int> out;
    for (int f : vertex_faces[std::size_t(v)]) {
      if (!face_alive[std::size_t(f)]) continue;
      for (int k = 0; k < 3; ++k)
        if (mesh.faces[std::size_t(f)][k] != v)
          out.insert(mesh.faces[std::size_t(f)][k]);
    }
    return out;
  };

  int live_faces = int(mesh.faces.size());
  while (live_faces > target_faces && !queue.empty()) {
    QueueEntry e = queue.top();
    queue.pop();
    if (e.stamp0 != stamp[std::size_t(e.v0)] || e.stamp1 != stamp[std::size_t(e.v1)])
      continue;  // stale

    std::vector<int> shared_faces;
    for (int f : vertex_faces[std::size_t(e.v0)]) {
      if (!face_alive[std::size_t(f)]) continue;
      const Vec3i& tri = mesh.faces[std::size_t(f)];
      if (tri[0] == e.v1 || tri[1] == e.v1 || tri[2] == e.v1)
        shared_faces.push_back(f);
    }
    if (shared_faces.size() != 2) continue;  // edge gone or not interior

    // Link condition: the shared one-ring must be exactly the two vertices
    // opposite the collapsing edge, or the collapse pinches the surface.
    std::set<int> na = neighbors(e.v0), nb = neighbors(e.v1);
    std::vector<int> shared;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                          std::back_inserter(shared));
    std::set<int> opposite;
    for (int f : shared_faces)
      for (int k = 0; k < 3; ++k) {
        int v = mesh.faces[std::size_t(f)][k];
        if (v != e.v0 && v != e.v1) opposite.insert(v);
      }
    if (shared.size() != opposite.size() ||
        !std::equal(shared.begin(), shared.end(), opposite.begin())) {
      ++st.rejected_link;
      continue;
    }
    if (live_faces - 2 < 4) break;  // would drop below a closed surface

    auto flips = [&](int moving, const Vec3& new_pos) {
      for (int f : vertex_faces[std::size_t(moving)]) {
        if (!face_alive[std::size_t(f)]) continue;
        if (std::find(shared_faces.begin(), shared_faces.end(), f) !=
            shared_faces.end())
          continue;
        const Vec3i& tri = mesh.faces[std::size_t(f)];
        Vec3 p[3], q[3];
        for (int k = 0; k < 3; ++k) {
          p[k] = mesh.vertices[std::size_t(tri[k])];
          q[k] = tri[k] == moving ? new_pos : p[k];
        }
        Vec3 n_before = (p[1] - p[0]).cross(p[2] - p[0]);
        Vec3 n_after = (q[1] - q[0]).cross(q[2] - q[0]);
        if (n_before.dot(n_after) < 0.0) return true;
      }
      return false;
    };
    if (flips(e.v0, e.position) || flips(e.v1, e.position)) {
      ++st.rejected_flip;
      if (!e.endpoint_retry) {
        VertexQuadric sum;
        sum.q = quadrics[std::size_t(e.v0)].q + quadrics[std::size_t(e.v1)].q;
        const Vec3& pa = mesh.vertices[std::size_t(e.v0)];
        const Vec3& pb = mesh.vertices[std::size_t(e.v1)];
        Vec3 pos = sum.cost(pa) <= sum.cost(pb) ? pa : pb;
        ++st.endpoint_retries;
        queue.push({std::max(0.0, sum.cost(pos)) * sharp_multiplier(e.v0, e.v1),
                    e.v0, e.v1, pos, e.stamp0, e.stamp1, true});
      }
      continue;
    }

    // Collapse v1 into v0 at the chosen position.
    mesh.vertices[std::size_t(e.v0)] = e.position;
    quadrics[std::size_t(e.v0)].q += quadrics[std::size_t(e.v1)].q;
    for (int f : shared_faces) {
      face_alive[std::size_t(f)] = 0;
      --live_faces;
    }
    for (int f : vertex_faces[std::size_t(e.v1)]) {
      if (!face_alive[std::size_t(f)]) continue;
      Vec3i& tri = mesh.faces[std::size_t(f)];
      for (int k = 0; k < 3; ++k)
        if (tri[k] == e.v1) tri[k] = e.v0;
      vertex_faces[std::size_t(e.v0)].push_back(f);
    }
    vertex_faces[std::size_t(e.v1)].clear();
    if (preserve_sharp && !sharp_pairs.empty()) {
      for (int nbv : nb)
        if (sharp_pairs.erase(pair_key(e.v1, nbv)) && nbv != e.v0)
          sharp_pairs.insert(pair_key(e.v0, nbv));
    }
    ++stamp[std::size_t(e.v0)];
    ++stamp[std::size_t(e.v1)];
    ++st.collapses;
    st.total_cost += e.cost;

    for (int nbv : neighbors(e.v0)) push_edge(e.v0, nbv);
  }
  st.reached_target = live_faces <= target_faces;

  // Compact: drop dead faces and unreferenced vertices.
  TriangleMesh out;
  std::vector<int> remap(nv, -1);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!face_alive[f]) continue;
    Vec3i tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int v = tri[k];
      if (remap[std::size_t(v)] < 0) {
        remap[std::size_t(v)] = int(out.vertices.size());
        out.vertices.push_back(mesh.vertices[std::size_t(v)]);
      }
      tri[k] = remap[std::size_t(v)];
    }
    out.faces.push_back(tri);
  }
  return out;
}

}  // namespace meshpipe
