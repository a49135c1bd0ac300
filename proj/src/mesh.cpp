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

#include "meshpipe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace meshpipe {

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const auto& v : vertices) box.expand(v);
  return box;
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const Vec3i& tri = faces[f];
  Vec3 n = (vertices[tri[1]] - vertices[tri[0]])
               .cross(vertices[tri[2]] - vertices[tri[0]]);
  double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double TriangleMesh::face_area(std::size_t f) const {
  const Vec3i& tri = faces[f];
  return 0.5 * (vertices[tri[1]] - vertices[tri[0]])
                   .cross(vertices[tri[2]] - vertices[tri[0]])
                   .norm();
}

Vec3 TriangleMesh::face_centroid(std::size_t f) const {
  const Vec3i& tri = faces[f];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double TriangleMesh::signed_volume() const {
  double vol = 0.0;
  for (const auto& tri : faces)
    vol += vertices[tri[0]].dot(vertices[tri[1]].cross(vertices[tri[2]]));
  return vol / 6.0;
}

TriangleMesh NormalizationTransform::apply(const TriangleMesh& mesh) const {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = apply(v);
  return out;
}

TriangleMesh NormalizationTransform::apply_inverse(const TriangleMesh& mesh) const {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = apply_inverse(v);
  return out;
}

void check_mesh(const TriangleMesh& mesh) {
  const int nv = int(mesh.vertices.size());
  for (const auto& v : mesh.vertices)
    if (!v.allFinite()) throw ValidationError("mesh has non-finite vertex position");
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3i& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= nv)
        throw ValidationError("face " + std::to_string(f) +
                              " references out-of-range vertex " +
                              std::to_string(tri[k]));
  }
  if (!mesh.face_labels.empty() && mesh.face_labels.size() != mesh.faces.size())
    throw ValidationError("face label array size does not match face count");
}

namespace {

// Key for an undirected edge; v0 < v1 packed into 64 bits.
inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

}  // namespace

EdgeSet build_edge_set(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(mesh.faces.size() * 2);
  EdgeSet set;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3i& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a == b) continue;
      std::uint64_t key = edge_key(a, b);
      auto [it, inserted] = index.emplace(key, int(set.edges.size()));
      if (inserted) {
        Edge e;
        e.v0 = std::min(a, b);
        e.v1 = std::max(a, b);
        set.edges.push_back(std::move(e));
      }
      set.edges[it->second].incident_faces.push_back(int(f));
    }
  }
  // Deterministic order regardless of hash layout.
  std::sort(set.edges.begin(), set.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.v0, a.v1) < std::tie(b.v0, b.v1);
  });
  for (auto& e : set.edges) {
    if (e.incident_faces.size() != 2) continue;
    Vec3 n0 = mesh.face_normal(std::size_t(e.incident_faces[0]));
    Vec3 n1 = mesh.face_normal(std::size_t(e.incident_faces[1]));
    double c = std::clamp(n0.dot(n1), -1.0, 1.0);
    // Interior angle between the faces: flat surfaces give pi.
    e.dihedral = M_PI - std::acos(c);
  }
  return set;
}

EdgeSet detect_sharp_edges(const EdgeSet& all_edges, double angle_threshold) {
  EdgeSet sharp;
  for (const auto& e : all_edges.edges) {
    if (e.incident_faces.size() != 2) continue;
    if (std::abs(M_PI - e.dihedral) > angle_threshold) sharp.edges.push_back(e);
  }
  return sharp;
}

EdgeSet detect_sharp_edges(const TriangleMesh& mesh, double angle_threshold) {
  return detect_sharp_edges(build_edge_set(mesh), angle_threshold);
}

ValidationReport validate(TriangleMesh& mesh) {
  check_mesh(mesh);
  ValidationReport report;

  const double diag2 = mesh.bounds().empty() ? 0.0 : mesh.bounds().extent().squaredNorm();
  const double area_eps = 1e-12 * diag2;

  std::vector<Vec3i> kept;
  std::vector<int> kept_labels;
  kept.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3i& tri = mesh.faces[f];
    bool degenerate = tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] ||
                      mesh.face_area(f) <= area_eps;
    if (degenerate) {
      ++report.degenerate_face_count;
      continue;
    }
    kept.push_back(tri);
    if (!mesh.face_labels.empty()) kept_labels.push_back(mesh.face_labels[f]);
  }
  mesh.faces = std::move(kept);
  mesh.face_labels = std::move(kept_labels);

  EdgeSet edges = build_edge_set(mesh);
  report.watertight = !mesh.faces.empty();
  bool edge_manifold = true;
  report.consistently_oriented = true;
  for (const auto& e : edges.edges) {
    if (e.boundary()) ++report.boundary_edge_count;
    if (e.non_manifold()) ++report.non_manifold_edge_count;
    if (e.incident_faces.size() != 2) report.watertight = false;
    if (e.incident_faces.size() > 2) edge_manifold = false;
    if (e.incident_faces.size() == 2) {
      // The two faces must traverse the shared edge in opposite directions.
      auto direction = [&](int face) {
        const Vec3i& tri = mesh.faces[std::size_t(face)];
        for (int k = 0; k < 3; ++k)
          if (tri[k] == e.v0 && tri[(k + 1) % 3] == e.v1) return 1;
        return -1;
      };
      if (direction(e.incident_faces[0]) == direction(e.incident_faces[1]))
        report.consistently_oriented = false;
    }
  }
  if (mesh.faces.empty()) report.consistently_oriented = false;

  // Connected components over face adjacency (shared edges).
  std::vector<int> component(mesh.faces.size(), -1);
  std::vector<std::vector<int>> adjacency(mesh.faces.size());
  for (const auto& e : edges.edges)
    for (std::size_t i = 0; i < e.incident_faces.size(); ++i)
      for (std::size_t j = i + 1; j < e.incident_faces.size(); ++j) {
        adjacency[std::size_t(e.incident_faces[i])].push_back(e.incident_faces[j]);
        adjacency[std::size_t(e.incident_faces[j])].push_back(e.incident_faces[i]);
      }
  std::vector<int> stack;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (component[f] >= 0) continue;
    int id = report.connected_components++;
    stack.push_back(int(f));
    component[f] = id;
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      for (int nb : adjacency[std::size_t(cur)])
        if (component[std::size_t(nb)] < 0) {
          component[std::size_t(nb)] = id;
          stack.push_back(nb);
        }
    }
  }

  // Vertex-manifold: faces around each vertex form a single edge-connected fan.
  bool vertex_manifold = edge_manifold;
  if (edge_manifold && !mesh.faces.empty()) {
    std::vector<std::vector<int>> vertex_faces(mesh.vertices.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
      for (int k = 0; k < 3; ++k)
        vertex_faces[std::size_t(mesh.faces[f][k])].push_back(int(f));
    std::unordered_map<std::uint64_t, int> edge_of;
    edge_of.reserve(edges.edges.size());
    for (std::size_t i = 0; i < edges.edges.size(); ++i)
      edge_of[edge_key(edges.edges[i].v0, edges.edges[i].v1)] = int(i);
    for (std::size_t v = 0; v < mesh.vertices.size() && vertex_manifold; ++v) {
      const auto& ring = vertex_faces[v];
      if (ring.size() <= 1) continue;
      // Union faces joined through edges incident to v.
      std::unordered_map<int, int> local;
      for (std::size_t i = 0; i < ring.size(); ++i) local[ring[i]] = int(i);
      std::vector<int> parent(ring.size());
      std::iota(parent.begin(), parent.end(), 0);
      std::function<int(int)> find = [&](int x) {
        while (parent[std::size_t(x)] != x) x = parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
        return x;
      };
      for (int f : ring) {
        const Vec3i& tri = mesh.faces[std::size_t(f)];
        for (int k = 0; k < 3; ++k) {
          int a = tri[k], b = tri[(k + 1) % 3];
          if (a != int(v) && b != int(v)) continue;
          auto it = edge_of.find(edge_key(a, b));
          if (it == edge_of.end()) continue;
          const Edge& e = edges.edges[std::size_t(it->second)];
          for (int g : e.incident_faces)
            if (g != f && local.count(g))
              parent[std::size_t(find(local[f]))] = find(local[g]);
        }
      }
      int root = find(0);
      for (std::size_t i = 1; i < ring.size(); ++i)
        if (find(int(i)) != root) {
          vertex_manifold = false;
          break;
        }
    }
  }
  report.manifold = edge_manifold && vertex_manifold && !mesh.faces.empty();
  return report;
}

std::string ValidationReport::to_json() const {
  std::ostringstream os;
  os << "{\"watertight\":" << (watertight ? "true" : "false")
     << ",\"manifold\":" << (manifold ? "true" : "false")
     << ",\"consistently_oriented\":" << (consistently_oriented ? "true" : "false")
     << ",\"degenerate_face_count\":" << degenerate_face_count
     << ",\"boundary_edge_count\":" << boundary_edge_count
     << ",\"non_manifold_edge_count\":" << non_manifold_edge_count
     << ",\"connected_components\":" << connected_components << "}";
  return os.str();
}

std::pair<TriangleMesh, NormalizationTransform> normalize_to_unit_cube(
    const TriangleMesh& mesh, double margin) {
  if (margin < 0.0 || margin >= 0.5)
    throw ValidationError("normalize margin must be in [0, 0.5)");
  if (mesh.vertices.empty()) throw ValidationError("cannot normalize empty mesh");
  Aabb box = mesh.bounds();
  double longest = box.extent().maxCoeff();
  if (!(longest > 0.0))
    throw ValidationError("cannot normalize point-degenerate mesh (zero extent)");
  NormalizationTransform t;
  t.scale = (1.0 - 2.0 * margin) / longest;
  t.translation = -t.scale * box.center();
  return {t.apply(mesh), t};
}

long euler_characteristic(const TriangleMesh& mesh) {
  EdgeSet edges = build_edge_set(mesh);
  return long(mesh.vertices.size()) - long(edges.size()) + long(mesh.faces.size());
}

}  // namespace meshpipe
