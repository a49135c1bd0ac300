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

#include "meshpipe/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace meshpipe {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = va + vb + vc;
  if (denom <= 0.0) {
    // Degenerate triangle: fall back to the best vertex.
    double da = (p - a).squaredNorm(), db = (p - b).squaredNorm(),
           dc = (p - c).squaredNorm();
    if (da <= db && da <= dc) return a;
    return db <= dc ? b : c;
  }
  const double v = vb / denom, w = vc / denom;
  return a + v * ab + w * ac;
}

namespace {

inline ClosestHit consider(const TriangleMesh& mesh, int tri, const Vec3& p,
                           ClosestHit best) {
  const Vec3i& f = mesh.faces[std::size_t(tri)];
  Vec3 q = closest_point_on_triangle(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                     mesh.vertices[f[2]]);
  double d2 = (p - q).squaredNorm();
  if (best.triangle < 0 || d2 < best.squared_distance) {
    best.squared_distance = d2;
    best.point = q;
    best.triangle = tri;
  }
  return best;
}

Aabb triangle_box(const TriangleMesh& mesh, int tri) {
  Aabb box;
  const Vec3i& f = mesh.faces[std::size_t(tri)];
  for (int k = 0; k < 3; ++k) box.expand(mesh.vertices[f[k]]);
  return box;
}

}  // namespace

ClosestHit closest_point_exhaustive(const TriangleMesh& mesh, const Vec3& p) {
  ClosestHit best;
  for (int t = 0; t < int(mesh.faces.size()); ++t) best = consider(mesh, t, p, best);
  return best;
}

MeshBvh::MeshBvh(const TriangleMesh& mesh, int leaf_size)
    : leaf_size_(std::max(1, leaf_size)) {
  if (mesh.faces.empty()) throw ValidationError("cannot build BVH over empty mesh");
  order_.resize(mesh.faces.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<Vec3> centroids(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    centroids[f] = mesh.face_centroid(f);
  nodes_.reserve(2 * mesh.faces.size() / std::size_t(leaf_size_) + 2);
  build(mesh, centroids, 0, int(mesh.faces.size()));
}

int MeshBvh::build(const TriangleMesh& mesh, std::vector<Vec3>& centroids,
                   int begin, int end) {
  int index = int(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (int i = begin; i < end; ++i) {
    box.expand(triangle_box(mesh, order_[std::size_t(i)]));
    centroid_box.expand(centroids[std::size_t(order_[std::size_t(i)])]);
  }
  nodes_[std::size_t(index)].box = box;
  if (end - begin <= leaf_size_) {
    nodes_[std::size_t(index)].begin = begin;
    nodes_[std::size_t(index)].end = end;
    return index;
  }
  int axis;
  centroid_box.extent().maxCoeff(&axis);
  int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     double ca = centroids[std::size_t(a)][axis];
                     double cb = centroids[std::size_t(b)][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  int left = build(mesh, centroids, begin, mid);
  int right = build(mesh, centroids, mid, end);
  nodes_[std::size_t(index)].left = left;
  nodes_[std::size_t(index)].right = right;
  return index;
}

ClosestHit MeshBvh::closest_point(const TriangleMesh& mesh, const Vec3& p) const {
  ClosestHit best;
  if (nodes_.empty()) return best;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[std::size_t(stack[--top])];
    if (best.triangle >= 0 && node.box.squared_distance(p) > best.squared_distance)
      continue;
    if (node.leaf()) {
      for (int i = node.begin; i < node.end; ++i)
        best = consider(mesh, order_[std::size_t(i)], p, best);
    } else {
      // Visit the nearer child first for tighter pruning.
      double dl = nodes_[std::size_t(node.left)].box.squared_distance(p);
      double dr = nodes_[std::size_t(node.right)].box.squared_distance(p);
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }
  return best;
}

double MeshBvh::surface_distance(const MeshBvh& bvh_a, const TriangleMesh& a,
                                 const MeshBvh& bvh_b, const TriangleMesh& b,
                                 Vec3* point_a, Vec3* point_b) {
  struct Pair {
    double lower;
    int node_a, node_b;
    bool operator>(const Pair& o) const { return lower > o.lower; }
  };
  auto node_distance = [](const Aabb& x, const Aabb& y) {
    Vec3 d = (x.min - y.max).cwiseMax(y.min - x.max).cwiseMax(0.0);
    return d.squaredNorm();
  };
  std::vector<Pair> heap;
  auto push = [&](int na, int nb) {
    heap.push_back({node_distance(bvh_a.nodes()[std::size_t(na)].box,
                                  bvh_b.nodes()[std::size_t(nb)].box),
                    na, nb});
    std::push_heap(heap.begin(), heap.end(), std::greater<>());
  };
  push(0, 0);
  double best = std::numeric_limits<double>::infinity();
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), std::greater<>());
    Pair pr = heap.back();
    heap.pop_back();
    if (pr.lower >= best) continue;
    const auto& na = bvh_a.nodes()[std::size_t(pr.node_a)];
    const auto& nb = bvh_b.nodes()[std::size_t(pr.node_b)];
    if (na.leaf() && nb.leaf()) {
      for (int i = na.begin; i < na.end; ++i) {
        const Vec3i& fa = a.faces[std::size_t(bvh_a.order()[std::size_t(i)])];
        for (int j = nb.begin; j < nb.end; ++j) {
          const Vec3i& fb = b.faces[std::size_t(bvh_b.order()[std::size_t(j)])];
          // Sample closest point of each b-vertex on triangle a and vice
          // versa, then refine with an alternating projection.
          Vec3 pa = a.vertices[fa[0]], pb = b.vertices[fb[0]];
          for (int it = 0; it < 8; ++it) {
            pa = closest_point_on_triangle(pb, a.vertices[fa[0]], a.vertices[fa[1]],
                                           a.vertices[fa[2]]);
            pb = closest_point_on_triangle(pa, b.vertices[fb[0]], b.vertices[fb[1]],
                                           b.vertices[fb[2]]);
          }
          double d2 = (pa - pb).squaredNorm();
          if (d2 < best) {
            best = d2;
            if (point_a) *point_a = pa;
            if (point_b) *point_b = pb;
          }
        }
      }
    } else if (nb.leaf() || (!na.leaf() && na.box.extent().squaredNorm() >=
                                               nb.box.extent().squaredNorm())) {
      push(na.left, pr.node_b);
      push(na.right, pr.node_b);
    } else {
      push(pr.node_a, nb.left);
      push(pr.node_a, nb.right);
    }
  }
  return std::sqrt(best);
}

}  // namespace meshpipe
