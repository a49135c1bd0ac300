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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "meshpipe/bvh.hpp"
#include "meshpipe/parts.hpp"

namespace meshpipe::fixtures {

TriangleMesh box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh mesh;
  for (int i = 0; i < 8; ++i)
    mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                               i & 4 ? hi.z() : lo.z());
  const int quads[6][4] = {
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
  };
  for (const auto& q : quads) {
    mesh.faces.emplace_back(q[0], q[1], q[2]);
    mesh.faces.emplace_back(q[0], q[2], q[3]);
  }
  return mesh;
}

TriangleMesh open_cube(const Vec3& center, double half) {
  TriangleMesh mesh = cube(center, half);
  // The +z quad is faces 2 and 3.
  mesh.faces.erase(mesh.faces.begin() + 2, mesh.faces.begin() + 4);
  return mesh;
}

TriangleMesh icosphere(int level, double radius, const Vec3& center) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  mesh = subdivide_midpoint(mesh, level);
  for (auto& v : mesh.vertices) v = center + radius * v.normalized();
  if (mesh.signed_volume() < 0.0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

TriangleMesh open_sphere(int level, double radius, double cap) {
  TriangleMesh mesh = icosphere(level, radius);
  std::vector<Vec3i> kept;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    if (mesh.face_centroid(f).z() <= radius * cap) kept.push_back(mesh.faces[f]);
  mesh.faces = std::move(kept);
  return mesh;
}

TriangleMesh torus(double major, double minor, int nu, int nv) {
  TriangleMesh mesh;
  for (int i = 0; i < nu; ++i) {
    double u = 2.0 * M_PI * i / nu;
    for (int j = 0; j < nv; ++j) {
      double v = 2.0 * M_PI * j / nv;
      mesh.vertices.emplace_back((major + minor * std::cos(v)) * std::cos(u),
                                 (major + minor * std::cos(v)) * std::sin(u),
                                 minor * std::sin(v));
    }
  }
  auto at = [&](int i, int j) { return ((i % nu) * nv) + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      mesh.faces.emplace_back(a, b, c);
      mesh.faces.emplace_back(a, c, d);
    }
  if (mesh.signed_volume() < 0.0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

TriangleMesh subdivide_midpoint(const TriangleMesh& input, int levels) {
  TriangleMesh mesh = input;
  for (int l = 0; l < levels; ++l) {
    TriangleMesh next;
    next.vertices = mesh.vertices;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int idx = int(next.vertices.size());
      next.vertices.push_back(0.5 * (mesh.vertices[std::size_t(a)] +
                                     mesh.vertices[std::size_t(b)]));
      midpoint.emplace(key, idx);
      return idx;
    };
    for (const auto& f : mesh.faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.faces.emplace_back(f[0], ab, ca);
      next.faces.emplace_back(f[1], bc, ab);
      next.faces.emplace_back(f[2], ca, bc);
      next.faces.emplace_back(ab, bc, ca);
    }
    mesh = std::move(next);
  }
  return mesh;
}

TriangleMesh bumpy_sphere(int level, double radius, double bump,
                          std::uint64_t seed) {
  TriangleMesh mesh = icosphere(level, radius);
  Rng rng(seed);
  // Smooth low-frequency bumps from a few random spherical harmonics-like
  // lobes keep the surface watertight and non-self-intersecting.
  std::vector<Vec3> lobes;
  std::vector<double> amps;
  for (int i = 0; i < 6; ++i) {
    lobes.push_back(rng.unit_vector());
    amps.push_back(rng.uniform(-bump, bump));
  }
  for (auto& v : mesh.vertices) {
    Vec3 dir = v.normalized();
    double r = radius;
    for (std::size_t i = 0; i < lobes.size(); ++i) {
      double d = dir.dot(lobes[i]);
      r += amps[i] * d * d * d;
    }
    v = r * dir;
  }
  return mesh;
}

TriangleMesh rotated_cube(double half, Mat3* rotation) {
  Mat3 rot = (Eigen::AngleAxisd(0.31, Vec3::UnitZ()) *
              Eigen::AngleAxisd(0.22, Vec3::UnitY())).toRotationMatrix();
  if (rotation) *rotation = rot;
  TriangleMesh mesh = cube(Vec3::Zero(), half);
  for (auto& v : mesh.vertices) v = rot * v;
  return mesh;
}

TriangleMesh barbell_soup() {
  TriangleMesh a = box(Vec3(-0.45, -0.15, -0.15), Vec3(-0.15, 0.15, 0.15));
  TriangleMesh b = box(Vec3(0.15, -0.15, -0.15), Vec3(0.45, 0.15, 0.15));
  TriangleMesh bar = box(Vec3(-0.2, -0.05, -0.05), Vec3(0.2, 0.05, 0.05));
  TriangleMesh out = a;
  for (const TriangleMesh* part : {&b, &bar}) {
    int base = int(out.vertices.size());
    out.vertices.insert(out.vertices.end(), part->vertices.begin(),
                        part->vertices.end());
    for (const auto& f : part->faces)
      out.faces.emplace_back(f[0] + base, f[1] + base, f[2] + base);
  }
  return out;
}

double hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b,
                          int samples, std::uint64_t seed) {
  MeshBvh bvh_a(a), bvh_b(b);
  auto directed = [&](const TriangleMesh& from, const TriangleMesh& to,
                      const MeshBvh& to_bvh, std::uint64_t s) {
    double worst = 0.0;
    for (const auto& v : from.vertices) {
      ClosestHit hit = to_bvh.closest_point(to, v);
      worst = std::max(worst, std::sqrt(hit.squared_distance));
    }
    PointCloudSample cloud = sample_surface(from, samples, s);
    for (const auto& p : cloud.points) {
      ClosestHit hit = to_bvh.closest_point(to, p);
      worst = std::max(worst, std::sqrt(hit.squared_distance));
    }
    return worst;
  };
  return std::max(directed(a, b, bvh_b, seed), directed(b, a, bvh_a, seed + 1));
}

SdfField sphere_field(double radius, const Vec3& center) {
  return [radius, center](const Vec3& p) {
    SignedDistanceResult r;
    Vec3 d = p - center;
    double len = d.norm();
    r.distance = len - radius;
    r.nearest_point = len > 1e-300 ? Vec3(center + radius * d / len)
                                   : Vec3(center + Vec3(radius, 0, 0));
    r.winding = r.distance < 0.0 ? 1.0 : 0.0;
    return r;
  };
}

TriangleMesh cylinder(const Vec3& base_center, const Vec3& axis, double radius,
                      double height, int segments) {
  Vec3 z = axis.normalized();
  Vec3 x = std::abs(z.z()) < 0.9 ? Vec3(0, 0, 1).cross(z).normalized()
                                 : Vec3(1, 0, 0).cross(z).normalized();
  Vec3 y = z.cross(x);
  TriangleMesh mesh;
  for (int ring = 0; ring < 2; ++ring) {
    Vec3 c = base_center + double(ring) * height * z;
    for (int s = 0; s < segments; ++s) {
      double a = 2.0 * M_PI * s / segments;
      mesh.vertices.push_back(c + radius * (std::cos(a) * x + std::sin(a) * y));
    }
  }
  int bottom_center = int(mesh.vertices.size());
  mesh.vertices.push_back(base_center);
  int top_center = bottom_center + 1;
  mesh.vertices.push_back(base_center + height * z);
  for (int s = 0; s < segments; ++s) {
    int s1 = (s + 1) % segments;
    mesh.faces.emplace_back(s, s1, segments + s1);
    mesh.faces.emplace_back(s, segments + s1, segments + s);
    mesh.faces.emplace_back(bottom_center, s1, s);
    mesh.faces.emplace_back(top_center, segments + s, segments + s1);
  }
  if (mesh.signed_volume() < 0.0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

DoorScene door_scene() {
  DoorScene scene;
  scene.frame = box(Vec3(-0.06, -0.3, 0.0), Vec3(-0.001, 0.3, 0.6));
  scene.door = box(Vec3(0.001, -0.006, 0.05), Vec3(0.301, 0.006, 0.55));
  scene.hinge_origin = Vec3(0.001, 0.0, 0.3);
  scene.hinge_axis = Vec3(0, 0, 1);
  return scene;
}

DrawerScene drawer_scene() {
  DrawerScene scene;
  scene.cabinet = box(Vec3(-0.3, -0.15, 0.0), Vec3(-0.001, 0.15, 0.3));
  scene.drawer = box(Vec3(0.001, -0.1, 0.05), Vec3(0.2, 0.1, 0.25));
  scene.slide_axis = Vec3(1, 0, 0);
  scene.extent = 0.3;
  return scene;
}

// Harness shared with the acceptance suite: per true sharp edge, the output
// triangles within one cell of the edge are split by side and averaged into
// two normals; the crease dihedral error is the deviation of their angle
// from 90 degrees, meaned over the 12 edges.
double cube_sharp_dihedral_error(const TriangleMesh& mesh,
                                 const TriangleMesh& reference, double band) {
  EdgeSet reference_sharp = detect_sharp_edges(reference, 30.0 * M_PI / 180.0);
  double sum = 0.0;
  int measured = 0;
  for (const auto& e : reference_sharp.edges) {
    const Vec3& a = reference.vertices[std::size_t(e.v0)];
    const Vec3& b = reference.vertices[std::size_t(e.v1)];
    Vec3 n1 = reference.face_normal(std::size_t(e.incident_faces[0]));
    Vec3 n2 = reference.face_normal(std::size_t(e.incident_faces[1]));
    Vec3 ab = b - a;
    Vec3 side1 = Vec3::Zero(), side2 = Vec3::Zero();
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      Vec3 c = mesh.face_centroid(f);
      double t = std::clamp((c - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      if ((c - (a + t * ab)).norm() > band) continue;
      if (t < 0.15 || t > 0.85) continue;  // keep clear of the corners
      Vec3 fn = mesh.face_normal(f);
      double area = mesh.face_area(f);
      (fn.dot(n1) > fn.dot(n2) ? side1 : side2) += area * fn;
    }
    if (side1.norm() <= 0.0 || side2.norm() <= 0.0) {
      sum += M_PI / 2;  // crease not reconstructed at all
      ++measured;
      continue;
    }
    double angle = std::acos(
        std::clamp(side1.normalized().dot(side2.normalized()), -1.0, 1.0));
    sum += std::abs(angle - M_PI / 2);
    ++measured;
  }
  return sum / measured;
}


}  // namespace meshpipe::fixtures
