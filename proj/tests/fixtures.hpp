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

#include "meshpipe/mesh.hpp"
#include "meshpipe/sdf.hpp"

namespace meshpipe::fixtures {

/// Axis-aligned box with outward-oriented faces.
TriangleMesh box(const Vec3& min_corner, const Vec3& max_corner);
inline TriangleMesh cube(const Vec3& center, double half) {
  return box(center - Vec3::Constant(half), center + Vec3::Constant(half));
}

/// Cube with the +z face removed (10 triangles).
TriangleMesh open_cube(const Vec3& center, double half);

/// Subdivided icosahedron projected to the sphere; 20 * 4^level faces.
TriangleMesh icosphere(int level, double radius, const Vec3& center = Vec3::Zero());

/// Icosphere with the polar cap (faces whose centroid z > radius * cap)
/// removed; non-watertight.
TriangleMesh open_sphere(int level, double radius, double cap = 0.98);

/// Genus-1 torus, outward oriented.
TriangleMesh torus(double major, double minor, int major_segments,
                   int minor_segments);

/// Midpoint subdivision (no smoothing) applied `levels` times.
TriangleMesh subdivide_midpoint(const TriangleMesh& mesh, int levels);

/// Randomly bumped icosphere; watertight, deterministic per seed.
TriangleMesh bumpy_sphere(int level, double radius, double bump,
                          std::uint64_t seed);

/// Two cubes joined by a thin bar, as a (non-welded) triangle soup.
TriangleMesh barbell_soup();

/// Cube rotated off the lattice axes; exercises sharp-feature placement with
/// imperfect hermite data. Outputs the rotation for mapping true corners.
TriangleMesh rotated_cube(double half, Mat3* rotation = nullptr);

/// Maximum of directed sampled distances between surfaces (vertices plus
/// area-uniform samples, both directions).
double hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b,
                          int samples = 4000, std::uint64_t seed = 11);

/// Analytic sphere field for the sampling test seam.
SdfField sphere_field(double radius, const Vec3& center = Vec3::Zero());

/// Watertight n-gon prism approximating a cylinder.
TriangleMesh cylinder(const Vec3& base_center, const Vec3& axis, double radius,
                      double height, int segments = 32);

/// Frame + door with a known vertical hinge line.
struct DoorScene {
  TriangleMesh frame;   // root part
  TriangleMesh door;
  Vec3 hinge_origin;    // point on the true hinge
  Vec3 hinge_axis;      // unit, +z
};
DoorScene door_scene();

/// Per true sharp edge of the reference cube, the output triangles within
/// `band` of the edge are side-split and averaged into two normals; returns
/// the mean deviation of their angle from 90 degrees over the 12 edges.
double cube_sharp_dihedral_error(const TriangleMesh& mesh,
                                 const TriangleMesh& reference, double band);

/// Cabinet + drawer with a known slide direction.
struct DrawerScene {
  TriangleMesh cabinet;  // root part
  TriangleMesh drawer;
  Vec3 slide_axis;       // unit, +x
  double extent;         // ground-truth travel
};
DrawerScene drawer_scene();

}  // namespace meshpipe::fixtures
