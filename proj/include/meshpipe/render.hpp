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

#include <limits>
#include <string>
#include <vector>

#include "meshpipe/mesh.hpp"

namespace meshpipe {

enum class CameraMode { Orthographic, Perspective };

struct Camera {
  CameraMode mode = CameraMode::Orthographic;
  Vec3 position = Vec3(0, -1, 0);
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3(0, 0, 1);
  double fov_y = 0.8;        // radians, perspective
  double half_height = 0.5;  // world units, orthographic
  int width = 512;
  int height = 512;

  /// Throws when the view direction is degenerate or parallel to up.
  void check() const;
};

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // +inf background, row-major, row 0 at top

  RasterImage() = default;
  RasterImage(int w, int h)
      : width(w), height(h),
        depth(std::size_t(w) * std::size_t(h),
              std::numeric_limits<double>::infinity()) {}

  double at(int x, int y) const { return depth[std::size_t(y) * width + x]; }
  bool foreground(int x, int y) const { return std::isfinite(at(x, y)); }
  std::size_t foreground_count() const;
};

/// Cameras at azimuths 2*pi*k/count on a circle of the given radius and
/// elevation, all looking at center with up = +z projected.
std::vector<Camera> uniform_trajectory(int count, double elevation, double radius,
                                       const Vec3& center);

/// Z-buffered rasterization with the top-left fill convention, depth along
/// the view axis, back-face culling disabled. Deterministic for a fixed
/// camera and mesh regardless of thread count.
RasterImage rasterize(const TriangleMesh& mesh, const Camera& camera);

/// |A intersect B| / |A union B| over foreground bits; 1.0 when both empty.
double silhouette_iou(const RasterImage& a, const RasterImage& b);

/// PBM (P4) silhouette and 16-bit PGM (P5) normalized depth.
void save_pbm(const RasterImage& image, const std::string& path);
RasterImage load_pbm(const std::string& path);  // foreground depth = 1.0
void save_pgm(const RasterImage& image, const std::string& path);

}  // namespace meshpipe
