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
#include <filesystem>

#include "fixtures.hpp"
#include "meshpipe/render.hpp"

using namespace meshpipe;

namespace {

Camera top_down(int size, double half_height = 0.5) {
  Camera cam;
  cam.mode = CameraMode::Orthographic;
  cam.position = Vec3(0, 0, 2);
  cam.look_at = Vec3::Zero();
  cam.up = Vec3(0, 1, 0);
  cam.half_height = half_height;
  cam.width = size;
  cam.height = size;
  return cam;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("uniform trajectory hits the expected azimuths") {
  auto cams = uniform_trajectory(4, 0.0, 2.0, Vec3::Zero());
  REQUIRE(cams.size() == 4);
  CHECK((cams[0].position - Vec3(2, 0, 0)).norm() < 1e-12);
  CHECK((cams[1].position - Vec3(0, 2, 0)).norm() < 1e-12);
  CHECK((cams[2].position - Vec3(-2, 0, 0)).norm() < 1e-12);
  CHECK((cams[3].position - Vec3(0, -2, 0)).norm() < 1e-12);
}

TEST_CASE("single-camera trajectory sits at azimuth zero") {
  auto cams = uniform_trajectory(1, 0.3, 1.5, Vec3(0.1, 0.2, 0.3));
  REQUIRE(cams.size() == 1);
  Vec3 expected = Vec3(0.1, 0.2, 0.3) +
                  1.5 * Vec3(std::cos(0.3), 0.0, std::sin(0.3));
  CHECK((cams[0].position - expected).norm() < 1e-12);
}

TEST_CASE("trajectory cameras are equidistant from the center") {
  Vec3 center(0.2, -0.1, 0.4);
  for (const auto& cam : uniform_trajectory(7, 0.5, 1.25, center))
    CHECK(std::abs((cam.position - center).norm() - 1.25) < 1e-12);
  CHECK_THROWS_AS(uniform_trajectory(0, 0.0, 1.0, Vec3::Zero()), ValidationError);
  CHECK_THROWS_AS(uniform_trajectory(4, 0.0, 0.0, Vec3::Zero()), ValidationError);
}

TEST_CASE("empty mesh renders all background") {
  RasterImage image = rasterize(TriangleMesh{}, top_down(64));
  CHECK(image.foreground_count() == 0);
}

TEST_CASE("frustum-filling quad renders all foreground") {
  TriangleMesh quad;
  quad.vertices = {{-2, -2, 0}, {2, -2, 0}, {2, 2, 0}, {-2, 2, 0}};
  quad.faces = {{0, 1, 2}, {0, 2, 3}};
  RasterImage image = rasterize(quad, top_down(64));
  CHECK(image.foreground_count() == 64 * 64);
}

TEST_CASE("sphere silhouette area matches the analytic disc within 1%") {
  TriangleMesh sphere = fixtures::icosphere(4, 0.4);
  RasterImage image = rasterize(sphere, top_down(256, 0.5));
  double expected = M_PI * std::pow(0.4 / 1.0 * 256, 2.0);
  CHECK(double(image.foreground_count()) > 0.99 * expected);
  CHECK(double(image.foreground_count()) < 1.01 * expected);
}

TEST_CASE("one-pixel translation shifts the silhouette one column") {
  TriangleMesh box = fixtures::box(Vec3(-0.2, -0.3, -0.1), Vec3(0.1, 0.25, 0.1));
  Camera cam = top_down(128);
  const double world_per_pixel = 2.0 * cam.half_height / cam.height;
  RasterImage before = rasterize(box, cam);
  TriangleMesh moved = box;
  // Screen x follows the camera's right axis (+x here).
  for (auto& v : moved.vertices) v.x() += world_per_pixel;
  RasterImage after = rasterize(moved, cam);
  for (int y = 1; y < 127; ++y)
    for (int x = 1; x < 127; ++x)
      CHECK(after.foreground(x, y) == before.foreground(x - 1, y));
}

TEST_CASE("nearer triangle wins against the painter oracle") {
  TriangleMesh two;
  two.vertices = {{-1, -1, 0.2}, {1, -1, 0.2}, {0, 1, 0.2},
                  {-1, -1, 0.5}, {1, -1, 0.5}, {0, 1, 0.5}};
  two.faces = {{0, 1, 2}, {3, 4, 5}};
  Camera cam = top_down(96);
  RasterImage image = rasterize(two, cam);
  // Camera at z=2 looking down: depth to z=0.5 is 1.5, to z=0.2 is 1.8.
  std::size_t checked = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x)
      if (image.foreground(x, y)) {
        CHECK(image.at(x, y) == doctest::Approx(1.5).epsilon(1e-12));
        ++checked;
      }
  CHECK(checked > 1000);
}

TEST_CASE("rasterization is deterministic across repeated runs") {
  TriangleMesh blob = fixtures::bumpy_sphere(3, 0.4, 0.1, 7);
  Camera cam = top_down(128);
  RasterImage a = rasterize(blob, cam);
  RasterImage b = rasterize(blob, cam);
  CHECK(a.depth == b.depth);
}

TEST_CASE("iou identities") {
  TriangleMesh sphere = fixtures::icosphere(2, 0.3);
  Camera cam = top_down(64);
  RasterImage a = rasterize(sphere, cam);
  CHECK(silhouette_iou(a, a) == 1.0);

  RasterImage empty1(64, 64), empty2(64, 64);
  CHECK(silhouette_iou(empty1, empty2) == 1.0);

  RasterImage other(64, 32);
  CHECK_THROWS_AS(silhouette_iou(a, other), ValidationError);
}

TEST_CASE("disjoint foregrounds have zero iou") {
  TriangleMesh left = fixtures::cube(Vec3(-0.25, 0, 0), 0.1);
  TriangleMesh right = fixtures::cube(Vec3(0.25, 0, 0), 0.1);
  Camera cam = top_down(64);
  CHECK(silhouette_iou(rasterize(left, cam), rasterize(right, cam)) == 0.0);
}

TEST_CASE("half-overlapping equal rectangles give iou one third") {
  // Two unit-ish quads offset by half their width.
  auto quad_at = [&](double x0) {
    TriangleMesh q;
    q.vertices = {{x0, -0.2, 0}, {x0 + 0.4, -0.2, 0}, {x0 + 0.4, 0.2, 0},
                  {x0, 0.2, 0}};
    q.faces = {{0, 1, 2}, {0, 2, 3}};
    return q;
  };
  Camera cam = top_down(200);
  RasterImage a = rasterize(quad_at(-0.3), cam);
  RasterImage b = rasterize(quad_at(-0.1), cam);
  CHECK(silhouette_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  CHECK(silhouette_iou(a, b) == silhouette_iou(b, a));
}

TEST_CASE("pbm round trips the silhouette") {
  TriangleMesh sphere = fixtures::icosphere(3, 0.35);
  RasterImage image = rasterize(sphere, top_down(100));
  std::filesystem::create_directories("test_tmp/render");
  save_pbm(image, "test_tmp/render/sil.pbm");
  RasterImage back = load_pbm("test_tmp/render/sil.pbm");
  REQUIRE(back.width == image.width);
  REQUIRE(back.height == image.height);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x)
      CHECK(back.foreground(x, y) == image.foreground(x, y));
  save_pgm(image, "test_tmp/render/depth.pgm");
  CHECK(std::filesystem::file_size("test_tmp/render/depth.pgm") > 100 * 100);
}

TEST_CASE("camera validation rejects degenerate setups") {
  Camera cam = top_down(32);
  cam.up = Vec3(0, 0, 1);  // parallel to the view direction
  CHECK_THROWS_AS(cam.check(), ValidationError);
  Camera flat = top_down(32);
  flat.width = 0;
  CHECK_THROWS_AS(flat.check(), ValidationError);
}

}  // TEST_SUITE
