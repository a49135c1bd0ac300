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
#include <fstream>

#include "fixtures.hpp"
#include "meshpipe/mesh.hpp"
#include "meshpipe/mesh_io.hpp"

using namespace meshpipe;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path dir = fs::path("test_tmp") / "mesh_core";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("mesh_core") {

TEST_CASE("obj cube load counts records") {
  fs::path path = tmp_dir() / "cube.obj";
  save_mesh(fixtures::cube(Vec3::Zero(), 0.5), path.string());
  TriangleMesh mesh = load_mesh(path.string());
  CHECK(mesh.vertices.size() == 8);
  CHECK(mesh.faces.size() == 12);

  // Exactly 8 v-lines and 12 f-lines in the written file.
  std::ifstream in(path);
  int v_lines = 0, f_lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v_lines;
    if (line.rfind("f ", 0) == 0) ++f_lines;
  }
  CHECK(v_lines == 8);
  CHECK(f_lines == 12);
}

TEST_CASE("obj quad fan-triangulates sharing the diagonal") {
  fs::path path = tmp_dir() / "quad.obj";
  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  TriangleMesh mesh = load_mesh(path.string());
  REQUIRE(mesh.faces.size() == 2);
  CHECK(mesh.faces[0] == Vec3i(0, 1, 2));
  CHECK(mesh.faces[1] == Vec3i(0, 2, 3));
}

TEST_CASE("obj parse errors carry line numbers") {
  fs::path path = tmp_dir() / "bad.obj";
  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
  CHECK_THROWS_WITH_AS(load_mesh(path.string()),
                       doctest::Contains(":4:"), ValidationError);
}

TEST_CASE("empty mesh load is an error") {
  fs::path path = tmp_dir() / "empty.obj";
  std::ofstream(path) << "v 0 0 0\n";
  CHECK_THROWS_AS(load_mesh(path.string()), ValidationError);
}

TEST_CASE("save refuses meshes without faces") {
  TriangleMesh mesh;
  mesh.vertices.emplace_back(0, 0, 0);
  CHECK_THROWS_AS(save_mesh(mesh, (tmp_dir() / "no.obj").string()),
                  ValidationError);
}

// Round-trip oracle: binary PLY must reproduce arrays bit-for-bit and OBJ to
// 9 significant digits, over randomly generated meshes.
TEST_CASE("ply round trip is bit exact") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    TriangleMesh mesh = fixtures::bumpy_sphere(2, 0.4, 0.1, seed);
    fs::path path = tmp_dir() / ("rt_" + std::to_string(seed) + ".ply");
    save_mesh(mesh, path.string());
    TriangleMesh back = load_mesh(path.string());
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    REQUIRE(back.faces.size() == mesh.faces.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
      CHECK(back.vertices[i] == mesh.vertices[i]);
    for (std::size_t i = 0; i < mesh.faces.size(); ++i)
      CHECK(back.faces[i] == mesh.faces[i]);
  }
}

TEST_CASE("ascii ply and labels round trip") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.37);
  mesh.face_labels.assign(mesh.faces.size(), 0);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    mesh.face_labels[f] = int(f % 3);
  fs::path path = tmp_dir() / "labels.ply";
  save_mesh(mesh, path.string(), MeshFormat::PlyAscii);
  TriangleMesh back = load_mesh(path.string(), MeshFormat::PlyAscii);
  REQUIRE(back.face_labels.size() == mesh.face_labels.size());
  CHECK(back.face_labels == mesh.face_labels);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK(back.vertices[i] == mesh.vertices[i]);
}

TEST_CASE("obj round trip preserves 9 significant digits") {
  TriangleMesh mesh = fixtures::bumpy_sphere(2, 0.4, 0.1, 9);
  fs::path path = tmp_dir() / "rt.obj";
  save_mesh(mesh, path.string());
  TriangleMesh back = load_mesh(path.string());
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    for (int k = 0; k < 3; ++k)
      CHECK(back.vertices[i][k] ==
            doctest::Approx(mesh.vertices[i][k]).epsilon(1e-8));
  CHECK(back.faces == mesh.faces);
}

TEST_CASE("normalize cube spanning [0,2]^3 with margin 0") {
  TriangleMesh mesh = fixtures::box(Vec3(0, 0, 0), Vec3(2, 2, 2));
  auto [norm, t] = normalize_to_unit_cube(mesh, 0.0);
  CHECK(t.scale == doctest::Approx(0.5).epsilon(1e-15));
  for (int k = 0; k < 3; ++k)
    CHECK(t.translation[k] == doctest::Approx(-0.5).epsilon(1e-15));
  Aabb box = norm.bounds();
  for (int k = 0; k < 3; ++k) {
    CHECK(box.min[k] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(box.max[k] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("normalize of already-normalized mesh is identity") {
  TriangleMesh mesh = fixtures::box(Vec3(-0.5, -0.2, -0.1), Vec3(0.5, 0.2, 0.1));
  auto [norm, t] = normalize_to_unit_cube(mesh, 0.0);
  CHECK(t.scale == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.translation.norm() == doctest::Approx(0.0).epsilon(1e-15));
  (void)norm;
}

TEST_CASE("normalize bbox contract and inverse recovery on random meshes") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    TriangleMesh mesh = fixtures::bumpy_sphere(1, 0.4, 0.1, rng.next());
    double scale = rng.uniform(0.1, 50.0);
    Vec3 offset(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20));
    for (auto& v : mesh.vertices) v = scale * v + offset;
    double margin = rng.uniform(0.0, 0.4);
    auto [norm, t] = normalize_to_unit_cube(mesh, margin);
    Aabb box = norm.bounds();
    CHECK(box.center().norm() < 1e-9);
    CHECK(box.extent().maxCoeff() ==
          doctest::Approx(1.0 - 2.0 * margin).epsilon(1e-9));
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
      CHECK((t.apply_inverse(norm.vertices[i]) - mesh.vertices[i]).norm() <
            1e-9 * scale);
  }
}

TEST_CASE("normalize rejects degenerate input") {
  TriangleMesh mesh;
  mesh.vertices.assign(3, Vec3(1, 2, 3));
  mesh.faces.emplace_back(0, 1, 2);
  CHECK_THROWS_AS(normalize_to_unit_cube(mesh, 0.0), ValidationError);
  CHECK_THROWS_AS(normalize_to_unit_cube(fixtures::cube(Vec3::Zero(), 1.0), 0.5),
                  ValidationError);
}

TEST_CASE("cube has exactly 12 sharp edges at 30 degrees") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.5);
  EdgeSet sharp = detect_sharp_edges(mesh, 30.0 * M_PI / 180.0);
  CHECK(sharp.size() == 12);
  for (const auto& e : sharp.edges)
    CHECK(std::abs(e.dihedral - M_PI / 2) < 1e-12);
}

TEST_CASE("icosphere level 4 has no sharp edges at 30 degrees") {
  TriangleMesh mesh = fixtures::icosphere(4, 0.4);
  // Oracle: exhaustive edge scan for the worst dihedral deviation.
  EdgeSet all = build_edge_set(mesh);
  double worst = 0.0;
  for (const auto& e : all.edges)
    if (e.incident_faces.size() == 2)
      worst = std::max(worst, std::abs(M_PI - e.dihedral));
  CHECK(worst < 30.0 * M_PI / 180.0);
  CHECK(detect_sharp_edges(all, 30.0 * M_PI / 180.0).size() == 0);
}

TEST_CASE("threshold zero returns every discontinuous interior edge") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.5);
  EdgeSet all = build_edge_set(mesh);
  EdgeSet sharp = detect_sharp_edges(all, 0.0);
  std::size_t discontinuous = 0;
  for (const auto& e : all.edges)
    if (e.incident_faces.size() == 2 && std::abs(M_PI - e.dihedral) > 0.0)
      ++discontinuous;
  CHECK(sharp.size() == discontinuous);
  CHECK(sharp.size() == 12);  // the 6 face diagonals are flat
}

TEST_CASE("sharp edge detection is monotone in the threshold") {
  TriangleMesh mesh = fixtures::bumpy_sphere(2, 0.4, 0.15, 5);
  EdgeSet all = build_edge_set(mesh);
  std::size_t previous = all.size() + 1;
  for (double deg : {0.0, 5.0, 15.0, 30.0, 60.0, 120.0}) {
    std::size_t count = detect_sharp_edges(all, deg * M_PI / 180.0).size();
    CHECK(count <= previous);
    previous = count;
  }
}

TEST_CASE("validate closed cube") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.5);
  ValidationReport report = validate(mesh);
  CHECK(report.watertight);
  CHECK(report.manifold);
  CHECK(report.consistently_oriented);
  CHECK(report.connected_components == 1);
  CHECK(report.degenerate_face_count == 0);
  CHECK(report.to_json().find("\"watertight\":true") != std::string::npos);
}

TEST_CASE("validate cube with one face removed") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.5);
  mesh.faces.pop_back();
  ValidationReport report = validate(mesh);
  CHECK(!report.watertight);
  CHECK(report.boundary_edge_count == 3);
}

TEST_CASE("validate two disjoint cubes") {
  TriangleMesh a = fixtures::cube(Vec3(-1, 0, 0), 0.3);
  TriangleMesh b = fixtures::cube(Vec3(1, 0, 0), 0.3);
  int base = int(a.vertices.size());
  a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& f : b.faces)
    a.faces.emplace_back(f[0] + base, f[1] + base, f[2] + base);
  ValidationReport report = validate(a);
  CHECK(report.connected_components == 2);
  CHECK(report.watertight);
}

TEST_CASE("validate removes degenerate faces") {
  TriangleMesh mesh = fixtures::cube(Vec3::Zero(), 0.5);
  mesh.faces.emplace_back(0, 0, 1);               // repeated index
  mesh.faces.emplace_back(0, 1, 0);               // repeated index
  std::size_t before = mesh.faces.size();
  ValidationReport report = validate(mesh);
  CHECK(report.degenerate_face_count == 2);
  CHECK(mesh.faces.size() == before - 2);
}

TEST_CASE("euler characteristic matches genus") {
  CHECK(euler_characteristic(fixtures::icosphere(3, 0.4)) == 2);
  CHECK(euler_characteristic(fixtures::cube(Vec3::Zero(), 0.5)) == 2);
  CHECK(euler_characteristic(fixtures::torus(0.3, 0.1, 24, 16)) == 0);
}

TEST_CASE("normalization transform inverse is identity to 1e-12") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    NormalizationTransform t;
    t.scale = rng.uniform(1e-3, 1e3);
    t.translation = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    CHECK((t.apply_inverse(t.apply(p)) - p).norm() <= 1e-12 * (1.0 + p.norm()));
  }
}

}  // TEST_SUITE
