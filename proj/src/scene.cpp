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

#include "meshpipe/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace meshpipe {

Aabb ComposedScene::bounds() const {
  Aabb box;
  for (const auto& inst : instances) box.expand(inst.mesh.bounds());
  return box;
}

SceneLayout load_layout_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  auto fail = [&](const std::string& pointer, const std::string& what) -> void {
    throw ValidationError(path + ": " + pointer + ": " + what);
  };
  if (!doc.is_object()) fail("/", "expected an object");
  SceneLayout layout;
  layout.ground = doc.value("ground", 0.0);
  if (!doc.contains("placements") || !doc["placements"].is_array())
    fail("/placements", "expected an array");
  std::size_t idx = 0;
  for (const auto& p : doc["placements"]) {
    std::string at = "/placements/" + std::to_string(idx++);
    if (!p.is_object()) fail(at, "expected an object");
    Placement placement;
    if (!p.contains("asset") || !p["asset"].is_string())
      fail(at + "/asset", "expected a string");
    placement.asset = p["asset"].get<std::string>();
    if (p.contains("translate")) {
      const auto& t = p["translate"];
      if (!t.is_array() || t.size() != 3) fail(at + "/translate", "expected [x,y,z]");
      placement.translate = Vec3(t[0].get<double>(), t[1].get<double>(),
                                 t[2].get<double>());
    }
    placement.yaw = p.value("yaw", 0.0);
    placement.scale = p.value("scale", 1.0);
    if (!(placement.scale > 0.0)) fail(at + "/scale", "must be positive");
    if (p.contains("aabb")) {
      const auto& box = p["aabb"];
      if (!box.is_object() || !box.contains("min") || !box.contains("max") ||
          !box["min"].is_array() || box["min"].size() != 3 ||
          !box["max"].is_array() || box["max"].size() != 3)
        fail(at + "/aabb", "expected {min:[...], max:[...]}");
      Aabb target;
      target.min = Vec3(box["min"][0].get<double>(), box["min"][1].get<double>(),
                        box["min"][2].get<double>());
      target.max = Vec3(box["max"][0].get<double>(), box["max"][1].get<double>(),
                        box["max"][2].get<double>());
      if ((target.extent().array() <= 0.0).any())
        fail(at + "/aabb", "box must have positive extent");
      placement.target_aabb = target;
    }
    layout.placements.push_back(std::move(placement));
  }
  return layout;
}

namespace {

TriangleMesh transform_mesh(const TriangleMesh& mesh, double scale, double yaw,
                            const Vec3& translate) {
  TriangleMesh out = mesh;
  const double c = std::cos(yaw), s = std::sin(yaw);
  for (auto& v : out.vertices) {
    Vec3 p = scale * v;
    p = Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
    v = p + translate;
  }
  return out;
}

}  // namespace

ComposedScene place_assets(const SceneLayout& layout, const AssetStore& assets) {
  ComposedScene scene;
  for (const auto& placement : layout.placements) {
    TriangleMesh asset = assets(placement.asset);
    ComposedScene::Instance inst;
    inst.asset = placement.asset;
    if (placement.target_aabb) {
      // Fit: largest uniform scale that fits the yawed asset in the box,
      // centered.
      TriangleMesh yawed = transform_mesh(asset, 1.0, placement.yaw, Vec3::Zero());
      Aabb bounds = yawed.bounds();
      Vec3 extent = bounds.extent();
      const Aabb& target = *placement.target_aabb;
      double scale = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a)
        if (extent[a] > 0.0) scale = std::min(scale, target.extent()[a] / extent[a]);
      if (!std::isfinite(scale))
        throw ValidationError("cannot fit zero-extent asset " + placement.asset);
      inst.scale = scale;
      inst.yaw = placement.yaw;
      inst.translate = target.center() - scale * bounds.center();
    } else {
      inst.scale = placement.scale;
      inst.yaw = placement.yaw;
      inst.translate = placement.translate;
    }
    inst.mesh = transform_mesh(asset, inst.scale, inst.yaw, inst.translate);
    scene.instances.push_back(std::move(inst));
  }
  return scene;
}

ComposedScene resolve_collisions(const ComposedScene& scene, double min_gap,
                                 int max_iters, CollisionReport* report) {
  ComposedScene out = scene;
  const std::size_t n = out.instances.size();
  std::vector<Aabb> boxes(n);
  std::vector<double> volumes(n);
  for (std::size_t i = 0; i < n; ++i) {
    boxes[i] = out.instances[i].mesh.bounds();
    volumes[i] = boxes[i].volume();
  }
  std::vector<Vec3> shifts(n, Vec3::Zero());
  CollisionReport local;
  CollisionReport& rep = report ? *report : local;

  auto gap_on_axis = [&](const Aabb& a, const Aabb& b, int axis) {
    return std::max(a.min[axis] - b.max[axis], b.min[axis] - a.max[axis]);
  };
  std::vector<std::pair<int, int>> touched;
  for (int iter = 0; iter < max_iters; ++iter) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        // Overlapping means every axis gap is below min_gap.
        double gx = gap_on_axis(boxes[i], boxes[j], 0);
        double gy = gap_on_axis(boxes[i], boxes[j], 1);
        double gz = gap_on_axis(boxes[i], boxes[j], 2);
        if (gx >= min_gap || gy >= min_gap || gz >= min_gap) continue;
        any = true;
        touched.emplace_back(int(i), int(j));
        int axis = (min_gap - gx) <= (min_gap - gy) ? 0 : 1;  // horizontal only
        std::size_t mover = volumes[i] <= volumes[j] ? i : j;
        std::size_t fixed = mover == i ? j : i;
        double needed = min_gap - gap_on_axis(boxes[mover], boxes[fixed], axis);
        double dir = boxes[mover].center()[axis] >= boxes[fixed].center()[axis]
                         ? 1.0 : -1.0;
        Vec3 shift = Vec3::Zero();
        shift[axis] = dir * needed;
        shifts[mover] += shift;
        boxes[mover].min += shift;
        boxes[mover].max += shift;
      }
    rep.iterations = iter + 1;
    if (!any) break;
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  rep.resolved_pairs = touched;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double gx = gap_on_axis(boxes[i], boxes[j], 0);
      double gy = gap_on_axis(boxes[i], boxes[j], 1);
      double gz = gap_on_axis(boxes[i], boxes[j], 2);
      if (gx < min_gap && gy < min_gap && gz < min_gap)
        rep.unresolved_pairs.emplace_back(int(i), int(j));
    }
  for (std::size_t i = 0; i < n; ++i) {
    if (shifts[i] == Vec3::Zero()) continue;
    for (auto& v : out.instances[i].mesh.vertices) v += shifts[i];
    out.instances[i].translate += shifts[i];
  }
  return out;
}

ComposedScene align_to_ground(const ComposedScene& scene, double ground_height) {
  ComposedScene out = scene;
  for (auto& inst : out.instances) {
    Aabb box = inst.mesh.bounds();
    double dz = ground_height - box.min.z();
    if (dz == 0.0) continue;
    for (auto& v : inst.mesh.vertices) v.z() += dz;
    inst.translate.z() += dz;
  }
  return out;
}

void export_scene_obj(const ComposedScene& scene, const std::string& obj_path,
                      const std::string& manifest_path) {
  std::ofstream out(obj_path);
  if (!out) throw Error("cannot open " + obj_path + " for writing");
  char buf[128];
  int vertex_base = 1;
  for (std::size_t k = 0; k < scene.instances.size(); ++k) {
    const auto& inst = scene.instances[k];
    out << "o instance_" << k << '\n';
    for (const auto& v : inst.mesh.vertices) {
      std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
      out << buf;
    }
    for (const auto& f : inst.mesh.faces)
      out << "f " << f[0] + vertex_base << ' ' << f[1] + vertex_base << ' '
          << f[2] + vertex_base << '\n';
    vertex_base += int(inst.mesh.vertices.size());
  }
  if (!out) throw Error("write failure on " + obj_path);

  nlohmann::json manifest;
  manifest["instances"] = nlohmann::json::array();
  for (const auto& inst : scene.instances) {
    nlohmann::json j;
    j["asset"] = inst.asset;
    j["translate"] = {inst.translate.x(), inst.translate.y(), inst.translate.z()};
    j["yaw"] = inst.yaw;
    j["scale"] = inst.scale;
    manifest["instances"].push_back(std::move(j));
  }
  std::ofstream mout(manifest_path);
  if (!mout) throw Error("cannot open " + manifest_path + " for writing");
  mout << manifest.dump(2) << '\n';
  if (!mout) throw Error("write failure on " + manifest_path);
}

}  // namespace meshpipe
