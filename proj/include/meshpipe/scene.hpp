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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "meshpipe/mesh.hpp"

namespace meshpipe {

struct Placement {
  std::string asset;            // mesh reference, resolved by the asset store
  Vec3 translate = Vec3::Zero();
  double yaw = 0.0;             // radians about +z
  double scale = 1.0;           // uniform, > 0
  std::optional<Aabb> target_aabb;  // overrides translation/scale when set
};

struct SceneLayout {
  double ground = 0.0;
  std::vector<Placement> placements;
};

struct ComposedScene {
  struct Instance {
    TriangleMesh mesh;
    std::string asset;       // provenance
    Vec3 translate;          // final transform: scale -> yaw -> translate
    double yaw = 0.0;
    double scale = 1.0;
  };
  std::vector<Instance> instances;

  Aabb bounds() const;
};

struct CollisionReport {
  std::vector<std::pair<int, int>> resolved_pairs;
  std::vector<std::pair<int, int>> unresolved_pairs;  // iteration cap reached
  int iterations = 0;
};

using AssetStore = std::function<TriangleMesh(const std::string&)>;

/// Layout JSON: {"ground": float, "placements": [{"asset": path,
/// "translate": [x,y,z], "yaw": f, "scale": f, "aabb"?: {"min": [...],
/// "max": [...]}}]}. Errors carry JSON pointer paths.
SceneLayout load_layout_json(const std::string& path);

/// Transform order scale -> yaw -> translate; a target AABB rescales the
/// asset uniformly to the largest fit and centers it in the box.
ComposedScene place_assets(const SceneLayout& layout, const AssetStore& assets);

/// Separates overlapping instance AABBs along the minimum-penetration
/// horizontal axis (x or y), moving the smaller-volume instance, until every
/// pair clears min_gap or the iteration cap hits.
ComposedScene resolve_collisions(const ComposedScene& scene, double min_gap,
                                 int max_iters, CollisionReport* report = nullptr);

/// Drops every instance vertically so its AABB minimum z sits on the ground.
ComposedScene align_to_ground(const ComposedScene& scene, double ground_height);

/// One OBJ with an `o instance_k` group per instance, plus a JSON manifest
/// of final transforms.
void export_scene_obj(const ComposedScene& scene, const std::string& obj_path,
                      const std::string& manifest_path);

}  // namespace meshpipe
