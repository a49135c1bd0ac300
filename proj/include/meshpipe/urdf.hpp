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

#include <string>
#include <vector>

#include "meshpipe/articulate.hpp"

namespace meshpipe {

/// Writes well-formed URDF: one link per part ("part_k") with inertial and
/// visual/collision mesh references, one joint per edge
/// ("joint_parent_child") with type, axis, origin, and limits for
/// revolute/prismatic joints. Mesh files must exist.
void export_urdf(const KinematicGraph& graph, const std::vector<PhysicalProps>& props,
                 const std::vector<std::string>& mesh_files,
                 const std::string& path, const std::string& robot_name = "asset");

struct UrdfModel {
  KinematicGraph graph;
  std::vector<PhysicalProps> props;       // inertia as read (diagonal part)
  std::vector<std::string> mesh_files;
  std::string robot_name;
};

/// Reads URDF written by export_urdf (deterministic names part_k). Axes and
/// limits round-trip to full double precision.
UrdfModel read_urdf(const std::string& path);

}  // namespace meshpipe
