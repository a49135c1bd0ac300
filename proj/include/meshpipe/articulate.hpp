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

#include <memory>
#include <string>
#include <vector>

#include "meshpipe/bvh.hpp"
#include "meshpipe/mesh.hpp"
#include "meshpipe/render.hpp"

namespace meshpipe {

enum class JointType { Fixed, Revolute, Prismatic };

std::string joint_type_name(JointType t);
JointType joint_type_from_name(const std::string& name);

/// A candidate articulation axis produced by one of the geometric operators:
///   a — child OBB principal axes through the OBB center
///   b — child OBB edge lines near the parent (hinge-like)
///   c — principal axis of the contact-region point set
///   d — contact-region normal direction
struct JointCandidate {
  JointType type = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();     // unit length
  Vec3 origin = Vec3::Zero();    // point on the axis
  char generator = 'a';
  double geometric_score = 0.0;  // in [0, 1]
};

struct Joint {
  JointType type = JointType::Fixed;
  Vec3 axis = Vec3::UnitZ();
  Vec3 origin = Vec3::Zero();
  double lower = 0.0;  // radians or world units
  double upper = 0.0;
};

struct KinematicGraph {
  struct Edge {
    int parent = 0;
    int child = 0;
    Joint joint;
    bool fitted = true;  // false when no motion targets were available
  };
  int node_count = 0;
  int root = 0;
  std::vector<Edge> edges;
};

struct PhysicalProps {
  double mass = 0.0;              // kg
  double friction = 0.5;
  Vec3 centroid = Vec3::Zero();
  Vec3 inertia_diagonal = Vec3::Zero();  // principal moments about centroid
  Mat3 principal_axes = Mat3::Identity();  // columns, right-handed
};

/// Oriented bounding box from the surface PCA of a mesh.
struct Obb {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns are the principal directions
  Vec3 half_extents = Vec3::Zero();
};
Obb compute_obb(const TriangleMesh& mesh);

struct PartGrouping {
  struct Contact {
    int a = 0, b = 0;        // a < b
    double min_distance = 0.0;
    double contact_area = 0.0;
  };
  int part_count = 0;
  int root = 0;                               // largest AABB volume
  std::vector<Contact> contacts;              // adjacent pairs only
  std::vector<std::pair<int, int>> tree_edges;  // (parent, child)
  std::vector<int> disconnected;              // fall back to fixed joints
};

/// Adjacency by surface distance <= contact_tolerance; spanning tree by
/// maximum contact area from the root.
PartGrouping group_parts(const std::vector<TriangleMesh>& parts,
                         double contact_tolerance);

std::vector<JointCandidate> generate_axis_candidates(const TriangleMesh& child,
                                                     const TriangleMesh& parent,
                                                     double contact_tolerance);

/// Chooses a candidate and its joint type given rendered views.
class Adjudicator {
 public:
  struct Decision {
    int index = 0;
    JointType type = JointType::Revolute;
  };
  virtual ~Adjudicator() = default;
  virtual Decision choose(const std::vector<JointCandidate>& candidates,
                          const std::vector<std::string>& view_files) = 0;
};

/// Max geometric score; ties by generator priority b > c > d > a, then lower
/// index. Joint type is the candidate's own.
class HeuristicAdjudicator : public Adjudicator {
 public:
  Decision choose(const std::vector<JointCandidate>& candidates,
                  const std::vector<std::string>& view_files) override;
};

/// Runs a command, writing {candidates:[{type,axis,origin,score,tag}],
/// views:[...]} to its stdin and reading {index, joint_type} from stdout.
/// Protocol violations raise AdjudicatorError.
class ExternalAdjudicator : public Adjudicator {
 public:
  explicit ExternalAdjudicator(std::string command) : command_(std::move(command)) {}
  Decision choose(const std::vector<JointCandidate>& candidates,
                  const std::vector<std::string>& view_files) override;

 private:
  std::string command_;
};

/// Validates the decision (index in range) and returns the chosen candidate
/// with the assigned type applied.
JointCandidate adjudicate(const std::vector<JointCandidate>& candidates,
                          const std::vector<std::string>& view_files,
                          Adjudicator& adjudicator);

/// Child pose at parameter theta: rotation about the candidate axis through
/// its origin (revolute) or translation along the axis (prismatic).
TriangleMesh transform_with_joint(const TriangleMesh& child,
                                  const JointCandidate& joint, double theta);

struct MotionFit {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> per_frame;      // fitted parameter per target frame
  std::vector<double> per_frame_iou;  // objective at the optimum
  std::vector<bool> unreliable;       // IoU below 0.5
};

/// Per-frame silhouette-IoU maximization: 65-sample coarse sweep over the
/// search interval (revolute [-pi, pi], prismatic +-parent AABB diagonal),
/// then golden-section refinement to 1e-3 parameter resolution.
MotionFit fit_motion_range(const TriangleMesh& parent, const TriangleMesh& child,
                           const JointCandidate& joint,
                           const std::vector<RasterImage>& targets,
                           const Camera& camera);

/// Mass from the divergence-theorem volume, solid uniform-density inertia
/// about the centroid, diagonalized. Requires a watertight part.
PhysicalProps assign_physical_props(const TriangleMesh& part, double density,
                                    double friction);

/// Validates the edges form a tree over [0, part_count) rooted at root;
/// throws listing a cycle otherwise.
KinematicGraph build_kinematic_graph(int part_count, int root,
                                     std::vector<KinematicGraph::Edge> edges);

}  // namespace meshpipe
