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

#include "meshpipe/articulate.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "meshpipe/parts.hpp"

namespace meshpipe {

std::string joint_type_name(JointType t) {
  switch (t) {
    case JointType::Fixed: return "fixed";
    case JointType::Revolute: return "revolute";
    case JointType::Prismatic: return "prismatic";
  }
  return "fixed";
}

JointType joint_type_from_name(const std::string& name) {
  if (name == "fixed") return JointType::Fixed;
  if (name == "revolute") return JointType::Revolute;
  if (name == "prismatic") return JointType::Prismatic;
  throw ValidationError("unknown joint type '" + name + "'");
}

Obb compute_obb(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) throw ValidationError("cannot fit OBB to empty mesh");
  double total_area = 0.0;
  Vec3 mean = Vec3::Zero();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    double a = mesh.face_area(f);
    mean += a * mesh.face_centroid(f);
    total_area += a;
  }
  Obb obb;
  if (total_area > 0.0) mean /= total_area;
  // Exact surface second moments: int_T x x^T dA =
  // A/12 (sum p_i p_i^T + (sum p_i)(sum p_i)^T).
  Mat3 cov = Mat3::Zero();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    double a = mesh.face_area(f);
    Vec3 p = mesh.vertices[mesh.faces[f][0]] - mean;
    Vec3 q = mesh.vertices[mesh.faces[f][1]] - mean;
    Vec3 r = mesh.vertices[mesh.faces[f][2]] - mean;
    Vec3 s = p + q + r;
    cov += (a / 12.0) * (p * p.transpose() + q * q.transpose() +
                         r * r.transpose() + s * s.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eigen(cov);
  // Largest variance first, right-handed.
  Mat3 axes = eigen.eigenvectors().rowwise().reverse().eval();
  if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);
  obb.axes = axes;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& v : mesh.vertices) {
    Vec3 local = axes.transpose() * (v - mean);
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }
  obb.half_extents = 0.5 * (hi - lo);
  obb.center = mean + axes * (0.5 * (hi + lo));
  return obb;
}

PartGrouping group_parts(const std::vector<TriangleMesh>& parts,
                         double contact_tolerance) {
  if (parts.empty()) throw ValidationError("group_parts needs at least one part");
  PartGrouping grouping;
  grouping.part_count = int(parts.size());

  std::vector<MeshBvh> bvhs;
  bvhs.reserve(parts.size());
  for (const auto& p : parts) bvhs.emplace_back(p);

  // Root: largest axis-aligned bounding volume (ties to lower id).
  double best_volume = -1.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    double v = parts[i].bounds().volume();
    if (v > best_volume) {
      best_volume = v;
      grouping.root = int(i);
    }
  }

  auto contact_area = [&](int a, int b) {
    double area = 0.0;
    for (int side = 0; side < 2; ++side) {
      const TriangleMesh& from = parts[std::size_t(side ? b : a)];
      const TriangleMesh& other = parts[std::size_t(side ? a : b)];
      const MeshBvh& other_bvh = bvhs[std::size_t(side ? a : b)];
      for (std::size_t f = 0; f < from.faces.size(); ++f) {
        ClosestHit hit = other_bvh.closest_point(other, from.face_centroid(f));
        if (std::sqrt(hit.squared_distance) <= contact_tolerance)
          area += from.face_area(f);
      }
    }
    return area;
  };

  for (int a = 0; a < grouping.part_count; ++a)
    for (int b = a + 1; b < grouping.part_count; ++b) {
      double dist = MeshBvh::surface_distance(bvhs[std::size_t(a)],
                                              parts[std::size_t(a)],
                                              bvhs[std::size_t(b)],
                                              parts[std::size_t(b)]);
      if (dist <= contact_tolerance)
        grouping.contacts.push_back({a, b, dist, contact_area(a, b)});
    }

  // Maximum-contact-area spanning tree grown from the root.
  std::vector<char> in_tree(parts.size(), 0);
  in_tree[std::size_t(grouping.root)] = 1;
  for (;;) {
    int best_a = -1, best_b = -1;
    double best_area = -1.0;
    for (const auto& c : grouping.contacts) {
      bool a_in = in_tree[std::size_t(c.a)], b_in = in_tree[std::size_t(c.b)];
      if (a_in == b_in) continue;
      int parent = a_in ? c.a : c.b;
      int child = a_in ? c.b : c.a;
      if (c.contact_area > best_area ||
          (c.contact_area == best_area &&
           std::minmax(parent, child) < std::minmax(best_a, best_b))) {
        best_area = c.contact_area;
        best_a = parent;
        best_b = child;
      }
    }
    if (best_a < 0) break;
    grouping.tree_edges.emplace_back(best_a, best_b);
    in_tree[std::size_t(best_b)] = 1;
  }
  for (int i = 0; i < grouping.part_count; ++i)
    if (!in_tree[std::size_t(i)]) grouping.disconnected.push_back(i);
  return grouping;
}

namespace {

double line_angle(const Vec3& a, const Vec3& b) {
  double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c);
}

double point_line_distance(const Vec3& p, const Vec3& origin, const Vec3& axis) {
  return (p - origin - axis * axis.dot(p - origin)).norm();
}

}  // namespace

std::vector<JointCandidate> generate_axis_candidates(const TriangleMesh& child,
                                                     const TriangleMesh& parent,
                                                     double contact_tolerance) {
  MeshBvh parent_bvh(parent);
  Obb obb = compute_obb(child);

  // Contact region: child surface samples within tolerance of the parent.
  PointCloudSample samples = sample_surface(child, 2048, 7);
  std::vector<Vec3> contact_points;
  Vec3 contact_normal = Vec3::Zero();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ClosestHit hit = parent_bvh.closest_point(parent, samples.points[i]);
    if (std::sqrt(hit.squared_distance) <= contact_tolerance) {
      contact_points.push_back(samples.points[i]);
      contact_normal += samples.normals[i];
    }
  }
  const bool has_contact = !contact_points.empty();
  Vec3 contact_centroid = Vec3::Zero();
  for (const auto& p : contact_points) contact_centroid += p;
  if (has_contact) contact_centroid /= double(contact_points.size());

  auto proximity_score = [&](const Vec3& origin, const Vec3& axis) {
    if (!has_contact) return 0.0;
    double d = point_line_distance(contact_centroid, origin, axis);
    return 1.0 / (1.0 + d / contact_tolerance);
  };

  std::vector<JointCandidate> pool;
  // (a) OBB principal axes through the center, both joint types.
  for (int k = 0; k < 3; ++k) {
    Vec3 axis = obb.axes.col(k);
    for (JointType type : {JointType::Prismatic, JointType::Revolute}) {
      JointCandidate c;
      c.type = type;
      c.axis = axis;
      c.origin = obb.center;
      c.generator = 'a';
      c.geometric_score = proximity_score(obb.center, axis);
      pool.push_back(c);
    }
  }
  // (b) OBB edge lines near the parent (hinge-like).
  for (int k = 0; k < 3; ++k) {
    int i = (k + 1) % 3, j = (k + 2) % 3;
    for (int si = -1; si <= 1; si += 2)
      for (int sj = -1; sj <= 1; sj += 2) {
        Vec3 mid = obb.center + si * obb.half_extents[i] * obb.axes.col(i) +
                   sj * obb.half_extents[j] * obb.axes.col(j);
        Vec3 axis = obb.axes.col(k);
        // Distance from the edge segment to the parent, sampled.
        double best = std::numeric_limits<double>::infinity();
        for (int t = 0; t <= 8; ++t) {
          double s = (t / 8.0 * 2.0 - 1.0) * obb.half_extents[k];
          ClosestHit hit = parent_bvh.closest_point(parent, mid + s * axis);
          best = std::min(best, std::sqrt(hit.squared_distance));
        }
        if (best > 2.0 * contact_tolerance) continue;
        JointCandidate c;
        c.type = JointType::Revolute;
        c.axis = axis;
        c.origin = mid;
        c.generator = 'b';
        c.geometric_score = proximity_score(mid, axis);
        pool.push_back(c);
      }
  }
  if (has_contact) {
    // (c) principal axis of the contact-region point set.
    if (contact_points.size() >= 2) {
      Mat3 cov = Mat3::Zero();
      for (const auto& p : contact_points) {
        Vec3 d = p - contact_centroid;
        cov += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Mat3> eigen(cov);
      if (eigen.eigenvalues()(2) > 0.0) {
        JointCandidate c;
        c.type = JointType::Revolute;
        c.axis = eigen.eigenvectors().col(2).normalized();
        c.origin = contact_centroid;
        c.generator = 'c';
        c.geometric_score = proximity_score(contact_centroid, c.axis);
        pool.push_back(c);
      }
    }
    // (d) contact-region normal direction.
    if (contact_normal.norm() > 1e-12) {
      JointCandidate c;
      c.type = JointType::Prismatic;
      c.axis = contact_normal.normalized();
      c.origin = contact_centroid;
      c.generator = 'd';
      c.geometric_score = proximity_score(contact_centroid, c.axis);
      pool.push_back(c);
    }
  }

  // Deduplicate: same type, axes within 5 degrees, and (for revolute) origin
  // within contact_tolerance of the kept axis line. Higher score wins.
  const double angle_tol = 5.0 * M_PI / 180.0;
  std::vector<JointCandidate> kept;
  for (const auto& cand : pool) {
    bool merged = false;
    for (auto& k : kept) {
      if (k.type != cand.type) continue;
      if (line_angle(k.axis, cand.axis) >= angle_tol) continue;
      if (cand.type == JointType::Revolute &&
          point_line_distance(cand.origin, k.origin, k.axis) >= contact_tolerance)
        continue;
      if (cand.geometric_score > k.geometric_score) k = cand;
      merged = true;
      break;
    }
    if (!merged) kept.push_back(cand);
  }
  return kept;
}

Adjudicator::Decision HeuristicAdjudicator::choose(
    const std::vector<JointCandidate>& candidates,
    const std::vector<std::string>& /*view_files*/) {
  if (candidates.empty()) throw StageError("adjudicator called with empty pool");
  auto priority = [](char generator) {
    switch (generator) {
      case 'b': return 0;
      case 'c': return 1;
      case 'd': return 2;
      default: return 3;  // 'a'
    }
  };
  int best = 0;
  for (int i = 1; i < int(candidates.size()); ++i) {
    const auto& a = candidates[std::size_t(i)];
    const auto& b = candidates[std::size_t(best)];
    if (a.geometric_score > b.geometric_score ||
        (a.geometric_score == b.geometric_score &&
         priority(a.generator) < priority(b.generator)))
      best = i;
  }
  return {best, candidates[std::size_t(best)].type};
}

namespace {

// Bidirectional pipe exchange with a shell command.
std::string run_process(const std::string& command, const std::string& input) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw AdjudicatorError("cannot create pipes for adjudicator");
  pid_t pid = fork();
  if (pid < 0) throw AdjudicatorError("cannot fork adjudicator process");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]); close(in_pipe[1]);
    close(out_pipe[0]); close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  std::size_t off = 0;
  while (off < input.size()) {
    ssize_t n = write(in_pipe[1], input.data() + off, input.size() - off);
    if (n <= 0) break;
    off += std::size_t(n);
  }
  close(in_pipe[1]);
  std::string output;
  char buf[4096];
  for (;;) {
    ssize_t n = read(out_pipe[0], buf, sizeof(buf));
    if (n <= 0) break;
    output.append(buf, std::size_t(n));
  }
  close(out_pipe[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw AdjudicatorError("adjudicator command failed: " + command);
  return output;
}

}  // namespace

Adjudicator::Decision ExternalAdjudicator::choose(
    const std::vector<JointCandidate>& candidates,
    const std::vector<std::string>& view_files) {
  nlohmann::json request;
  request["candidates"] = nlohmann::json::array();
  for (const auto& c : candidates) {
    nlohmann::json j;
    j["type"] = joint_type_name(c.type);
    j["axis"] = {c.axis.x(), c.axis.y(), c.axis.z()};
    j["origin"] = {c.origin.x(), c.origin.y(), c.origin.z()};
    j["score"] = c.geometric_score;
    j["tag"] = std::string(1, c.generator);
    request["candidates"].push_back(std::move(j));
  }
  request["views"] = view_files;

  std::string reply = run_process(command_, request.dump());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception& e) {
    throw AdjudicatorError(std::string("adjudicator reply is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("index") || !doc.contains("joint_type"))
    throw AdjudicatorError("adjudicator reply missing index/joint_type");
  Decision d;
  d.index = doc["index"].get<int>();
  try {
    d.type = joint_type_from_name(doc["joint_type"].get<std::string>());
  } catch (const ValidationError& e) {
    throw AdjudicatorError(e.what());
  }
  return d;
}

JointCandidate adjudicate(const std::vector<JointCandidate>& candidates,
                          const std::vector<std::string>& view_files,
                          Adjudicator& adjudicator) {
  if (candidates.empty()) throw StageError("cannot adjudicate an empty pool");
  Adjudicator::Decision d = adjudicator.choose(candidates, view_files);
  if (d.index < 0 || d.index >= int(candidates.size()))
    throw AdjudicatorError("adjudicator chose index " + std::to_string(d.index) +
                           " of " + std::to_string(candidates.size()));
  JointCandidate chosen = candidates[std::size_t(d.index)];
  chosen.type = d.type;
  return chosen;
}

TriangleMesh transform_with_joint(const TriangleMesh& child,
                                  const JointCandidate& joint, double theta) {
  TriangleMesh out = child;
  if (joint.type == JointType::Prismatic) {
    Vec3 offset = theta * joint.axis;
    for (auto& v : out.vertices) v += offset;
  } else {
    Mat3 rot = Eigen::AngleAxisd(theta, joint.axis.normalized()).toRotationMatrix();
    for (auto& v : out.vertices) v = joint.origin + rot * (v - joint.origin);
  }
  return out;
}

namespace {

TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh out = a;
  int offset = int(out.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& f : b.faces)
    out.faces.emplace_back(f[0] + offset, f[1] + offset, f[2] + offset);
  return out;
}

}  // namespace

MotionFit fit_motion_range(const TriangleMesh& parent, const TriangleMesh& child,
                           const JointCandidate& joint,
                           const std::vector<RasterImage>& targets,
                           const Camera& camera) {
  if (targets.empty()) throw ValidationError("fit_motion_range needs targets");
  const int sweep_samples = 65;
  double lo, hi;
  if (joint.type == JointType::Prismatic) {
    double d = parent.bounds().diagonal();
    lo = -d;
    hi = d;
  } else {
    lo = -M_PI;
    hi = M_PI;
  }

  MotionFit fit;
  fit.per_frame.resize(targets.size());
  fit.per_frame_iou.resize(targets.size());
  fit.unreliable.resize(targets.size());

  auto objective = [&](double theta, const RasterImage& target) {
    TriangleMesh scene = merge_meshes(parent, transform_with_joint(child, joint, theta));
    return silhouette_iou(rasterize(scene, camera), target);
  };

  parallel_for(std::int64_t(targets.size()), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t frame = begin; frame < end; ++frame) {
      const RasterImage& target = targets[std::size_t(frame)];
      double best_theta = lo, best_value = -1.0;
      const double step = (hi - lo) / (sweep_samples - 1);
      for (int s = 0; s < sweep_samples; ++s) {
        double theta = lo + s * step;
        double value = objective(theta, target);
        if (value > best_value) {
          best_value = value;
          best_theta = theta;
        }
      }
      // Golden-section refinement on the bracketing interval.
      double a = std::max(lo, best_theta - step);
      double b = std::min(hi, best_theta + step);
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double c = b - gr * (b - a);
      double d = a + gr * (b - a);
      double fc = objective(c, target), fd = objective(d, target);
      while (b - a > 1e-3) {
        if (fc >= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = objective(c, target);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = objective(d, target);
        }
      }
      double theta = 0.5 * (a + b);
      double value = objective(theta, target);
      if (best_value > value) {
        theta = best_theta;
        value = best_value;
      }
      fit.per_frame[std::size_t(frame)] = theta;
      fit.per_frame_iou[std::size_t(frame)] = value;
      fit.unreliable[std::size_t(frame)] = value < 0.5;
    }
  }, 1);

  fit.lower = *std::min_element(fit.per_frame.begin(), fit.per_frame.end());
  fit.upper = *std::max_element(fit.per_frame.begin(), fit.per_frame.end());
  return fit;
}

PhysicalProps assign_physical_props(const TriangleMesh& part, double density,
                                    double friction) {
  if (!(density > 0.0)) throw ValidationError("density must be positive");
  TriangleMesh copy = part;
  ValidationReport report = validate(copy);
  if (!report.watertight)
    throw StageError("part is not watertight; volume is ill-defined (remesh first)");

  // Exact polyhedral volume integrals (divergence theorem per triangle).
  double i0 = 0, ix = 0, iy = 0, iz = 0, ixx = 0, iyy = 0, izz = 0, ixy = 0,
         iyz = 0, izx = 0;
  for (const auto& tri : copy.faces) {
    const Vec3& p0 = copy.vertices[tri[0]];
    const Vec3& p1 = copy.vertices[tri[1]];
    const Vec3& p2 = copy.vertices[tri[2]];
    double det = p0.dot(p1.cross(p2));  // 6 * signed tet volume
    i0 += det;
    for (int k = 0; k < 3; ++k) {
      double s1 = p0[k] + p1[k] + p2[k];
      double sq = p0[k] * p0[k] + p1[k] * p1[k] + p2[k] * p2[k] +
                  p0[k] * p1[k] + p1[k] * p2[k] + p2[k] * p0[k];
      (k == 0 ? ix : k == 1 ? iy : iz) += det * s1;
      (k == 0 ? ixx : k == 1 ? iyy : izz) += det * sq;
    }
    auto mixed = [&](int u, int v) {
      return det * (2.0 * (p0[u] * p0[v] + p1[u] * p1[v] + p2[u] * p2[v]) +
                    p0[u] * p1[v] + p1[u] * p0[v] + p1[u] * p2[v] +
                    p2[u] * p1[v] + p2[u] * p0[v] + p0[u] * p2[v]);
    };
    ixy += mixed(0, 1);
    iyz += mixed(1, 2);
    izx += mixed(2, 0);
  }
  double volume = i0 / 6.0;
  if (volume < 0.0) {
    volume = -volume;
    ix = -ix; iy = -iy; iz = -iz;
    ixx = -ixx; iyy = -iyy; izz = -izz;
    ixy = -ixy; iyz = -iyz; izx = -izx;
  }
  if (!(volume > 1e-18))
    throw StageError("part has zero volume; physical properties undefined");
  // Normalization constants: int x dV = ix/24, int x^2 dV = ixx/60,
  // int xy dV = ixy/120 over the tetrahedra fan.
  Vec3 com(ix / 24.0 / volume, iy / 24.0 / volume, iz / 24.0 / volume);
  double mass = density * volume;
  double Ixx = density * (iyy + izz) / 60.0 -
               mass * (com.y() * com.y() + com.z() * com.z());
  double Iyy = density * (ixx + izz) / 60.0 -
               mass * (com.x() * com.x() + com.z() * com.z());
  double Izz = density * (ixx + iyy) / 60.0 -
               mass * (com.x() * com.x() + com.y() * com.y());
  double Ixy = -(density * ixy / 120.0 - mass * com.x() * com.y());
  double Iyz = -(density * iyz / 120.0 - mass * com.y() * com.z());
  double Izx = -(density * izx / 120.0 - mass * com.z() * com.x());

  Mat3 inertia;
  inertia << Ixx, Ixy, Izx,
             Ixy, Iyy, Iyz,
             Izx, Iyz, Izz;
  Eigen::SelfAdjointEigenSolver<Mat3> eigen(inertia);

  PhysicalProps props;
  props.mass = mass;
  props.friction = friction;
  props.centroid = com;
  props.inertia_diagonal = eigen.eigenvalues();
  props.principal_axes = eigen.eigenvectors();
  if (props.principal_axes.determinant() < 0.0)
    props.principal_axes.col(2) = -props.principal_axes.col(2);
  if ((props.inertia_diagonal.array() <= 0.0).any())
    throw StageError("degenerate inertia tensor");
  return props;
}

KinematicGraph build_kinematic_graph(int part_count, int root,
                                     std::vector<KinematicGraph::Edge> edges) {
  if (part_count < 1) throw ValidationError("graph needs at least one part");
  if (root < 0 || root >= part_count) throw ValidationError("root id out of range");
  std::vector<int> parent_of(std::size_t(part_count), -1);
  for (const auto& e : edges) {
    if (e.parent < 0 || e.parent >= part_count || e.child < 0 ||
        e.child >= part_count)
      throw ValidationError("graph edge references unknown part");
    if (e.child == root) throw ValidationError("root cannot be a child");
    if (e.joint.lower > e.joint.upper)
      throw ValidationError("joint limits must satisfy lower <= upper");
    if (e.joint.type == JointType::Revolute &&
        (e.joint.lower < -2.0 * M_PI || e.joint.upper > 2.0 * M_PI))
      throw ValidationError("revolute limits must lie within [-2pi, 2pi]");
    if (parent_of[std::size_t(e.child)] != -1)
      throw ValidationError("part " + std::to_string(e.child) +
                            " has multiple parents");
    parent_of[std::size_t(e.child)] = e.parent;
  }
  // Walk each node toward the root; revisiting a node on the same walk is a
  // cycle.
  for (int start = 0; start < part_count; ++start) {
    std::vector<char> on_path(std::size_t(part_count), 0);
    std::vector<int> path;
    int cur = start;
    while (cur != -1 && parent_of[std::size_t(cur)] != -1) {
      if (on_path[std::size_t(cur)]) {
        std::ostringstream os;
        os << "kinematic cycle:";
        bool in_cycle = false;
        for (int p : path) {
          if (p == cur) in_cycle = true;
          if (in_cycle) os << " part_" << p;
        }
        os << " part_" << cur;
        throw ValidationError(os.str());
      }
      on_path[std::size_t(cur)] = 1;
      path.push_back(cur);
      cur = parent_of[std::size_t(cur)];
    }
  }
  KinematicGraph graph;
  graph.node_count = part_count;
  graph.root = root;
  graph.edges = std::move(edges);
  return graph;
}

}  // namespace meshpipe
