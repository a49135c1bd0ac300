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
#include <string>
#include <vector>

#include "meshpipe/mesh.hpp"

namespace meshpipe {

/// On-surface points with their source faces.
struct PointCloudSample {
  std::vector<Vec3> points;
  std::vector<int> source_face;
  std::vector<Vec3> normals;  // face normals at the samples

  std::size_t size() const { return points.size(); }
  void save_points(const std::string& path) const;  // "x y z face" per line
  static PointCloudSample load_points(const std::string& path);
};

struct ScoredPointMask {
  std::vector<std::uint8_t> membership;  // over the point cloud
  double score = 0.0;
  int prompt_index = -1;

  std::size_t member_count() const;
};

inline constexpr int kUnlabeled = -1;

struct PartLabeling {
  std::vector<int> face_part;  // kUnlabeled or part id
  int part_count = 0;

  bool complete() const;
  std::string to_json() const;
};

/// Area-proportional surface sampling, deterministic for a fixed seed.
PointCloudSample sample_surface(const TriangleMesh& mesh, int count,
                                std::uint64_t seed);

/// Point-set IoU of two masks over the same cloud.
double mask_iou(const ScoredPointMask& a, const ScoredPointMask& b);

/// Greedy non-maximum suppression: sort by score descending (stable), keep a
/// mask iff its IoU with every kept mask is <= threshold.
std::vector<ScoredPointMask> mask_nms(const std::vector<ScoredPointMask>& masks,
                                      double iou_threshold);

/// Majority vote of sample memberships per face; ties go to the
/// higher-scoring (earlier) mask; faces without samples or votes stay
/// unlabeled.
PartLabeling project_to_faces(const std::vector<ScoredPointMask>& kept_masks,
                              const PointCloudSample& sample,
                              const TriangleMesh& mesh);

struct PropagateReport {
  std::vector<int> fresh_components;  // components that had no labeled face
};

/// Multi-source shortest path over the face-adjacency graph weighted by
/// centroid distance; ties broken by smaller part id. Components without any
/// label get a fresh part id (reported).
PartLabeling propagate_labels(const PartLabeling& partial, const TriangleMesh& mesh,
                              PropagateReport* report = nullptr);

/// One compact mesh per part id; faces partition the input bijectively.
std::vector<TriangleMesh> split_parts(const PartLabeling& labeling,
                                      const TriangleMesh& mesh);

/// Masks file: {"points_file": str, "masks": [{"score": float,
/// "indices": [int...]}]}. Indices refer to the sampled point cloud.
std::vector<ScoredPointMask> load_masks_json(const std::string& path,
                                             std::size_t point_count);
void save_masks_json(const std::vector<ScoredPointMask>& masks,
                     const std::string& points_file, const std::string& path);

}  // namespace meshpipe
