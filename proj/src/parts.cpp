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

#include "meshpipe/parts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace meshpipe {

void PointCloudSample::save_points(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  char buf[200];
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d\n", points[i].x(),
                  points[i].y(), points[i].z(), source_face[i]);
    out << buf;
  }
  if (!out) throw Error("write failure on " + path);
}

PointCloudSample PointCloudSample::load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  PointCloudSample sample;
  double x, y, z;
  int face;
  while (in >> x >> y >> z >> face) {
    sample.points.emplace_back(x, y, z);
    sample.source_face.push_back(face);
  }
  return sample;
}

std::size_t ScoredPointMask::member_count() const {
  std::size_t n = 0;
  for (auto m : membership) n += m != 0;
  return n;
}

bool PartLabeling::complete() const {
  return std::none_of(face_part.begin(), face_part.end(),
                      [](int p) { return p == kUnlabeled; });
}

std::string PartLabeling::to_json() const {
  std::ostringstream os;
  os << "{\"part_count\":" << part_count << ",\"face_part\":[";
  for (std::size_t i = 0; i < face_part.size(); ++i) {
    if (i) os << ',';
    os << face_part[i];
  }
  os << "]}";
  return os.str();
}

PointCloudSample sample_surface(const TriangleMesh& mesh, int count,
                                std::uint64_t seed) {
  if (mesh.faces.empty()) throw ValidationError("cannot sample empty mesh");
  if (count < 1) throw ValidationError("sample count must be >= 1");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw ValidationError("mesh has zero surface area");

  Rng rng(seed);
  PointCloudSample sample;
  sample.points.reserve(std::size_t(count));
  sample.source_face.reserve(std::size_t(count));
  sample.normals.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    std::size_t f = std::min(std::size_t(it - cumulative.begin()),
                             mesh.faces.size() - 1);
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3i& tri = mesh.faces[f];
    Vec3 p = mesh.vertices[tri[0]] +
             u * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) +
             v * (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    sample.points.push_back(p);
    sample.source_face.push_back(int(f));
    sample.normals.push_back(mesh.face_normal(f));
  }
  return sample;
}

double mask_iou(const ScoredPointMask& a, const ScoredPointMask& b) {
  if (a.membership.size() != b.membership.size())
    throw ValidationError("mask IoU requires masks over the same point cloud");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.membership.size(); ++i) {
    bool ma = a.membership[i], mb = b.membership[i];
    inter += ma && mb;
    uni += ma || mb;
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::vector<ScoredPointMask> mask_nms(const std::vector<ScoredPointMask>& masks,
                                      double iou_threshold) {
  std::vector<int> order(masks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return masks[std::size_t(a)].score > masks[std::size_t(b)].score;
  });
  std::vector<ScoredPointMask> kept;
  for (int idx : order) {
    const auto& mask = masks[std::size_t(idx)];
    bool suppressed = false;
    for (const auto& k : kept)
      if (mask_iou(mask, k) > iou_threshold) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(mask);
  }
  return kept;
}

PartLabeling project_to_faces(const std::vector<ScoredPointMask>& kept_masks,
                              const PointCloudSample& sample,
                              const TriangleMesh& mesh) {
  PartLabeling labeling;
  labeling.face_part.assign(mesh.faces.size(), kUnlabeled);
  labeling.part_count = int(kept_masks.size());
  if (kept_masks.empty()) return labeling;

  // votes[face][mask]
  std::vector<std::vector<int>> votes(mesh.faces.size(),
                                      std::vector<int>(kept_masks.size(), 0));
  for (std::size_t p = 0; p < sample.size(); ++p) {
    int face = sample.source_face[p];
    if (face < 0 || face >= int(mesh.faces.size())) continue;
    for (std::size_t m = 0; m < kept_masks.size(); ++m)
      if (kept_masks[m].membership[p]) ++votes[std::size_t(face)][m];
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    int best = kUnlabeled, best_votes = 0;
    for (std::size_t m = 0; m < kept_masks.size(); ++m) {
      // Strict > keeps the earlier (higher-scoring) mask on ties.
      if (votes[f][m] > best_votes) {
        best_votes = votes[f][m];
        best = int(m);
      }
    }
    labeling.face_part[f] = best;
  }
  return labeling;
}

PartLabeling propagate_labels(const PartLabeling& partial, const TriangleMesh& mesh,
                              PropagateReport* report) {
  if (partial.face_part.size() != mesh.faces.size())
    throw ValidationError("labeling size does not match face count");
  PartLabeling out = partial;

  EdgeSet edges = build_edge_set(mesh);
  std::vector<std::vector<int>> adjacency(mesh.faces.size());
  for (const auto& e : edges.edges)
    for (std::size_t i = 0; i < e.incident_faces.size(); ++i)
      for (std::size_t j = i + 1; j < e.incident_faces.size(); ++j) {
        adjacency[std::size_t(e.incident_faces[i])].push_back(e.incident_faces[j]);
        adjacency[std::size_t(e.incident_faces[j])].push_back(e.incident_faces[i]);
      }

  // Components with no labeled face get a fresh id at their lowest face.
  {
    std::vector<int> component(mesh.faces.size(), -1);
    std::vector<int> stack;
    int n_components = 0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      if (component[f] >= 0) continue;
      int id = n_components++;
      stack.push_back(int(f));
      component[f] = id;
      while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (int nb : adjacency[std::size_t(cur)])
          if (component[std::size_t(nb)] < 0) {
            component[std::size_t(nb)] = id;
            stack.push_back(nb);
          }
      }
    }
    std::vector<char> has_label(std::size_t(n_components), 0);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
      if (out.face_part[f] != kUnlabeled) has_label[std::size_t(component[f])] = 1;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      int comp = component[f];
      if (!has_label[std::size_t(comp)]) {
        has_label[std::size_t(comp)] = 1;
        out.face_part[f] = out.part_count++;
        if (report) report->fresh_components.push_back(comp);
      }
    }
  }

  // Multi-source Dijkstra; ties by smaller part id for determinism.
  struct Entry {
    double dist;
    int part;
    int face;
    bool operator>(const Entry& o) const {
      if (dist != o.dist) return dist > o.dist;
      if (part != o.part) return part > o.part;
      return face > o.face;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::vector<double> distance(mesh.faces.size(),
                               std::numeric_limits<double>::infinity());
  std::vector<int> assigned(mesh.faces.size(), kUnlabeled);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    if (out.face_part[f] != kUnlabeled) {
      distance[f] = 0.0;
      queue.push({0.0, out.face_part[f], int(f)});
    }
  while (!queue.empty()) {
    Entry e = queue.top();
    queue.pop();
    if (assigned[std::size_t(e.face)] != kUnlabeled) continue;
    if (e.dist > distance[std::size_t(e.face)]) continue;
    assigned[std::size_t(e.face)] = e.part;
    Vec3 centroid = mesh.face_centroid(std::size_t(e.face));
    for (int nb : adjacency[std::size_t(e.face)]) {
      if (assigned[std::size_t(nb)] != kUnlabeled) continue;
      double d = e.dist + (mesh.face_centroid(std::size_t(nb)) - centroid).norm();
      if (d < distance[std::size_t(nb)]) {
        distance[std::size_t(nb)] = d;
        queue.push({d, e.part, nb});
      } else if (d == distance[std::size_t(nb)]) {
        // Equal distance from another source: the smaller part id must win,
        // so push and let the queue ordering decide.
        queue.push({d, e.part, nb});
      }
    }
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    if (out.face_part[f] == kUnlabeled) out.face_part[f] = assigned[f];
  return out;
}

std::vector<TriangleMesh> split_parts(const PartLabeling& labeling,
                                      const TriangleMesh& mesh) {
  if (!labeling.complete())
    throw ValidationError("split_parts requires a complete labeling");
  if (labeling.face_part.size() != mesh.faces.size())
    throw ValidationError("labeling size does not match face count");
  std::vector<TriangleMesh> parts(std::size_t(labeling.part_count));
  std::vector<std::vector<int>> remap(std::size_t(labeling.part_count),
                                      std::vector<int>(mesh.vertices.size(), -1));
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    int part = labeling.face_part[f];
    if (part < 0 || part >= labeling.part_count)
      throw ValidationError("part id out of range in labeling");
    TriangleMesh& dst = parts[std::size_t(part)];
    Vec3i tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int v = tri[k];
      int& slot = remap[std::size_t(part)][std::size_t(v)];
      if (slot < 0) {
        slot = int(dst.vertices.size());
        dst.vertices.push_back(mesh.vertices[std::size_t(v)]);
      }
      tri[k] = slot;
    }
    dst.faces.push_back(tri);
  }
  return parts;
}

std::vector<ScoredPointMask> load_masks_json(const std::string& path,
                                             std::size_t point_count) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("masks") || !doc["masks"].is_array())
    throw ValidationError(path + ": /masks: expected an array");
  std::vector<ScoredPointMask> masks;
  std::size_t idx = 0;
  for (const auto& m : doc["masks"]) {
    std::string where = path + ": /masks/" + std::to_string(idx++);
    if (!m.is_object() || !m.contains("score") || !m.contains("indices"))
      throw ValidationError(where + ": expected {score, indices}");
    ScoredPointMask mask;
    mask.score = m["score"].get<double>();
    if (!std::isfinite(mask.score))
      throw ValidationError(where + "/score: must be finite");
    mask.membership.assign(point_count, 0);
    for (const auto& i : m["indices"]) {
      std::int64_t v = i.get<std::int64_t>();
      if (v < 0 || v >= std::int64_t(point_count))
        throw ValidationError(where + "/indices: index " + std::to_string(v) +
                              " out of range");
      mask.membership[std::size_t(v)] = 1;
    }
    if (m.contains("prompt_index")) mask.prompt_index = m["prompt_index"].get<int>();
    if (mask.member_count() == 0)
      throw ValidationError(where + ": mask has empty membership");
    masks.push_back(std::move(mask));
  }
  return masks;
}

void save_masks_json(const std::vector<ScoredPointMask>& masks,
                     const std::string& points_file, const std::string& path) {
  nlohmann::json doc;
  doc["points_file"] = points_file;
  doc["masks"] = nlohmann::json::array();
  for (const auto& m : masks) {
    nlohmann::json j;
    j["score"] = m.score;
    j["indices"] = nlohmann::json::array();
    for (std::size_t i = 0; i < m.membership.size(); ++i)
      if (m.membership[i]) j["indices"].push_back(i);
    if (m.prompt_index >= 0) j["prompt_index"] = m.prompt_index;
    doc["masks"].push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write failure on " + path);
}

}  // namespace meshpipe
