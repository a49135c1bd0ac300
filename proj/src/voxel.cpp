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

#include "meshpipe/voxel.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace meshpipe {

namespace {

inline bool axis_separates(double p0, double p1, double p2, double r) {
  double lo = std::min({p0, p1, p2});
  double hi = std::max({p0, p1, p2});
  return lo > r || hi < -r;
}

}  // namespace

bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c,
                          const Vec3& box_center, const Vec3& box_half) {
  const Vec3 v0 = a - box_center, v1 = b - box_center, v2 = c - box_center;
  const Vec3 h = box_half;

  // Box face normals.
  for (int axis = 0; axis < 3; ++axis)
    if (axis_separates(v0[axis], v1[axis], v2[axis], h[axis])) return false;

  // Triangle plane.
  const Vec3 e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;
  const Vec3 n = e0.cross(e1);
  const double d = n.dot(v0);
  const double r = h.x() * std::abs(n.x()) + h.y() * std::abs(n.y()) +
                   h.z() * std::abs(n.z());
  if (d > r || d < -r) return false;

  // Nine edge cross products.
  auto edge_axis = [&](const Vec3& e) {
    static const Vec3 axes[3] = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    for (int k = 0; k < 3; ++k) {
      Vec3 axis = axes[k].cross(e);
      double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
      double rad = h.x() * std::abs(axis.x()) + h.y() * std::abs(axis.y()) +
                   h.z() * std::abs(axis.z());
      if (axis_separates(p0, p1, p2, rad)) return false;
    }
    return true;
  };
  return edge_axis(e0) && edge_axis(e1) && edge_axis(e2);
}

std::size_t VoxelPrior::occupied_count() const {
  std::size_t count = 0;
  for (std::uint64_t word : bits) count += std::size_t(std::popcount(word));
  return count;
}

std::vector<Vec3i> VoxelPrior::occupied_cells() const {
  std::vector<Vec3i> cells;
  cells.reserve(occupied_count());
  for (int z = 0; z < resolution; ++z)
    for (int y = 0; y < resolution; ++y)
      for (int x = 0; x < resolution; ++x)
        if (occupied(x, y, z)) cells.emplace_back(x, y, z);
  return cells;
}

VoxelPrior voxelize_surface(const TriangleMesh& mesh, int resolution) {
  if (resolution < 4) throw ValidationError("voxel resolution must be >= 4");
  VoxelPrior prior;
  prior.resolution = resolution;
  prior.bits.assign((prior.bit_count() + 63) / 64, 0);
  const double h = prior.cell_size();
  const Vec3 half = Vec3::Constant(0.5 * h);

  const int threads = thread_count();
  std::vector<std::vector<std::uint64_t>> partial(
      std::size_t(std::max(1, threads - 1)) + 1);
  // Per-thread bitsets merged by OR keep the result order-independent.
  std::atomic<int> slot{0};
  parallel_for(std::int64_t(mesh.faces.size()), [&](std::int64_t begin, std::int64_t end) {
    int my = slot.fetch_add(1);
    if (my >= int(partial.size())) my = int(partial.size()) - 1;
    auto& local = partial[std::size_t(my)];
    if (local.empty()) local.assign(prior.bits.size(), 0);
    for (std::int64_t f = begin; f < end; ++f) {
      const Vec3i& tri = mesh.faces[std::size_t(f)];
      const Vec3& a = mesh.vertices[tri[0]];
      const Vec3& b = mesh.vertices[tri[1]];
      const Vec3& c = mesh.vertices[tri[2]];
      Aabb box;
      box.expand(a); box.expand(b); box.expand(c);
      int lo[3], hi[3];
      for (int axis = 0; axis < 3; ++axis) {
        lo[axis] = std::clamp(int(std::floor((box.min[axis] + 0.5) / h)), 0,
                              resolution - 1);
        hi[axis] = std::clamp(int(std::floor((box.max[axis] + 0.5) / h)), 0,
                              resolution - 1);
      }
      for (int z = lo[2]; z <= hi[2]; ++z)
        for (int y = lo[1]; y <= hi[1]; ++y)
          for (int x = lo[0]; x <= hi[0]; ++x) {
            Vec3 center((x + 0.5) * h - 0.5, (y + 0.5) * h - 0.5,
                        (z + 0.5) * h - 0.5);
            if (triangle_box_overlap(a, b, c, center, half)) {
              std::size_t i = std::size_t(x) +
                              std::size_t(resolution) *
                                  (std::size_t(y) +
                                   std::size_t(resolution) * std::size_t(z));
              local[i >> 6] |= std::uint64_t(1) << (i & 63);
            }
          }
    }
  }, 64);
  for (const auto& local : partial) {
    if (local.empty()) continue;
    for (std::size_t w = 0; w < prior.bits.size(); ++w) prior.bits[w] |= local[w];
  }
  return prior;
}

VoxelPrior dilate(const VoxelPrior& prior, int radius, Structuring structuring) {
  if (radius < 0) throw ValidationError("dilation radius must be >= 0");
  VoxelPrior out = prior;
  out.dilation_radius = prior.dilation_radius + radius;
  if (radius == 0) return out;
  const int m = prior.resolution;
  std::fill(out.bits.begin(), out.bits.end(), 0);
  std::vector<Vec3i> sources = prior.occupied_cells();
  for (const auto& s : sources)
    for (int dz = -radius; dz <= radius; ++dz)
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          if (structuring == Structuring::L1 &&
              std::abs(dx) + std::abs(dy) + std::abs(dz) > radius)
            continue;
          int x = s.x() + dx, y = s.y() + dy, z = s.z() + dz;
          if (x < 0 || y < 0 || z < 0 || x >= m || y >= m || z >= m) continue;
          out.set(x, y, z);
        }
  return out;
}

VoxelPositionalEncoding positional_encoding(const VoxelPrior& prior) {
  VoxelPositionalEncoding enc;
  enc.cells = prior.occupied_cells();
  std::sort(enc.cells.begin(), enc.cells.end(), [](const Vec3i& a, const Vec3i& b) {
    return morton3(std::uint32_t(a.x()), std::uint32_t(a.y()), std::uint32_t(a.z())) <
           morton3(std::uint32_t(b.x()), std::uint32_t(b.y()), std::uint32_t(b.z()));
  });
  const double m = prior.resolution;
  enc.centers.reserve(enc.cells.size());
  for (const auto& c : enc.cells)
    enc.centers.emplace_back((c.x() + 0.5) / m - 0.5, (c.y() + 0.5) / m - 0.5,
                             (c.z() + 0.5) / m - 0.5);
  return enc;
}

CoverageReport coverage_check(const VoxelPrior& prior, const SparseSdfGrid& grid) {
  if (grid.resolution % prior.resolution != 0)
    throw ValidationError("prior resolution must divide grid resolution");
  const int ratio = grid.resolution / prior.resolution;
  CoverageReport report;
  for (const auto& cell : grid.cells) {
    if (!grid.cell_has_sign_change(cell)) continue;
    Vec3i coarse = cell.coord / ratio;
    if (!prior.occupied(coarse.x(), coarse.y(), coarse.z()))
      report.missed_sign_change_cells.push_back(cell.coord);
  }
  return report;
}

void VoxelPrior::save_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const char magic[8] = {'M', 'P', 'V', 'X', '0', '0', '0', '1'};
  out.write(magic, 8);
  std::int64_t m = resolution, r = dilation_radius;
  out.write(reinterpret_cast<const char*>(&m), 8);
  out.write(reinterpret_cast<const char*>(&r), 8);
  std::int64_t words = std::int64_t(bits.size());
  out.write(reinterpret_cast<const char*>(&words), 8);
  out.write(reinterpret_cast<const char*>(bits.data()),
            std::streamsize(bits.size() * 8));
  if (!out) throw Error("write failure on " + path);
}

VoxelPrior VoxelPrior::load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "MPVX0001", 8) != 0)
    throw ValidationError(path + ": bad voxel prior magic");
  std::int64_t m = 0, r = 0, words = 0;
  in.read(reinterpret_cast<char*>(&m), 8);
  in.read(reinterpret_cast<char*>(&r), 8);
  in.read(reinterpret_cast<char*>(&words), 8);
  if (!in || m < 4) throw ValidationError(path + ": bad voxel prior header");
  VoxelPrior prior;
  prior.resolution = int(m);
  prior.dilation_radius = int(r);
  prior.bits.resize(std::size_t(words));
  in.read(reinterpret_cast<char*>(prior.bits.data()), std::streamsize(words * 8));
  if (!in) throw ValidationError(path + ": truncated voxel prior");
  return prior;
}

std::string VoxelPrior::to_json() const {
  std::ostringstream os;
  os << "{\"resolution\":" << resolution
     << ",\"dilation_radius\":" << dilation_radius << ",\"occupied\":[";
  bool first = true;
  for (const auto& c : occupied_cells()) {
    if (!first) os << ',';
    first = false;
    os << '[' << c.x() << ',' << c.y() << ',' << c.z() << ']';
  }
  os << "]}";
  return os.str();
}

void VoxelPositionalEncoding::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "i,j,k,x,y,z\n";
  char buf[160];
  for (std::size_t n = 0; n < cells.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g,%.17g\n", cells[n].x(),
                  cells[n].y(), cells[n].z(), centers[n].x(), centers[n].y(),
                  centers[n].z());
    out << buf;
  }
  if (!out) throw Error("write failure on " + path);
}

}  // namespace meshpipe
