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

#include "meshpipe/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace meshpipe {

void Camera::check() const {
  if (width < 1 || height < 1) throw ValidationError("camera dimensions must be >= 1");
  if (mode == CameraMode::Perspective && !(fov_y > 0.0 && fov_y < M_PI))
    throw ValidationError("field of view must be in (0, pi)");
  if (mode == CameraMode::Orthographic && !(half_height > 0.0))
    throw ValidationError("orthographic half-height must be positive");
  Vec3 forward = look_at - position;
  if (forward.norm() < 1e-12) throw ValidationError("camera at look-at point");
  if (forward.normalized().cross(up.normalized()).norm() < 1e-9)
    throw ValidationError("camera view direction parallel to up");
}

std::size_t RasterImage::foreground_count() const {
  std::size_t n = 0;
  for (double d : depth) n += std::isfinite(d);
  return n;
}

std::vector<Camera> uniform_trajectory(int count, double elevation, double radius,
                                       const Vec3& center) {
  if (count < 1) throw ValidationError("trajectory needs at least one camera");
  if (!(radius > 0.0)) throw ValidationError("trajectory radius must be positive");
  std::vector<Camera> cameras;
  cameras.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    double azimuth = 2.0 * M_PI * k / count;
    Camera cam;
    cam.position = center + radius * Vec3(std::cos(elevation) * std::cos(azimuth),
                                          std::cos(elevation) * std::sin(azimuth),
                                          std::sin(elevation));
    cam.look_at = center;
    cam.up = Vec3(0, 0, 1);
    cam.check();
    cameras.push_back(cam);
  }
  return cameras;
}

namespace {

struct ViewBasis {
  Vec3 origin;
  Vec3 right, up, forward;
};

ViewBasis make_basis(const Camera& cam) {
  ViewBasis basis;
  basis.origin = cam.position;
  basis.forward = (cam.look_at - cam.position).normalized();
  basis.right = basis.forward.cross(cam.up).normalized();
  basis.up = basis.right.cross(basis.forward);
  return basis;
}

inline double cross2(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

}  // namespace

RasterImage rasterize(const TriangleMesh& mesh, const Camera& camera) {
  camera.check();
  RasterImage image(camera.width, camera.height);
  if (mesh.faces.empty()) return image;

  const ViewBasis basis = make_basis(camera);
  const double aspect = double(camera.width) / double(camera.height);
  const double tan_half = std::tan(0.5 * camera.fov_y);
  const bool persp = camera.mode == CameraMode::Perspective;
  const double near_z = 1e-9;

  // Project all vertices to pixel coordinates (x right, y down) + view depth.
  struct Projected {
    double x, y, z;
    bool ok;
  };
  std::vector<Projected> proj(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3 rel = mesh.vertices[v] - basis.origin;
    double xv = basis.right.dot(rel);
    double yv = basis.up.dot(rel);
    double zv = basis.forward.dot(rel);
    Projected p;
    p.z = zv;
    p.ok = zv > near_z;
    double nx, ny;
    if (persp) {
      nx = p.ok ? xv / (zv * tan_half * aspect) : 0.0;
      ny = p.ok ? yv / (zv * tan_half) : 0.0;
    } else {
      nx = xv / (camera.half_height * aspect);
      ny = yv / camera.half_height;
    }
    p.x = (0.5 * nx + 0.5) * camera.width;
    p.y = (0.5 - 0.5 * ny) * camera.height;
    proj[v] = p;
  }

  const int threads = thread_count();
  const int bands = std::min(camera.height, std::max(1, threads));
  const int rows_per_band = (camera.height + bands - 1) / bands;
  parallel_for(bands, [&](std::int64_t band_begin, std::int64_t band_end) {
    for (std::int64_t band = band_begin; band < band_end; ++band) {
      const int row_lo = int(band) * rows_per_band;
      const int row_hi = std::min(camera.height, row_lo + rows_per_band);
      for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Vec3i& tri = mesh.faces[f];
        Projected a = proj[std::size_t(tri[0])];
        Projected b = proj[std::size_t(tri[1])];
        Projected c = proj[std::size_t(tri[2])];
        if (!a.ok || !b.ok || !c.ok) continue;  // behind the camera
        // Orient so edge functions are positive inside.
        double area2 = cross2(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y);
        if (area2 == 0.0) continue;
        if (area2 < 0.0) {
          std::swap(b, c);
          area2 = -area2;
        }
        int min_x = std::max(0, int(std::floor(std::min({a.x, b.x, c.x}) - 0.5)));
        int max_x = std::min(camera.width - 1,
                             int(std::ceil(std::max({a.x, b.x, c.x}) + 0.5)));
        int min_y = std::max(row_lo, int(std::floor(std::min({a.y, b.y, c.y}) - 0.5)));
        int max_y = std::min(row_hi - 1,
                             int(std::ceil(std::max({a.y, b.y, c.y}) + 0.5)));
        if (min_x > max_x || min_y > max_y) continue;

        // Top-left fill rule: a zero edge function counts as covered only on
        // top (horizontal, interior below) and left (descending) edges.
        auto edge_accepts_zero = [](double x0, double y0, double x1, double y1) {
          double dy = y1 - y0;
          if (dy > 0.0) return true;                 // left edge
          return dy == 0.0 && x1 > x0;               // top edge
        };
        const bool tl0 = edge_accepts_zero(a.x, a.y, b.x, b.y);
        const bool tl1 = edge_accepts_zero(b.x, b.y, c.x, c.y);
        const bool tl2 = edge_accepts_zero(c.x, c.y, a.x, a.y);

        for (int py = min_y; py <= max_y; ++py) {
          double sy = py + 0.5;
          for (int px = min_x; px <= max_x; ++px) {
            double sx = px + 0.5;
            double w0 = cross2(b.x - a.x, b.y - a.y, sx - a.x, sy - a.y);
            double w1 = cross2(c.x - b.x, c.y - b.y, sx - b.x, sy - b.y);
            double w2 = cross2(a.x - c.x, a.y - c.y, sx - c.x, sy - c.y);
            bool inside = (w0 > 0.0 || (w0 == 0.0 && tl0)) &&
                          (w1 > 0.0 || (w1 == 0.0 && tl1)) &&
                          (w2 > 0.0 || (w2 == 0.0 && tl2));
            if (!inside) continue;
            // Barycentric weights; opposite-vertex convention.
            double la = w1 / area2, lb = w2 / area2, lc = w0 / area2;
            double depth;
            if (persp) {
              double inv_z = la / a.z + lb / b.z + lc / c.z;
              depth = 1.0 / inv_z;
            } else {
              depth = la * a.z + lb * b.z + lc * c.z;
            }
            double& slot = image.depth[std::size_t(py) * camera.width + px];
            if (depth < slot) slot = depth;
          }
        }
      }
    }
  }, 1);
  return image;
}

double silhouette_iou(const RasterImage& a, const RasterImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw ValidationError("silhouette IoU requires equal image dimensions");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.depth.size(); ++i) {
    bool fa = std::isfinite(a.depth[i]);
    bool fb = std::isfinite(b.depth[i]);
    inter += fa && fb;
    uni += fa || fb;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

void save_pbm(const RasterImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "P4\n" << image.width << ' ' << image.height << '\n';
  const int row_bytes = (image.width + 7) / 8;
  std::vector<unsigned char> row(static_cast<std::size_t>(row_bytes), 0);
  for (int y = 0; y < image.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < image.width; ++x)
      if (image.foreground(x, y))
        row[std::size_t(x >> 3)] |= static_cast<unsigned char>(0x80 >> (x & 7));
    out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
  if (!out) throw Error("write failure on " + path);
}

RasterImage load_pbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P4") throw ValidationError(path + ": expected binary PBM (P4)");
  int w = 0, h = 0;
  // Header tokens may be separated by whitespace/comments.
  auto next_int = [&](int& value) {
    for (;;) {
      int ch = in.peek();
      if (ch == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    in >> value;
  };
  next_int(w);
  next_int(h);
  in.get();  // single whitespace before raster
  if (!in || w < 1 || h < 1) throw ValidationError(path + ": bad PBM header");
  RasterImage image(w, h);
  const int row_bytes = (w + 7) / 8;
  std::vector<unsigned char> row(static_cast<std::size_t>(row_bytes), 0);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row_bytes);
    if (!in) throw ValidationError(path + ": truncated PBM raster");
    for (int x = 0; x < w; ++x)
      if (row[std::size_t(x >> 3)] & (0x80 >> (x & 7)))
        image.depth[std::size_t(y) * w + x] = 1.0;
  }
  return image;
}

void save_pgm(const RasterImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double d : image.depth)
    if (std::isfinite(d)) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  const double range = hi > lo ? hi - lo : 1.0;
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  for (double d : image.depth) {
    std::uint16_t v = 0;
    if (std::isfinite(d)) {
      // Nearer is brighter; background stays 0.
      double t = 1.0 - (d - lo) / range;
      v = std::uint16_t(1 + t * 65534.0);
    }
    unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
  if (!out) throw Error("write failure on " + path);
}

}  // namespace meshpipe
