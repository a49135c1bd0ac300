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

#include "meshpipe/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace meshpipe {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + what);
}

[[noreturn]] void byte_fail(const std::string& path, std::size_t offset,
                            const std::string& what) {
  throw ValidationError(path + " @byte " + std::to_string(offset) + ": " + what);
}

void fan_triangulate(const std::vector<int>& polygon, std::size_t line,
                     const std::string& path, TriangleMesh& mesh) {
  if (polygon.size() < 3) parse_fail(path, line, "face with fewer than 3 vertices");
  for (std::size_t k = 1; k + 1 < polygon.size(); ++k)
    mesh.faces.emplace_back(polygon[0], polygon[k], polygon[k + 1]);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  std::vector<int> polygon;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        parse_fail(path, lineno, "malformed vertex record");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      polygon.clear();
      std::string token;
      while (ls >> token) {
        // "i", "i/t", "i//n", "i/t/n"; only the vertex index matters here.
        std::size_t slash = token.find('/');
        std::string head = slash == std::string::npos ? token : token.substr(0, slash);
        int idx = 0;
        auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || p != head.data() + head.size())
          parse_fail(path, lineno, "malformed face index '" + token + "'");
        if (idx < 0) idx = int(mesh.vertices.size()) + idx + 1;  // relative index
        if (idx < 1 || idx > int(mesh.vertices.size()))
          parse_fail(path, lineno, "face index " + head + " out of range");
        polygon.push_back(idx - 1);
      }
      fan_triangulate(polygon, lineno, path, mesh);
    }
    // vn/vt/mtllib/usemtl/o/g/s records carry no geometry; skip.
  }
  return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw Error("write failure on " + path);
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

PlyType ply_type_from_name(const std::string& name, const std::string& path,
                           std::size_t lineno) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  parse_fail(path, lineno, "unknown ply type '" + name + "'");
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
  PlyType value_type = PlyType::Float64;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

double read_binary_scalar(std::istream& in, PlyType t, const std::string& path) {
  unsigned char raw[8];
  in.read(reinterpret_cast<char*>(raw), std::streamsize(ply_type_size(t)));
  if (!in) byte_fail(path, std::size_t(in.tellg()), "unexpected end of binary ply data");
  switch (t) {
    case PlyType::Int8: return double(*reinterpret_cast<std::int8_t*>(raw));
    case PlyType::UInt8: return double(*reinterpret_cast<std::uint8_t*>(raw));
    case PlyType::Int16: { std::int16_t v; std::memcpy(&v, raw, 2); return double(v); }
    case PlyType::UInt16: { std::uint16_t v; std::memcpy(&v, raw, 2); return double(v); }
    case PlyType::Int32: { std::int32_t v; std::memcpy(&v, raw, 4); return double(v); }
    case PlyType::UInt32: { std::uint32_t v; std::memcpy(&v, raw, 4); return double(v); }
    case PlyType::Float32: { float v; std::memcpy(&v, raw, 4); return double(v); }
    case PlyType::Float64: { double v; std::memcpy(&v, raw, 8); return v; }
  }
  return 0.0;
}

TriangleMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) parse_fail(path, lineno, "unexpected end of header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;
  };
  next_line();
  if (line != "ply") parse_fail(path, lineno, "missing ply magic");
  bool binary = false;
  std::vector<PlyElement> elements;
  for (;;) {
    next_line();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else parse_fail(path, lineno, "unsupported ply format '" + fmt + "'");
    } else if (tag == "element") {
      PlyElement el;
      if (!(ls >> el.name >> el.count)) parse_fail(path, lineno, "malformed element");
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) parse_fail(path, lineno, "property before element");
      PlyProperty prop;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, vt;
        if (!(ls >> ct >> vt >> prop.name)) parse_fail(path, lineno, "malformed list property");
        prop.is_list = true;
        prop.count_type = ply_type_from_name(ct, path, lineno);
        prop.value_type = ply_type_from_name(vt, path, lineno);
      } else {
        prop.value_type = ply_type_from_name(t, path, lineno);
        if (!(ls >> prop.name)) parse_fail(path, lineno, "malformed property");
      }
      elements.back().props.push_back(prop);
    } else if (tag == "end_header") {
      break;
    } else {
      parse_fail(path, lineno, "unknown header record '" + tag + "'");
    }
  }

  TriangleMesh mesh;
  bool saw_labels = false;
  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int xi = -1, yi = -1, zi = -1, label_i = -1, list_i = -1;
    for (std::size_t p = 0; p < el.props.size(); ++p) {
      const auto& prop = el.props[p];
      if (is_vertex && prop.name == "x") xi = int(p);
      if (is_vertex && prop.name == "y") yi = int(p);
      if (is_vertex && prop.name == "z") zi = int(p);
      if (is_face && prop.is_list &&
          (prop.name == "vertex_indices" || prop.name == "vertex_index"))
        list_i = int(p);
      if (is_face && !prop.is_list && prop.name == "label") label_i = int(p);
    }
    if (is_vertex && (xi < 0 || yi < 0 || zi < 0))
      parse_fail(path, lineno, "vertex element missing x/y/z");
    if (is_face && list_i < 0)
      parse_fail(path, lineno, "face element missing vertex_indices list");

    for (std::size_t row = 0; row < el.count; ++row) {
      std::vector<int> polygon;
      double x = 0, y = 0, z = 0;
      int label = 0;
      if (binary) {
        for (std::size_t p = 0; p < el.props.size(); ++p) {
          const auto& prop = el.props[p];
          if (prop.is_list) {
            auto n = std::size_t(read_binary_scalar(in, prop.count_type, path));
            for (std::size_t k = 0; k < n; ++k) {
              double v = read_binary_scalar(in, prop.value_type, path);
              if (int(p) == list_i) polygon.push_back(int(v));
            }
          } else {
            double v = read_binary_scalar(in, prop.value_type, path);
            if (int(p) == xi) x = v;
            else if (int(p) == yi) y = v;
            else if (int(p) == zi) z = v;
            else if (int(p) == label_i) label = int(v);
          }
        }
      } else {
        next_line();
        std::istringstream ls(line);
        for (std::size_t p = 0; p < el.props.size(); ++p) {
          const auto& prop = el.props[p];
          if (prop.is_list) {
            std::size_t n = 0;
            if (!(ls >> n)) parse_fail(path, lineno, "malformed list count");
            for (std::size_t k = 0; k < n; ++k) {
              double v;
              if (!(ls >> v)) parse_fail(path, lineno, "malformed list value");
              if (int(p) == list_i) polygon.push_back(int(v));
            }
          } else {
            double v;
            if (!(ls >> v)) parse_fail(path, lineno, "malformed property value");
            if (int(p) == xi) x = v;
            else if (int(p) == yi) y = v;
            else if (int(p) == zi) z = v;
            else if (int(p) == label_i) label = int(v);
          }
        }
      }
      if (is_vertex) mesh.vertices.emplace_back(x, y, z);
      if (is_face) {
        std::size_t before = mesh.faces.size();
        fan_triangulate(polygon, lineno, path, mesh);
        if (label_i >= 0) {
          saw_labels = true;
          mesh.face_labels.resize(before, 0);
          mesh.face_labels.resize(mesh.faces.size(), label);
        }
      }
    }
  }
  if (!saw_labels) mesh.face_labels.clear();
  return mesh;
}

void save_ply(const TriangleMesh& mesh, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const bool labels = !mesh.face_labels.empty();
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii")
      << " 1.0\nelement vertex " << mesh.vertices.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.faces.size()
      << "\nproperty list uchar int vertex_indices\n";
  if (labels) out << "property int label\n";
  out << "end_header\n";
  if (binary) {
    for (const auto& v : mesh.vertices) {
      double xyz[3] = {v.x(), v.y(), v.z()};
      out.write(reinterpret_cast<const char*>(xyz), 24);
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      unsigned char n = 3;
      std::int32_t idx[3] = {mesh.faces[f][0], mesh.faces[f][1], mesh.faces[f][2]};
      out.write(reinterpret_cast<const char*>(&n), 1);
      out.write(reinterpret_cast<const char*>(idx), 12);
      if (labels) {
        std::int32_t label = mesh.face_labels[f];
        out.write(reinterpret_cast<const char*>(&label), 4);
      }
    }
  } else {
    char buf[160];
    for (const auto& v : mesh.vertices) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
      out << buf;
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      out << "3 " << mesh.faces[f][0] << ' ' << mesh.faces[f][1] << ' '
          << mesh.faces[f][2];
      if (labels) out << ' ' << mesh.face_labels[f];
      out << '\n';
    }
  }
  if (!out) throw Error("write failure on " + path);
}

}  // namespace

MeshFormat format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  if (ext == "obj") return MeshFormat::Obj;
  if (ext == "ply") return MeshFormat::PlyBinary;
  throw ValidationError("unsupported mesh extension on " + path);
}

TriangleMesh load_mesh(const std::string& path, MeshFormat format) {
  TriangleMesh mesh = format == MeshFormat::Obj ? load_obj(path) : load_ply(path);
  if (mesh.faces.empty()) throw ValidationError(path + ": mesh has no faces");
  check_mesh(mesh);
  validate(mesh);
  if (mesh.faces.empty())
    throw ValidationError(path + ": mesh has only degenerate faces");
  return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
  return load_mesh(path, format_from_path(path));
}

void save_mesh(const TriangleMesh& mesh, const std::string& path, MeshFormat format) {
  if (mesh.faces.empty())
    throw ValidationError("refusing to write mesh without faces: " + path);
  check_mesh(mesh);
  switch (format) {
    case MeshFormat::Obj: save_obj(mesh, path); break;
    case MeshFormat::PlyAscii: save_ply(mesh, path, false); break;
    case MeshFormat::PlyBinary: save_ply(mesh, path, true); break;
  }
}

void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  save_mesh(mesh, path, format_from_path(path));
}

}  // namespace meshpipe
