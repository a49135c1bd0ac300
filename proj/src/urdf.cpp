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

#include "meshpipe/urdf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace meshpipe {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(const Vec3& v) {
  return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z());
}

// Fixed-axis roll/pitch/yaw of a rotation matrix (URDF convention).
Vec3 rotation_to_rpy(const Mat3& r) {
  double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return Vec3(roll, pitch, yaw);
}

}  // namespace

void export_urdf(const KinematicGraph& graph, const std::vector<PhysicalProps>& props,
                 const std::vector<std::string>& mesh_files,
                 const std::string& path, const std::string& robot_name) {
  if (int(props.size()) != graph.node_count ||
      int(mesh_files.size()) != graph.node_count)
    throw ValidationError("props/mesh file count must match graph nodes");
  for (const auto& file : mesh_files)
    if (!std::filesystem::exists(file))
      throw ValidationError("mesh file missing: " + file);

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "<?xml version=\"1.0\"?>\n";
  out << "<robot name=\"" << robot_name << "\">\n";
  for (int k = 0; k < graph.node_count; ++k) {
    const PhysicalProps& p = props[std::size_t(k)];
    Vec3 rpy = rotation_to_rpy(p.principal_axes);
    out << "  <link name=\"part_" << k << "\">\n";
    out << "    <inertial>\n";
    out << "      <origin xyz=\"" << fmt3(p.centroid) << "\" rpy=\"" << fmt3(rpy)
        << "\"/>\n";
    out << "      <mass value=\"" << fmt(p.mass) << "\"/>\n";
    out << "      <inertia ixx=\"" << fmt(p.inertia_diagonal.x()) << "\" ixy=\"0\""
        << " ixz=\"0\" iyy=\"" << fmt(p.inertia_diagonal.y())
        << "\" iyz=\"0\" izz=\"" << fmt(p.inertia_diagonal.z()) << "\"/>\n";
    out << "    </inertial>\n";
    for (const char* tag : {"visual", "collision"}) {
      out << "    <" << tag << ">\n";
      out << "      <geometry>\n";
      out << "        <mesh filename=\"" << mesh_files[std::size_t(k)] << "\"/>\n";
      out << "      </geometry>\n";
      out << "    </" << tag << ">\n";
    }
    out << "    <contact_coefficients mu=\"" << fmt(p.friction) << "\"/>\n";
    out << "  </link>\n";
  }
  for (const auto& e : graph.edges) {
    out << "  <joint name=\"joint_" << e.parent << "_" << e.child << "\" type=\""
        << joint_type_name(e.joint.type) << "\">\n";
    out << "    <parent link=\"part_" << e.parent << "\"/>\n";
    out << "    <child link=\"part_" << e.child << "\"/>\n";
    out << "    <origin xyz=\"" << fmt3(e.joint.origin) << "\" rpy=\"0 0 0\"/>\n";
    if (e.joint.type != JointType::Fixed) {
      out << "    <axis xyz=\"" << fmt3(e.joint.axis) << "\"/>\n";
      out << "    <limit lower=\"" << fmt(e.joint.lower) << "\" upper=\""
          << fmt(e.joint.upper) << "\" effort=\"100\" velocity=\"1\"/>\n";
    }
    out << "  </joint>\n";
  }
  out << "</robot>\n";
  if (!out) throw Error("write failure on " + path);
}

namespace {

Vec3 parse_vec3(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  Vec3 v;
  if (!(is >> v.x() >> v.y() >> v.z()))
    throw ValidationError(where + ": expected three numbers, got '" + text + "'");
  return v;
}

int part_index(const std::string& link_name, const std::string& where) {
  if (link_name.rfind("part_", 0) != 0)
    throw ValidationError(where + ": unexpected link name '" + link_name + "'");
  return std::stoi(link_name.substr(5));
}

}  // namespace

UrdfModel read_urdf(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    pt::read_xml(path, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  auto robot = doc.get_child_optional("robot");
  if (!robot) throw ValidationError(path + ": missing <robot> element");

  UrdfModel model;
  model.robot_name = robot->get<std::string>("<xmlattr>.name", "");
  struct LinkData {
    int index;
    PhysicalProps props;
    std::string mesh;
  };
  std::vector<LinkData> links;
  std::vector<KinematicGraph::Edge> edges;
  for (const auto& [tag, node] : *robot) {
    if (tag == "link") {
      LinkData link;
      link.index = part_index(node.get<std::string>("<xmlattr>.name"), path);
      if (auto inertial = node.get_child_optional("inertial")) {
        link.props.mass = inertial->get<double>("mass.<xmlattr>.value", 0.0);
        link.props.centroid = parse_vec3(
            inertial->get<std::string>("origin.<xmlattr>.xyz", "0 0 0"), path);
        link.props.inertia_diagonal =
            Vec3(inertial->get<double>("inertia.<xmlattr>.ixx", 0.0),
                 inertial->get<double>("inertia.<xmlattr>.iyy", 0.0),
                 inertial->get<double>("inertia.<xmlattr>.izz", 0.0));
      }
      link.props.friction =
          node.get<double>("contact_coefficients.<xmlattr>.mu", 0.5);
      link.mesh = node.get<std::string>("visual.geometry.mesh.<xmlattr>.filename", "");
      links.push_back(std::move(link));
    } else if (tag == "joint") {
      KinematicGraph::Edge e;
      e.joint.type =
          joint_type_from_name(node.get<std::string>("<xmlattr>.type"));
      e.parent = part_index(node.get<std::string>("parent.<xmlattr>.link"), path);
      e.child = part_index(node.get<std::string>("child.<xmlattr>.link"), path);
      e.joint.origin =
          parse_vec3(node.get<std::string>("origin.<xmlattr>.xyz", "0 0 0"), path);
      if (e.joint.type != JointType::Fixed) {
        e.joint.axis =
            parse_vec3(node.get<std::string>("axis.<xmlattr>.xyz", "0 0 1"), path);
        e.joint.lower = node.get<double>("limit.<xmlattr>.lower", 0.0);
        e.joint.upper = node.get<double>("limit.<xmlattr>.upper", 0.0);
      }
      edges.push_back(std::move(e));
    }
  }
  if (links.empty()) throw ValidationError(path + ": no links");
  std::sort(links.begin(), links.end(),
            [](const LinkData& a, const LinkData& b) { return a.index < b.index; });
  int node_count = links.back().index + 1;
  model.props.resize(std::size_t(node_count));
  model.mesh_files.resize(std::size_t(node_count));
  for (const auto& link : links) {
    model.props[std::size_t(link.index)] = link.props;
    model.mesh_files[std::size_t(link.index)] = link.mesh;
  }
  // Root = the link that is never a child.
  std::vector<char> is_child(std::size_t(node_count), 0);
  for (const auto& e : edges) is_child[std::size_t(e.child)] = 1;
  int root = 0;
  for (int k = 0; k < node_count; ++k)
    if (!is_child[std::size_t(k)]) {
      root = k;
      break;
    }
  model.graph = build_kinematic_graph(node_count, root, std::move(edges));
  return model;
}

}  // namespace meshpipe
