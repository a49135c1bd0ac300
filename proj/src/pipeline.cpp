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

#include "meshpipe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "meshpipe/articulate.hpp"
#include "meshpipe/decimate.hpp"
#include "meshpipe/mesh_io.hpp"
#include "meshpipe/parts.hpp"
#include "meshpipe/render.hpp"
#include "meshpipe/scene.hpp"
#include "meshpipe/sdf.hpp"
#include "meshpipe/urdf.hpp"
#include "meshpipe/voxel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace meshpipe {

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> keys) {
  if (!obj.is_object())
    throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return key == k;
        }) == keys.end())
      throw ValidationError(where + "/" + key + ": unknown config key");
  }
}

void range_check(bool ok, const std::string& pointer, const std::string& what) {
  if (!ok) throw ValidationError(pointer + ": " + what);
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  PipelineConfig cfg;
  reject_unknown(doc, path,
                 {"seed", "threads", "normalize", "sdf", "grid", "extract",
                  "decimate", "parts", "articulate", "render", "compose"});
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.threads = doc.value("threads", cfg.threads);
  if (doc.contains("normalize")) {
    const auto& n = doc["normalize"];
    reject_unknown(n, path + ":/normalize", {"margin"});
    cfg.normalize.margin = n.value("margin", cfg.normalize.margin);
  }
  if (doc.contains("sdf")) {
    const auto& s = doc["sdf"];
    reject_unknown(s, path + ":/sdf",
                   {"leaf_size", "exact_winding_max_tris", "grouping"});
    cfg.sdf.leaf_size = s.value("leaf_size", cfg.sdf.leaf_size);
    cfg.sdf.exact_winding_max_tris =
        s.value("exact_winding_max_tris", cfg.sdf.exact_winding_max_tris);
    cfg.sdf.grouping = s.value("grouping", cfg.sdf.grouping);
  }
  if (doc.contains("grid")) {
    // Alias section: band parameters shared with /extract.
    const auto& g = doc["grid"];
    reject_unknown(g, path + ":/grid", {"tau_cells", "resolution"});
    cfg.extract.tau_cells = g.value("tau_cells", cfg.extract.tau_cells);
    cfg.extract.resolution = g.value("resolution", cfg.extract.resolution);
  }
  if (doc.contains("extract")) {
    const auto& e = doc["extract"];
    reject_unknown(e, path + ":/extract",
                   {"resolution", "qef_mode", "irls_iters", "lambda", "clamp",
                    "tau_cells", "sharp_angle_deg", "sharp_weight",
                    "prior_divisor", "dilation", "hier_tau_cells"});
    cfg.extract.resolution = e.value("resolution", cfg.extract.resolution);
    cfg.extract.qef_mode = e.value("qef_mode", cfg.extract.qef_mode);
    cfg.extract.irls_iters = e.value("irls_iters", cfg.extract.irls_iters);
    cfg.extract.lambda = e.value("lambda", cfg.extract.lambda);
    cfg.extract.clamp = e.value("clamp", cfg.extract.clamp);
    cfg.extract.tau_cells = e.value("tau_cells", cfg.extract.tau_cells);
    cfg.extract.sharp_angle_deg =
        e.value("sharp_angle_deg", cfg.extract.sharp_angle_deg);
    cfg.extract.sharp_weight = e.value("sharp_weight", cfg.extract.sharp_weight);
    cfg.extract.prior_divisor = e.value("prior_divisor", cfg.extract.prior_divisor);
    cfg.extract.dilation = e.value("dilation", cfg.extract.dilation);
    cfg.extract.hier_tau_cells =
        e.value("hier_tau_cells", cfg.extract.hier_tau_cells);
  }
  if (doc.contains("decimate")) {
    const auto& d = doc["decimate"];
    reject_unknown(d, path + ":/decimate",
                   {"enabled", "target_faces", "preserve_sharp", "sharp_angle_deg"});
    cfg.decimate.enabled = d.value("enabled", cfg.decimate.enabled);
    cfg.decimate.target_faces = d.value("target_faces", cfg.decimate.target_faces);
    cfg.decimate.preserve_sharp =
        d.value("preserve_sharp", cfg.decimate.preserve_sharp);
    cfg.decimate.sharp_angle_deg =
        d.value("sharp_angle_deg", cfg.decimate.sharp_angle_deg);
  }
  if (doc.contains("parts")) {
    const auto& p = doc["parts"];
    reject_unknown(p, path + ":/parts", {"sample_count", "nms_iou"});
    cfg.parts.sample_count = p.value("sample_count", cfg.parts.sample_count);
    cfg.parts.nms_iou = p.value("nms_iou", cfg.parts.nms_iou);
  }
  if (doc.contains("articulate")) {
    const auto& a = doc["articulate"];
    reject_unknown(a, path + ":/articulate",
                   {"contact_tolerance", "density", "friction", "adjudicator",
                    "density_table"});
    cfg.articulate.contact_tolerance =
        a.value("contact_tolerance", cfg.articulate.contact_tolerance);
    cfg.articulate.density = a.value("density", cfg.articulate.density);
    cfg.articulate.friction = a.value("friction", cfg.articulate.friction);
    cfg.articulate.adjudicator = a.value("adjudicator", cfg.articulate.adjudicator);
    if (a.contains("density_table"))
      for (const auto& [key, value] : a["density_table"].items())
        cfg.articulate.density_table[std::stoi(key)] = value.get<double>();
  }
  if (doc.contains("render")) {
    const auto& r = doc["render"];
    reject_unknown(r, path + ":/render",
                   {"mode", "width", "height", "views", "elevation_deg", "radius",
                    "fov_y_deg", "half_height"});
    cfg.render.mode = r.value("mode", cfg.render.mode);
    cfg.render.width = r.value("width", cfg.render.width);
    cfg.render.height = r.value("height", cfg.render.height);
    cfg.render.views = r.value("views", cfg.render.views);
    cfg.render.elevation_deg = r.value("elevation_deg", cfg.render.elevation_deg);
    cfg.render.radius = r.value("radius", cfg.render.radius);
    cfg.render.fov_y_deg = r.value("fov_y_deg", cfg.render.fov_y_deg);
    cfg.render.half_height = r.value("half_height", cfg.render.half_height);
  }
  if (doc.contains("compose")) {
    const auto& c = doc["compose"];
    reject_unknown(c, path + ":/compose", {"min_gap", "max_iters"});
    cfg.compose.min_gap = c.value("min_gap", cfg.compose.min_gap);
    cfg.compose.max_iters = c.value("max_iters", cfg.compose.max_iters);
  }
  cfg.check();
  return cfg;
}

void PipelineConfig::check() const {
  range_check(threads >= 0, "/threads", "must be >= 0");
  range_check(normalize.margin >= 0.0 && normalize.margin < 0.5,
              "/normalize/margin", "must be in [0, 0.5)");
  range_check(sdf.leaf_size >= 1, "/sdf/leaf_size", "must be >= 1");
  range_check(sdf.exact_winding_max_tris >= 0, "/sdf/exact_winding_max_tris",
              "must be >= 0");
  range_check(sdf.grouping == "none" || sdf.grouping == "morton",
              "/sdf/grouping", "must be 'none' or 'morton'");
  range_check(extract.resolution >= 8, "/extract/resolution", "must be >= 8");
  range_check(extract.qef_mode == "l2" || extract.qef_mode == "linf",
              "/extract/qef_mode", "must be 'l2' or 'linf'");
  range_check(extract.irls_iters >= 1, "/extract/irls_iters", "must be >= 1");
  range_check(extract.lambda >= 0.0, "/extract/lambda", "must be >= 0");
  range_check(extract.tau_cells >= 2.0, "/extract/tau_cells", "must be >= 2");
  range_check(extract.hier_tau_cells >= 2.0, "/extract/hier_tau_cells",
              "must be >= 2");
  range_check(extract.sharp_angle_deg > 0.0 && extract.sharp_angle_deg < 180.0,
              "/extract/sharp_angle_deg", "must be in (0, 180)");
  range_check(extract.sharp_weight >= 1.0, "/extract/sharp_weight", "must be >= 1");
  range_check(extract.prior_divisor >= 2, "/extract/prior_divisor", "must be >= 2");
  range_check(extract.resolution % extract.prior_divisor == 0,
              "/extract/prior_divisor", "must divide resolution");
  range_check(extract.dilation >= 0, "/extract/dilation", "must be >= 0");
  // Sign-change cells and their face rings must stay inside the lattice;
  // the wider distance band may clip at the domain boundary harmlessly.
  range_check(normalize.margin * extract.resolution >= 3.0, "/normalize/margin",
              "margin leaves fewer than 3 cells of boundary clearance");
  range_check(decimate.target_faces >= 4, "/decimate/target_faces", "must be >= 4");
  range_check(decimate.sharp_angle_deg > 0.0 && decimate.sharp_angle_deg < 180.0,
              "/decimate/sharp_angle_deg", "must be in (0, 180)");
  range_check(parts.sample_count >= 1, "/parts/sample_count", "must be >= 1");
  range_check(parts.nms_iou >= 0.0 && parts.nms_iou <= 1.0, "/parts/nms_iou",
              "must be in [0, 1]");
  range_check(articulate.contact_tolerance > 0.0, "/articulate/contact_tolerance",
              "must be > 0");
  range_check(articulate.density > 0.0, "/articulate/density", "must be > 0");
  range_check(articulate.friction >= 0.0, "/articulate/friction", "must be >= 0");
  for (const auto& [part, density] : articulate.density_table)
    range_check(density > 0.0,
                "/articulate/density_table/" + std::to_string(part),
                "must be > 0");
  range_check(render.mode == "orthographic" || render.mode == "perspective",
              "/render/mode", "must be 'orthographic' or 'perspective'");
  range_check(render.width >= 1 && render.height >= 1, "/render/width",
              "dimensions must be >= 1");
  range_check(render.views >= 1, "/render/views", "must be >= 1");
  range_check(render.radius > 0.0, "/render/radius", "must be > 0");
  range_check(render.fov_y_deg > 0.0 && render.fov_y_deg < 180.0,
              "/render/fov_y_deg", "must be in (0, 180)");
  range_check(render.half_height > 0.0, "/render/half_height", "must be > 0");
  range_check(compose.min_gap >= 0.0, "/compose/min_gap", "must be >= 0");
  range_check(compose.max_iters >= 1, "/compose/max_iters", "must be >= 1");
}

ExtractionConfig PipelineConfig::extraction_config() const {
  ExtractionConfig ec;
  ec.resolution = extract.resolution;
  ec.qef_mode = extract.qef_mode == "l2" ? QefMode::L2 : QefMode::LInf;
  ec.irls_iterations = extract.irls_iters;
  ec.lambda = extract.lambda;
  ec.clamp_to_cell = extract.clamp;
  ec.sharp_angle = extract.sharp_angle_deg * M_PI / 180.0;
  ec.sharp_weight = extract.sharp_weight;
  return ec;
}

const StageRecord* RunManifest::find(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

void RunManifest::save(const std::string& path) const {
  json doc;
  doc["stages"] = json::array();
  for (const auto& s : stages) {
    json j;
    j["name"] = s.name;
    j["status"] = s.status;
    j["input_hash"] = s.input_hash;
    j["output_hash"] = s.output_hash;
    j["millis"] = s.millis;
    j["counters"] = s.counters;
    doc["stages"].push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  RunManifest manifest;
  for (const auto& j : doc.value("stages", json::array())) {
    StageRecord s;
    s.name = j.value("name", "");
    s.status = j.value("status", "");
    s.input_hash = j.value("input_hash", "");
    s.output_hash = j.value("output_hash", "");
    s.millis = j.value("millis", 0.0);
    if (j.contains("counters"))
      for (const auto& [key, value] : j["counters"].items())
        s.counters[key] = value.get<double>();
    manifest.stages.push_back(std::move(s));
  }
  return manifest;
}

namespace {

std::string combined_file_hash(const std::vector<std::string>& files) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    std::uint64_t fh = hash_file(f);
    h = fnv1a64(&fh, sizeof(fh), h);
  }
  return hash_hex(h);
}

/// Executes stages in order with content-hash resumability. A stage is
/// skipped when the previous run finished it with the same input hash and
/// its outputs are still intact.
class StageRunner {
 public:
  StageRunner(std::string out_dir, const PipelineConfig& config)
      : out_dir_(std::move(out_dir)) {
    fs::create_directories(out_dir_);
    manifest_path_ = out_dir_ + "/manifest.json";
    if (fs::exists(manifest_path_)) previous_ = RunManifest::load(manifest_path_);
    set_thread_count(config.threads);
  }

  std::string path(const std::string& name) const { return out_dir_ + "/" + name; }

  bool run(const std::string& name, const std::string& input_descriptor,
           const std::vector<std::string>& outputs,
           const std::function<void(StageRecord&)>& body) {
    StageRecord record;
    record.name = name;
    record.input_hash = hash_hex(fnv1a64(input_descriptor.data(),
                                         input_descriptor.size()));
    const StageRecord* prev = previous_.find(name);
    bool reusable = prev && (prev->status == "done" || prev->status == "skipped") &&
                    prev->input_hash == record.input_hash;
    if (reusable) {
      bool intact = true;
      for (const auto& f : outputs)
        if (!fs::exists(f)) intact = false;
      if (intact && combined_file_hash(outputs) == prev->output_hash) {
        record.status = "skipped";
        record.output_hash = prev->output_hash;
        record.counters = prev->counters;
        manifest_.stages.push_back(record);
        hashes_[name] = record.output_hash;
        ++result_.skipped_stages;
        return false;
      }
    }
    auto start = std::chrono::steady_clock::now();
    try {
      body(record);
    } catch (...) {
      record.status = "failed";
      record.millis = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start).count();
      manifest_.stages.push_back(record);
      manifest_.save(manifest_path_);
      throw;
    }
    record.millis = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start).count();
    record.status = "done";
    record.output_hash = combined_file_hash(outputs);
    manifest_.stages.push_back(record);
    hashes_[name] = record.output_hash;
    ++result_.executed_stages;
    return true;
  }

  const std::string& output_hash(const std::string& name) const {
    static const std::string empty;
    auto it = hashes_.find(name);
    return it == hashes_.end() ? empty : it->second;
  }

  CommandResult finish(std::vector<std::string> outputs) {
    manifest_.save(manifest_path_);
    result_.manifest = manifest_;
    result_.outputs = std::move(outputs);
    return result_;
  }

 private:
  std::string out_dir_;
  std::string manifest_path_;
  RunManifest previous_;
  RunManifest manifest_;
  CommandResult result_;
  std::map<std::string, std::string> hashes_;
};

std::string describe_extract(const PipelineConfig& c) {
  std::ostringstream os;
  os << "N=" << c.extract.resolution << "|mode=" << c.extract.qef_mode
     << "|iters=" << c.extract.irls_iters << "|lambda=" << c.extract.lambda
     << "|clamp=" << c.extract.clamp << "|tau=" << c.extract.tau_cells
     << "|sharp=" << c.extract.sharp_angle_deg << "," << c.extract.sharp_weight
     << "|leaf=" << c.sdf.leaf_size << "|wexact=" << c.sdf.exact_winding_max_tris;
  return os.str();
}

Camera camera_from_config(const PipelineConfig::Render& r) {
  Camera cam;
  cam.mode = r.mode == "perspective" ? CameraMode::Perspective
                                     : CameraMode::Orthographic;
  cam.width = r.width;
  cam.height = r.height;
  cam.fov_y = r.fov_y_deg * M_PI / 180.0;
  cam.half_height = r.half_height;
  return cam;
}

void save_transform_json(const NormalizationTransform& t, const std::string& path) {
  json doc;
  doc["scale"] = t.scale;
  doc["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
}

NormalizationTransform load_transform_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json doc;
  in >> doc;
  NormalizationTransform t;
  t.scale = doc["scale"].get<double>();
  t.translation = Vec3(doc["translation"][0].get<double>(),
                       doc["translation"][1].get<double>(),
                       doc["translation"][2].get<double>());
  return t;
}

}  // namespace

Camera load_camera_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  Camera cam;
  std::string mode = doc.value("mode", "orthographic");
  cam.mode = mode == "perspective" ? CameraMode::Perspective
                                   : CameraMode::Orthographic;
  auto vec = [&](const char* key, const Vec3& fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& a = doc[key];
    if (!a.is_array() || a.size() != 3)
      throw ValidationError(path + ": /" + key + ": expected [x,y,z]");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };
  cam.position = vec("position", cam.position);
  cam.look_at = vec("look_at", cam.look_at);
  cam.up = vec("up", cam.up);
  cam.fov_y = doc.value("fov_y_deg", 45.0) * M_PI / 180.0;
  cam.half_height = doc.value("half_height", 0.5);
  cam.width = doc.value("width", 512);
  cam.height = doc.value("height", 512);
  cam.check();
  return cam;
}

void save_camera_json(const Camera& cam, const std::string& path) {
  json doc;
  doc["mode"] = cam.mode == CameraMode::Perspective ? "perspective" : "orthographic";
  doc["position"] = {cam.position.x(), cam.position.y(), cam.position.z()};
  doc["look_at"] = {cam.look_at.x(), cam.look_at.y(), cam.look_at.z()};
  doc["up"] = {cam.up.x(), cam.up.y(), cam.up.z()};
  doc["fov_y_deg"] = cam.fov_y * 180.0 / M_PI;
  doc["half_height"] = cam.half_height;
  doc["width"] = cam.width;
  doc["height"] = cam.height;
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
}


CommandResult cmd_remesh(const std::string& input_mesh, const std::string& out_dir,
                         const PipelineConfig& config) {
  config.check();
  StageRunner runner(out_dir, config);
  const std::string input_hash = hash_hex(hash_file(input_mesh));

  const std::string normalized = runner.path("normalized.ply");
  const std::string transform_file = runner.path("transform.json");
  runner.run("normalize",
             "normalize|" + input_hash + "|margin=" +
                 std::to_string(config.normalize.margin),
             {normalized, transform_file}, [&](StageRecord& rec) {
               TriangleMesh mesh = load_mesh(input_mesh);
               auto [norm, transform] =
                   normalize_to_unit_cube(mesh, config.normalize.margin);
               save_mesh(norm, normalized, MeshFormat::PlyBinary);
               save_transform_json(transform, transform_file);
               rec.counters["input_faces"] = double(mesh.faces.size());
             });

  const std::string grid_file = runner.path("grid.mpsg");
  runner.run("grid",
             "grid|" + runner.output_hash("normalize") + "|" + describe_extract(config),
             {grid_file}, [&](StageRecord& rec) {
               TriangleMesh mesh = load_mesh(normalized);
               MeshBvh bvh(mesh, config.sdf.leaf_size);
               SdfEvaluator sdf(bvh, mesh, config.sdf.exact_winding_max_tris);
               SampleStats stats;
               SparseSdfGrid grid = sample_sparse_grid(
                   sdf, config.extract.resolution, config.tau(), &stats);
               grid.save(grid_file);
               rec.counters["active_cells"] = double(grid.cells.size());
               rec.counters["center_evaluations"] = double(stats.center_evaluations);
               rec.counters["corner_evaluations"] = double(stats.corner_evaluations);
               rec.counters["winding_evaluations"] =
                   double(stats.winding_evaluations);
             });

  const std::string extracted = runner.path("extracted.ply");
  runner.run("extract",
             "extract|" + runner.output_hash("grid") + "|" + describe_extract(config),
             {extracted}, [&](StageRecord& rec) {
               TriangleMesh mesh = load_mesh(normalized);
               MeshBvh bvh(mesh, config.sdf.leaf_size);
               SparseSdfGrid grid = SparseSdfGrid::load(grid_file);
               ExtractionConfig ec = config.extraction_config();
               std::vector<HermiteSample> hermite = collect_hermite(grid, bvh, mesh);
               if (ec.sharp_weight > 1.0)
                 mark_sharp_samples(hermite, mesh, ec.sharp_angle,
                                    0.75 * grid.cell_size());
               ExtractStats stats;
               TriangleMesh out = extract_dual_mesh(grid, hermite, ec, &stats);
               if (out.faces.empty())
                 throw StageError("extraction produced an empty mesh");
               save_mesh(out, extracted, MeshFormat::PlyBinary);
               rec.counters["vertices"] = double(out.vertices.size());
               rec.counters["faces"] = double(out.faces.size());
               rec.counters["qef_fallbacks"] = double(stats.qef.singular_fallbacks);
               rec.counters["qef_clamped"] = double(stats.qef.clamped);
             });

  std::string current = extracted;
  std::string current_stage = "extract";
  if (config.decimate.enabled) {
    const std::string decimated = runner.path("decimated.ply");
    std::ostringstream desc;
    desc << "decimate|" << runner.output_hash("extract")
         << "|target=" << config.decimate.target_faces
         << "|sharp=" << config.decimate.preserve_sharp << ","
         << config.decimate.sharp_angle_deg;
    runner.run("decimate", desc.str(), {decimated}, [&](StageRecord& rec) {
      TriangleMesh mesh = load_mesh(extracted);
      DecimateStats stats;
      TriangleMesh out = decimate_to(mesh, config.decimate.target_faces,
                                     config.decimate.preserve_sharp,
                                     config.decimate.sharp_angle_deg * M_PI / 180.0,
                                     &stats);
      save_mesh(out, decimated, MeshFormat::PlyBinary);
      rec.counters["faces"] = double(out.faces.size());
      rec.counters["collapses"] = double(stats.collapses);
      rec.counters["rejected_flips"] = double(stats.rejected_flip);
      rec.counters["reached_target"] = stats.reached_target ? 1.0 : 0.0;
    });
    current = decimated;
    current_stage = "decimate";
  }

  const std::string final_mesh = runner.path("remeshed.obj");
  runner.run("finalize", "finalize|" + runner.output_hash(current_stage),
             {final_mesh}, [&](StageRecord&) {
               TriangleMesh mesh = load_mesh(current);
               NormalizationTransform t = load_transform_json(transform_file);
               save_mesh(t.apply_inverse(mesh), final_mesh, MeshFormat::Obj);
             });
  return runner.finish({final_mesh});
}

CommandResult cmd_extract_hierarchical(const std::string& input_mesh,
                                       const std::string& out_dir,
                                       const PipelineConfig& config) {
  config.check();
  const int fine_n = config.extract.resolution;
  const int coarse_n = std::max(8, fine_n / 8);
  const int prior_n = fine_n / config.extract.prior_divisor;
  if (prior_n < 4)
    throw ValidationError("/extract/prior_divisor: prior resolution below 4");

  StageRunner runner(out_dir, config);
  const std::string input_hash = hash_hex(hash_file(input_mesh));

  const std::string normalized = runner.path("normalized.ply");
  const std::string transform_file = runner.path("transform.json");
  runner.run("normalize",
             "normalize|" + input_hash + "|margin=" +
                 std::to_string(config.normalize.margin),
             {normalized, transform_file}, [&](StageRecord&) {
               TriangleMesh mesh = load_mesh(input_mesh);
               auto [norm, transform] =
                   normalize_to_unit_cube(mesh, config.normalize.margin);
               save_mesh(norm, normalized, MeshFormat::PlyBinary);
               save_transform_json(transform, transform_file);
             });

  const std::string coarse_mesh_file = runner.path("coarse.ply");
  runner.run("coarse_remesh",
             "coarse|" + runner.output_hash("normalize") + "|N=" +
                 std::to_string(coarse_n) + "|" + describe_extract(config),
             {coarse_mesh_file}, [&](StageRecord& rec) {
               TriangleMesh mesh = load_mesh(normalized);
               ExtractionConfig ec = config.extraction_config();
               ec.resolution = coarse_n;
               TriangleMesh coarse =
                   remesh_watertight(mesh, ec, config.extract.tau_cells / coarse_n);
               if (coarse.faces.empty())
                 throw StageError("coarse extraction produced an empty mesh");
               save_mesh(coarse, coarse_mesh_file, MeshFormat::PlyBinary);
               rec.counters["faces"] = double(coarse.faces.size());
             });

  const std::string prior_file = runner.path("prior.mpvx");
  const std::string prior_json = runner.path("prior.json");
  const std::string encoding_csv = runner.path("prior_encoding.csv");
  runner.run("prior",
             "prior|" + runner.output_hash("coarse_remesh") + "|M=" +
                 std::to_string(prior_n) + "|dilate=" +
                 std::to_string(config.extract.dilation),
             {prior_file, prior_json, encoding_csv}, [&](StageRecord& rec) {
               TriangleMesh coarse = load_mesh(coarse_mesh_file);
               VoxelPrior prior = voxelize_surface(coarse, prior_n);
               prior = dilate(prior, config.extract.dilation);
               prior.provenance = coarse_mesh_file;
               prior.save_binary(prior_file);
               std::ofstream pj(prior_json);
               pj << prior.to_json() << '\n';
               positional_encoding(prior).save_csv(encoding_csv);
               rec.counters["occupied"] = double(prior.occupied_count());
             });

  const std::string fine_norm = runner.path("fine_extracted.ply");
  const std::string coverage_file = runner.path("coverage.json");
  runner.run(
      "hierarchical_extract",
      "hier|" + runner.output_hash("normalize") + "|" +
          runner.output_hash("prior") + "|" + describe_extract(config) + "|htau=" +
          std::to_string(config.extract.hier_tau_cells),
      {fine_norm, coverage_file}, [&](StageRecord& rec) {
        TriangleMesh mesh = load_mesh(normalized);
        MeshBvh bvh(mesh, config.sdf.leaf_size);
        SdfEvaluator sdf(bvh, mesh, config.sdf.exact_winding_max_tris);
        VoxelPrior prior = VoxelPrior::load_binary(prior_file);
        HierarchicalStats stats;
        json coverage;
        coverage["missed_sign_change_cells"] = json::array();
        try {
          TriangleMesh fine = extract_hierarchical(sdf, prior, fine_n,
                                                   config.hier_tau(),
                                                   config.extraction_config(),
                                                   &stats);
          if (fine.faces.empty() && !stats.empty_prior)
            throw StageError("hierarchical extraction produced an empty mesh");
          ValidationReport report = validate(fine);
          coverage["watertight"] = report.watertight;
          coverage["empty_prior"] = stats.empty_prior;
          std::ofstream(coverage_file) << coverage.dump(2) << '\n';
          if (!fine.faces.empty())
            save_mesh(fine, fine_norm, MeshFormat::PlyBinary);
          else
            std::ofstream(fine_norm) << "";  // placeholder for empty result
          rec.counters["coarse_occupied"] = double(stats.coarse_occupied);
          rec.counters["mid_evaluations"] = double(stats.mid_evaluations);
          rec.counters["fine_cells_evaluated"] = double(stats.fine_cells_evaluated);
          rec.counters["fine_point_evaluations"] =
              double(stats.fine_point_evaluations);
        } catch (const BandIncompleteError& e) {
          for (const auto& c : e.missing_cells)
            coverage["missed_sign_change_cells"].push_back({c.x(), c.y(), c.z()});
          coverage["watertight"] = false;
          std::ofstream(coverage_file) << coverage.dump(2) << '\n';
          throw;
        }
      });

  const std::string final_mesh = runner.path("fine.obj");
  runner.run("finalize", "finalize|" + runner.output_hash("hierarchical_extract"),
             {final_mesh}, [&](StageRecord&) {
               TriangleMesh mesh = load_mesh(fine_norm, MeshFormat::PlyBinary);
               NormalizationTransform t = load_transform_json(transform_file);
               save_mesh(t.apply_inverse(mesh), final_mesh, MeshFormat::Obj);
             });
  return runner.finish({final_mesh, prior_file});
}

CommandResult cmd_parts(const std::string& input_mesh, const std::string& masks_file,
                        const std::string& out_dir, const PipelineConfig& config) {
  config.check();
  StageRunner runner(out_dir, config);
  const std::string input_hash = hash_hex(hash_file(input_mesh));

  const std::string points_file = runner.path("points.txt");
  runner.run("sample",
             "sample|" + input_hash + "|count=" +
                 std::to_string(config.parts.sample_count) + "|seed=" +
                 std::to_string(config.seed),
             {points_file}, [&](StageRecord& rec) {
               TriangleMesh mesh = load_mesh(input_mesh);
               PointCloudSample sample =
                   sample_surface(mesh, config.parts.sample_count, config.seed);
               sample.save_points(points_file);
               rec.counters["points"] = double(sample.size());
             });

  const std::string labeling_file = runner.path("labeling.json");
  const std::string labeled_ply = runner.path("labeled.ply");
  std::string masks_hash =
      masks_file.empty() ? std::string("none") : hash_hex(hash_file(masks_file));
  runner.run("label",
             "label|" + runner.output_hash("sample") + "|masks=" + masks_hash +
                 "|nms=" + std::to_string(config.parts.nms_iou),
             {labeling_file, labeled_ply}, [&](StageRecord& rec) {
               TriangleMesh mesh = load_mesh(input_mesh);
               PointCloudSample sample = PointCloudSample::load_points(points_file);
               PartLabeling labeling;
               if (masks_file.empty()) {
                 labeling.face_part.assign(mesh.faces.size(), 0);
                 labeling.part_count = 1;
                 rec.counters["no_masks_warning"] = 1.0;
               } else {
                 auto masks = load_masks_json(masks_file, sample.size());
                 auto kept = mask_nms(masks, config.parts.nms_iou);
                 rec.counters["masks_in"] = double(masks.size());
                 rec.counters["masks_kept"] = double(kept.size());
                 PartLabeling partial = project_to_faces(kept, sample, mesh);
                 PropagateReport prop_report;
                 labeling = propagate_labels(partial, mesh, &prop_report);
                 rec.counters["fresh_components"] =
                     double(prop_report.fresh_components.size());
               }
               std::ofstream(labeling_file) << labeling.to_json() << '\n';
               TriangleMesh labeled = mesh;
               labeled.face_labels = labeling.face_part;
               save_mesh(labeled, labeled_ply, MeshFormat::PlyBinary);
               rec.counters["parts"] = double(labeling.part_count);
             });

  // Split and remesh each part independently.
  TriangleMesh labeled = load_mesh(labeled_ply, MeshFormat::PlyBinary);
  PartLabeling labeling;
  labeling.face_part = labeled.face_labels;
  labeling.part_count = labeling.face_part.empty()
                            ? 0
                            : *std::max_element(labeling.face_part.begin(),
                                                labeling.face_part.end()) + 1;
  std::vector<TriangleMesh> raw_parts = split_parts(labeling, labeled);
  std::vector<std::string> part_files;
  for (std::size_t k = 0; k < raw_parts.size(); ++k) {
    const std::string part_file = runner.path("part_" + std::to_string(k) + ".obj");
    part_files.push_back(part_file);
    std::ostringstream desc;
    desc << "part" << k << "|" << runner.output_hash("label") << "|"
         << describe_extract(config);
    runner.run("remesh_part_" + std::to_string(k), desc.str(), {part_file},
               [&, k](StageRecord& rec) {
                 auto [norm, transform] = normalize_to_unit_cube(
                     raw_parts[k], config.normalize.margin);
                 ExtractionConfig ec = config.extraction_config();
                 TriangleMesh part = remesh_watertight(norm, ec, config.tau());
                 if (part.faces.empty())
                   throw StageError("part remesh produced an empty mesh");
                 save_mesh(transform.apply_inverse(part), part_file,
                           MeshFormat::Obj);
                 rec.counters["faces"] = double(part.faces.size());
               });
  }
  std::vector<std::string> outputs = part_files;
  outputs.push_back(labeling_file);
  return runner.finish(std::move(outputs));
}

CommandResult cmd_articulate(const std::string& parts_dir,
                             const std::string& targets_dir,
                             const std::string& out_dir,
                             const PipelineConfig& config) {
  config.check();
  StageRunner runner(out_dir, config);

  // Parts are part_<k>.obj/.ply files in index order.
  std::vector<std::string> part_files;
  for (int k = 0;; ++k) {
    std::string base = parts_dir + "/part_" + std::to_string(k);
    if (fs::exists(base + ".obj")) part_files.push_back(base + ".obj");
    else if (fs::exists(base + ".ply")) part_files.push_back(base + ".ply");
    else break;
  }
  if (part_files.empty())
    throw ValidationError("no part_<k>.obj/.ply files in " + parts_dir);

  std::uint64_t parts_hash = 0xcbf29ce484222325ULL;
  for (const auto& f : part_files) {
    std::uint64_t h = hash_file(f);
    parts_hash = fnv1a64(&h, sizeof(h), parts_hash);
  }

  std::vector<TriangleMesh> parts;
  for (const auto& f : part_files) parts.push_back(load_mesh(f));

  // Rendered views for the adjudicator seam.
  std::vector<std::string> view_files;
  for (int v = 0; v < config.render.views; ++v)
    view_files.push_back(runner.path("view_" + std::to_string(v) + ".pbm"));
  {
    std::ostringstream desc;
    desc << "views|" << hash_hex(parts_hash) << "|" << config.render.views << "x"
         << config.render.width << "x" << config.render.height << "|"
         << config.render.mode << "|" << config.render.radius << "|"
         << config.render.elevation_deg;
    runner.run("views", desc.str(), view_files, [&](StageRecord&) {
      TriangleMesh all;
      for (const auto& p : parts) {
        int base = int(all.vertices.size());
        all.vertices.insert(all.vertices.end(), p.vertices.begin(), p.vertices.end());
        for (const auto& f : p.faces)
          all.faces.emplace_back(f[0] + base, f[1] + base, f[2] + base);
      }
      Vec3 center = all.bounds().center();
      auto cameras = uniform_trajectory(config.render.views,
                                        config.render.elevation_deg * M_PI / 180.0,
                                        config.render.radius, center);
      for (std::size_t v = 0; v < cameras.size(); ++v) {
        Camera cam = cameras[v];
        Camera proto = camera_from_config(config.render);
        cam.mode = proto.mode;
        cam.width = proto.width;
        cam.height = proto.height;
        cam.fov_y = proto.fov_y;
        cam.half_height = proto.half_height;
        save_pbm(rasterize(all, cam), view_files[v]);
      }
    });
  }

  const std::string graph_file = runner.path("graph.json");
  const std::string urdf_file = runner.path("asset.urdf");
  std::ostringstream desc;
  desc << "articulate|" << hash_hex(parts_hash) << "|tol="
       << config.articulate.contact_tolerance << "|density="
       << config.articulate.density << "|friction=" << config.articulate.friction
       << "|adj=" << config.articulate.adjudicator << "|targets=";
  if (!targets_dir.empty() && fs::exists(targets_dir)) {
    std::vector<std::string> target_files;
    for (const auto& entry : fs::recursive_directory_iterator(targets_dir))
      if (entry.is_regular_file()) target_files.push_back(entry.path().string());
    std::sort(target_files.begin(), target_files.end());
    std::uint64_t th = 0xcbf29ce484222325ULL;
    for (const auto& f : target_files) {
      std::uint64_t h = hash_file(f);
      th = fnv1a64(&h, sizeof(h), th);
    }
    desc << hash_hex(th);
  } else {
    desc << "none";
  }

  runner.run("articulate", desc.str(), {graph_file, urdf_file}, [&](StageRecord& rec) {
    PartGrouping grouping = group_parts(parts, config.articulate.contact_tolerance);

    std::unique_ptr<Adjudicator> adjudicator;
    if (config.articulate.adjudicator == "heuristic")
      adjudicator = std::make_unique<HeuristicAdjudicator>();
    else
      adjudicator = std::make_unique<ExternalAdjudicator>(config.articulate.adjudicator);

    std::vector<KinematicGraph::Edge> edges;
    int unreliable_total = 0;
    json edge_log = json::array();
    for (const auto& [parent, child] : grouping.tree_edges) {
      auto candidates = generate_axis_candidates(parts[std::size_t(child)],
                                                 parts[std::size_t(parent)],
                                                 config.articulate.contact_tolerance);
      JointCandidate chosen = adjudicate(candidates, view_files, *adjudicator);
      KinematicGraph::Edge edge;
      edge.parent = parent;
      edge.child = child;
      edge.joint.type = chosen.type;
      edge.joint.axis = chosen.axis;
      edge.joint.origin = chosen.origin;

      std::string frames_dir =
          targets_dir.empty() ? "" : targets_dir + "/part_" + std::to_string(child);
      std::vector<std::string> frame_files;
      if (!frames_dir.empty() && fs::exists(frames_dir)) {
        for (const auto& entry : fs::directory_iterator(frames_dir))
          if (entry.path().extension() == ".pbm")
            frame_files.push_back(entry.path().string());
        std::sort(frame_files.begin(), frame_files.end());
      }
      json log;
      log["parent"] = parent;
      log["child"] = child;
      log["candidates"] = int(candidates.size());
      log["generator"] = std::string(1, chosen.generator);
      if (!frame_files.empty()) {
        Camera camera = load_camera_json(targets_dir + "/camera.json");
        std::vector<RasterImage> targets;
        for (const auto& f : frame_files) targets.push_back(load_pbm(f));
        MotionFit fit = fit_motion_range(parts[std::size_t(parent)],
                                         parts[std::size_t(child)], chosen,
                                         targets, camera);
        edge.joint.lower = fit.lower;
        edge.joint.upper = fit.upper;
        edge.fitted = true;
        int unreliable = int(std::count(fit.unreliable.begin(),
                                        fit.unreliable.end(), true));
        unreliable_total += unreliable;
        log["frames"] = int(targets.size());
        log["unreliable_frames"] = unreliable;
      } else {
        // Documented fallback: full default range, flagged unfitted.
        if (edge.joint.type == JointType::Revolute) {
          edge.joint.lower = -M_PI;
          edge.joint.upper = M_PI;
        } else {
          double d = parts[std::size_t(parent)].bounds().diagonal();
          edge.joint.lower = -d;
          edge.joint.upper = d;
        }
        edge.fitted = false;
        log["unfitted"] = true;
      }
      edges.push_back(edge);
      edge_log.push_back(std::move(log));
    }
    for (int part : grouping.disconnected) {
      KinematicGraph::Edge edge;
      edge.parent = grouping.root;
      edge.child = part;
      edge.joint.type = JointType::Fixed;
      edge.fitted = false;
      edges.push_back(edge);
      json log;
      log["parent"] = grouping.root;
      log["child"] = part;
      log["disconnected_fixed"] = true;
      edge_log.push_back(std::move(log));
    }

    KinematicGraph graph =
        build_kinematic_graph(grouping.part_count, grouping.root, std::move(edges));

    std::vector<PhysicalProps> props;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      double density = config.articulate.density;
      auto it = config.articulate.density_table.find(int(k));
      if (it != config.articulate.density_table.end()) density = it->second;
      props.push_back(assign_physical_props(parts[k], density,
                                            config.articulate.friction));
    }

    export_urdf(graph, props, part_files, urdf_file);

    json gj;
    gj["root"] = graph.root;
    gj["node_count"] = graph.node_count;
    gj["edges"] = json::array();
    for (const auto& e : graph.edges) {
      json j;
      j["parent"] = e.parent;
      j["child"] = e.child;
      j["type"] = joint_type_name(e.joint.type);
      j["axis"] = {e.joint.axis.x(), e.joint.axis.y(), e.joint.axis.z()};
      j["origin"] = {e.joint.origin.x(), e.joint.origin.y(), e.joint.origin.z()};
      j["lower"] = e.joint.lower;
      j["upper"] = e.joint.upper;
      j["fitted"] = e.fitted;
      gj["edges"].push_back(std::move(j));
    }
    gj["log"] = edge_log;
    gj["masses"] = json::array();
    for (const auto& p : props) gj["masses"].push_back(p.mass);
    std::ofstream(graph_file) << gj.dump(2) << '\n';
    rec.counters["edges"] = double(graph.edges.size());
    rec.counters["unreliable_frames"] = double(unreliable_total);
    rec.counters["disconnected"] = double(grouping.disconnected.size());
  });
  return runner.finish({urdf_file, graph_file});
}

CommandResult cmd_compose(const std::string& layout_file, const std::string& out_dir,
                          const PipelineConfig& config) {
  config.check();
  StageRunner runner(out_dir, config);
  SceneLayout layout = load_layout_json(layout_file);

  // Asset references resolve relative to the layout file.
  fs::path base = fs::path(layout_file).parent_path();
  std::uint64_t assets_hash = hash_file(layout_file);
  std::map<std::string, TriangleMesh> cache;
  AssetStore store = [&](const std::string& name) -> TriangleMesh {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    fs::path p = fs::path(name).is_absolute() ? fs::path(name) : base / name;
    if (!fs::exists(p)) throw ValidationError("missing asset: " + p.string());
    TriangleMesh mesh = load_mesh(p.string());
    cache[name] = mesh;
    return mesh;
  };
  for (const auto& p : layout.placements) {
    fs::path ap = fs::path(p.asset).is_absolute() ? fs::path(p.asset) : base / p.asset;
    if (!fs::exists(ap)) throw ValidationError("missing asset: " + ap.string());
    std::uint64_t h = hash_file(ap.string());
    assets_hash = fnv1a64(&h, sizeof(h), assets_hash);
  }

  const std::string scene_obj = runner.path("scene.obj");
  const std::string scene_manifest = runner.path("scene_manifest.json");
  const std::string report_file = runner.path("compose_report.json");
  std::ostringstream desc;
  desc << "compose|" << hash_hex(assets_hash) << "|gap=" << config.compose.min_gap
       << "|iters=" << config.compose.max_iters;
  runner.run("compose", desc.str(), {scene_obj, scene_manifest, report_file},
             [&](StageRecord& rec) {
               ComposedScene scene = place_assets(layout, store);
               CollisionReport report;
               scene = resolve_collisions(scene, config.compose.min_gap,
                                          config.compose.max_iters, &report);
               scene = align_to_ground(scene, layout.ground);
               export_scene_obj(scene, scene_obj, scene_manifest);
               json rj;
               rj["iterations"] = report.iterations;
               rj["resolved_pairs"] = json::array();
               for (auto [a, b] : report.resolved_pairs)
                 rj["resolved_pairs"].push_back({a, b});
               rj["unresolved_pairs"] = json::array();
               for (auto [a, b] : report.unresolved_pairs)
                 rj["unresolved_pairs"].push_back({a, b});
               std::ofstream(report_file) << rj.dump(2) << '\n';
               rec.counters["instances"] = double(scene.instances.size());
               rec.counters["resolved_pairs"] = double(report.resolved_pairs.size());
               rec.counters["unresolved_collisions"] =
                   double(report.unresolved_pairs.size());
             });
  return runner.finish({scene_obj, scene_manifest});
}

}  // namespace meshpipe
