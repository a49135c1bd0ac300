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
#include <map>
#include <string>
#include <vector>

#include "meshpipe/dmc.hpp"
#include "meshpipe/mesh.hpp"
#include "meshpipe/render.hpp"

namespace meshpipe {

/// Camera description for silhouette target directories:
/// {mode, position, look_at, up, fov_y_deg, half_height, width, height}.
Camera load_camera_json(const std::string& path);
void save_camera_json(const Camera& cam, const std::string& path);

/// All stage parameters; every field is range-checked on load and unknown
/// JSON keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  struct Normalize {
    double margin = 0.1;
  } normalize;

  struct Sdf {
    int leaf_size = 8;
    int exact_winding_max_tris = 50000;
    std::string grouping = "morton";  // batch query grouping
  } sdf;

  struct Extract {
    int resolution = 128;
    std::string qef_mode = "linf";
    int irls_iters = 16;
    double lambda = 1e-3;
    bool clamp = true;
    double tau_cells = 3.0;       // band half-width in cells
    double sharp_angle_deg = 30.0;
    double sharp_weight = 2.0;
    int prior_divisor = 8;        // prior resolution = resolution / divisor
    int dilation = 1;
    double hier_tau_cells = 6.0;  // band width for the hierarchical path
  } extract;

  struct Decimate {
    bool enabled = false;
    int target_faces = 20000;  // no guidance upstream; documented default
    bool preserve_sharp = true;
    double sharp_angle_deg = 30.0;
  } decimate;

  struct Parts {
    int sample_count = 20000;
    double nms_iou = 0.5;
  } parts;

  struct Articulate {
    double contact_tolerance = 0.01;
    double density = 500.0;   // kg/m^3 default when no table given
    double friction = 0.5;
    std::string adjudicator = "heuristic";  // or external command line
    std::map<int, double> density_table;    // per-part overrides
  } articulate;

  struct Render {
    std::string mode = "orthographic";
    int width = 512;
    int height = 512;
    int views = 8;
    double elevation_deg = 20.0;
    double radius = 1.5;
    double fov_y_deg = 45.0;
    double half_height = 0.8;
  } render;

  struct Compose {
    double min_gap = 1e-3;
    int max_iters = 64;
  } compose;

  static PipelineConfig load(const std::string& path);
  void check() const;  // throws ValidationError on any out-of-range value

  ExtractionConfig extraction_config() const;
  double tau() const { return extract.tau_cells / extract.resolution; }
  double hier_tau() const { return extract.hier_tau_cells / extract.resolution; }
};

struct StageRecord {
  std::string name;
  std::string status;  // pending | done | failed | skipped
  std::string input_hash;
  std::string output_hash;
  double millis = 0.0;
  std::map<std::string, double> counters;
};

struct RunManifest {
  std::vector<StageRecord> stages;

  const StageRecord* find(const std::string& name) const;
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

struct CommandResult {
  RunManifest manifest;
  int executed_stages = 0;
  int skipped_stages = 0;
  std::vector<std::string> outputs;  // primary output files
};

CommandResult cmd_remesh(const std::string& input_mesh, const std::string& out_dir,
                         const PipelineConfig& config);

CommandResult cmd_extract_hierarchical(const std::string& input_mesh,
                                       const std::string& out_dir,
                                       const PipelineConfig& config);

/// masks_file may be empty: the whole mesh becomes a single part (warning).
CommandResult cmd_parts(const std::string& input_mesh, const std::string& masks_file,
                        const std::string& out_dir, const PipelineConfig& config);

/// targets_dir may be empty: joints get full default ranges, flagged
/// unfitted. Expected layout: targets_dir/camera.json plus
/// targets_dir/part_<child>/frame_*.pbm per articulated child.
CommandResult cmd_articulate(const std::string& parts_dir,
                             const std::string& targets_dir,
                             const std::string& out_dir,
                             const PipelineConfig& config);

CommandResult cmd_compose(const std::string& layout_file, const std::string& out_dir,
                          const PipelineConfig& config);

}  // namespace meshpipe
