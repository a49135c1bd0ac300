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

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "meshpipe/core.hpp"
#include "meshpipe/pipeline.hpp"

namespace {

using meshpipe::CommandResult;
using meshpipe::PipelineConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "pipeline config JSON");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "random seed (overrides config)");
  cmd->add_option("--threads", args.threads,
                  "worker threads, 0 = all cores (overrides config)");
}

PipelineConfig resolve_config(const CommonArgs& args) {
  PipelineConfig config;
  if (!args.config_path.empty()) config = PipelineConfig::load(args.config_path);
  // Flags beat config; MESHPIPE_THREADS is the fallback default.
  if (args.seed >= 0) config.seed = std::uint64_t(args.seed);
  if (args.threads >= 0) config.threads = args.threads;
  else if (config.threads == 0) {
    if (const char* env = std::getenv("MESHPIPE_THREADS"))
      config.threads = std::max(0, std::atoi(env));
  }
  config.check();
  return config;
}

void report(const CommandResult& result) {
  for (const auto& stage : result.manifest.stages)
    std::cout << "[" << stage.status << "] " << stage.name << " ("
              << stage.millis << " ms)\n";
  for (const auto& out : result.outputs) std::cout << "wrote " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"watertight remeshing, part, articulation and scene pipeline"};
  app.require_subcommand(1);

  CommonArgs remesh_args, extract_args, parts_args, artic_args, compose_args;
  std::string input, masks, parts_dir, targets_dir, layout;

  std::int64_t target_faces = -1;
  int preserve_sharp = -1;
  CLI::App* remesh = app.add_subcommand("remesh", "watertight remesh of a mesh");
  remesh->add_option("input", input, "input mesh (.obj/.ply)")->required();
  remesh->add_option("--target-faces", target_faces,
                     "decimate the result to this face budget");
  remesh->add_option("--preserve-sharp", preserve_sharp,
                     "keep sharp edges during decimation (0/1)");
  add_common(remesh, remesh_args);

  CLI::App* extract = app.add_subcommand(
      "extract", "hierarchical extraction with an occupancy prior");
  extract->add_option("input", input, "input mesh (.obj/.ply)")->required();
  add_common(extract, extract_args);

  CLI::App* parts = app.add_subcommand("parts", "part labeling and splitting");
  parts->add_option("input", input, "input mesh (.obj/.ply)")->required();
  parts->add_option("--masks", masks, "scored point masks JSON");
  add_common(parts, parts_args);

  CLI::App* articulate =
      app.add_subcommand("articulate", "joint inference and URDF export");
  articulate->add_option("parts_dir", parts_dir, "directory with part_<k> meshes")
      ->required();
  articulate->add_option("--targets", targets_dir,
                         "silhouette target directory (camera.json + part_<k>/)");
  add_common(articulate, artic_args);

  CLI::App* compose = app.add_subcommand("compose", "scene composition from layout");
  compose->add_option("layout", layout, "layout JSON")->required();
  add_common(compose, compose_args);

  CLI11_PARSE(app, argc, argv);

  try {
    CommandResult result;
    if (remesh->parsed()) {
      PipelineConfig config = resolve_config(remesh_args);
      if (target_faces >= 0) {
        config.decimate.enabled = true;
        config.decimate.target_faces = int(target_faces);
      }
      if (preserve_sharp >= 0) config.decimate.preserve_sharp = preserve_sharp != 0;
      config.check();
      result = meshpipe::cmd_remesh(input, remesh_args.out_dir, config);
    }
    else if (extract->parsed())
      result = meshpipe::cmd_extract_hierarchical(input, extract_args.out_dir,
                                                  resolve_config(extract_args));
    else if (parts->parsed())
      result = meshpipe::cmd_parts(input, masks, parts_args.out_dir,
                                   resolve_config(parts_args));
    else if (articulate->parsed())
      result = meshpipe::cmd_articulate(parts_dir, targets_dir, artic_args.out_dir,
                                        resolve_config(artic_args));
    else if (compose->parsed())
      result = meshpipe::cmd_compose(layout, compose_args.out_dir,
                                     resolve_config(compose_args));
    report(result);
    return 0;
  } catch (const meshpipe::AdjudicatorError& e) {
    std::cerr << "adjudicator error: " << e.what() << "\n";
    return 4;
  } catch (const meshpipe::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const meshpipe::StageError& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
