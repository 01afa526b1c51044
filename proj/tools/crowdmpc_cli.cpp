// Copyright 2026 The crowdmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// crowdmpc command line: batch runs, trajectory plots, weight file checks.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crowdmpc/crowdmpc.hpp"

namespace {

int cmd_run(const std::string& manifest_path, const std::string& out_dir, int jobs) {
  crowdmpc::RunManifest m = crowdmpc::parse_manifest(manifest_path);
  if (!out_dir.empty()) m.output_dir = out_dir;
  if (jobs > 0) m.jobs = jobs;
  const crowdmpc::BatchResult r = crowdmpc::run_batch(m);
  crowdmpc::write_metrics_csv(r.cells, std::cout);
  if (r.errored_runs > 0) {
    std::cerr << r.errored_runs << " run(s) failed; see " << m.output_dir << "/errors.csv\n";
    return 1;
  }
  return 0;
}

int cmd_plot(const std::string& log_path, const std::string& svg_path) {
  std::ifstream in(log_path);
  if (!in) throw crowdmpc::Error("cannot open " + log_path);
  crowdmpc::emit_plot(crowdmpc::read_jsonl(in), svg_path);
  return 0;
}

int cmd_check_weights(const std::string& path) {
  const crowdmpc::LstmWeights w = crowdmpc::load_weights(path);
  std::cout << "ok: hidden " << w.hidden_size << ", grid " << w.grid << "x" << w.grid << ", extent " << w.extent_m
            << " m\n";
  return 0;
}

int cmd_init_weights(const std::string& path, std::uint64_t seed, double scale) {
  crowdmpc::save_weights(crowdmpc::LstmWeights::random(seed, scale), path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd navigation with best-response MPC"};
  app.require_subcommand(1);

  std::string manifest_path, out_dir;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "Run a batch described by a JSON manifest");
  run->add_option("--manifest", manifest_path, "Manifest file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the manifest)");
  run->add_option("--jobs", jobs, "Worker threads (overrides the manifest)")->check(CLI::PositiveNumber);

  std::string log_path, svg_path;
  auto* plot = app.add_subcommand("plot", "Render a JSONL trajectory log as SVG");
  plot->add_option("--log", log_path, "Trajectory log")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", svg_path, "SVG output path")->required();

  std::string weights_path;
  auto* check = app.add_subcommand("check-weights", "Validate a Social-LSTM weight file");
  check->add_option("--file", weights_path, "Weight file")->required();

  std::string init_path;
  std::uint64_t init_seed = 0;
  double init_scale = 0.1;
  auto* init = app.add_subcommand("init-weights", "Write randomly initialised Social-LSTM weights");
  init->add_option("--out", init_path, "Output path")->required();
  init->add_option("--seed", init_seed, "RNG seed");
  init->add_option("--scale", init_scale, "Uniform init half-width");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(manifest_path, out_dir, jobs);
    if (*plot) return cmd_plot(log_path, svg_path);
    if (*check) return cmd_check_weights(weights_path);
    if (*init) return cmd_init_weights(init_path, init_seed, init_scale);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
