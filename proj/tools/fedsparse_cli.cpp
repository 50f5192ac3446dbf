// Copyright 2026 The fedsparse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

// fedsparse command line: run, sweep, dump-update, gen-data.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fedsparse/codec.hpp"
#include "fedsparse/config.hpp"
#include "fedsparse/dataset.hpp"
#include "fedsparse/error.hpp"
#include "fedsparse/experiment.hpp"
#include "fedsparse/update_json.hpp"
#include "fedsparse/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartialSweep = 3;

using fedsparse::ConfigError;

fedsparse::ExperimentConfig load_config(const std::string& path) {
  auto cfg = fedsparse::parse_config(std::filesystem::path(path));
  fedsparse::apply_env_overrides(cfg);
  return cfg;
}

int cmd_run(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto r = fedsparse::run_to_directory(cfg);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::printf("rounds=%zu final_accuracy=%.4f final_loss=%.6f uplink_bytes=%llu downlink_bytes=%llu wall_s=%.2f\n",
              r.history.size(), r.final_accuracy, r.final_loss,
              static_cast<unsigned long long>(r.total_uplink_bytes),
              static_cast<unsigned long long>(r.total_downlink_bytes), r.wall_time_s);
  std::printf("wrote %s/{metrics.csv,summary.json,partitions.csv}\n", cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path, std::size_t jobs) {
  const auto base = load_config(config_path);
  const auto grid = fedsparse::parse_grid(fedsparse::read_json_file(grid_path));
  const auto r = fedsparse::run_sweep(base, grid, jobs, true);
  std::cout << fedsparse::format_pivot(r);
  for (const auto& c : r.cells)
    if (!c.ok) std::cerr << "cell " << c.index << " failed: " << c.error << '\n';
  std::printf("wrote %s/{sweep.csv,pivot.txt}\n", base.output_dir.c_str());
  return r.failures() == 0 ? kExitOk : kExitPartialSweep;
}

int cmd_dump(const std::string& path) {
  const auto u = fedsparse::codec::read_file(path);
  std::cout << fedsparse::update_to_json(u).dump(2) << '\n';
  return kExitOk;
}

int cmd_gen_data(const std::string& spec_path, const std::string& out_path) {
  const auto doc = fedsparse::read_json_file(spec_path);
  if (!doc.is_object()) throw ConfigError("", "data spec must be a JSON object");
  for (const auto& [k, v] : doc.items())
    if (k != "classes" && k != "n_per_class" && k != "input_dim" && k != "separation" && k != "seed")
      throw ConfigError(k, "unknown key");
  const auto spec = fedsparse::parse_synthetic_spec(doc);
  const auto ds = fedsparse::gen_synthetic(spec);
  fedsparse::save_csv(out_path, ds);
  std::printf("wrote %zu samples (%zu features, %zu classes) to %s\n", ds.size(), ds.input_dim(), ds.class_count,
              out_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedsparse: federated learning simulator with sparsified client updates"};
  app.set_version_flag("--version", std::string(fedsparse::kVersion));
  app.require_subcommand(1);

  std::string config_path, grid_path, fsu_path, spec_path, out_path;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run one experiment; writes metrics.csv and summary.json");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Run an alpha x policy x rate grid");
  sweep->add_option("config", config_path, "Base experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_path, "Grid definition (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "Cells to run concurrently")->check(CLI::PositiveNumber);

  auto* dump = app.add_subcommand("dump-update", "Print an FSU1 update file as JSON");
  dump->add_option("file", fsu_path, ".fsu file")->required();

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset as CSV");
  gen->add_option("spec", spec_path, "Synthetic data spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--output", out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*sweep) return cmd_sweep(config_path, grid_path, jobs);
    if (*dump) return cmd_dump(fsu_path);
    if (*gen) return cmd_gen_data(spec_path, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
