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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedsparse/config.hpp"
#include "fedsparse/federation.hpp"
#include "fedsparse/partition.hpp"
#include "json.hpp"

namespace fedsparse {

struct PreparedTask {
  FederatedTask task;
  std::vector<std::vector<double>> class_proportions;
  std::vector<std::string> warnings;
};

// Loads or generates the dataset, splits, normalizes and partitions it.
PreparedTask prepare_task(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<RoundMetrics> history;
  ParamVector final_params;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  std::uint64_t total_uplink_bytes = 0;
  std::uint64_t total_downlink_bytes = 0;
  double wall_time_s = 0.0;
  double label_skew = 0.0;
  std::vector<Partition> partitions;
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const UploadObserver& observer = {});

inline constexpr const char* kMetricsHeader = "round,global_loss,top1_accuracy,uplink_bytes,downlink_bytes,elapsed_s";

// One row per round. With include_timing = false the elapsed_s column is
// written as 0 so that repeated runs produce identical files.
std::string format_metrics_csv(const std::vector<RoundMetrics>& history, bool include_timing);

nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentResult& result);

// Writes the file through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// run_experiment plus metrics.csv, summary.json and partitions.csv under
// cfg.output_dir (and updates/*.fsu when cfg.dump_updates).
ExperimentResult run_to_directory(const ExperimentConfig& cfg);

struct SweepGrid {
  std::vector<double> alphas;
  std::vector<PolicyKind> policies;
  std::vector<double> rates;  // K for top_k/random, tau for threshold; ignored for dense
};

SweepGrid parse_grid(const nlohmann::json& doc);

struct SweepCell {
  std::size_t index = 0;
  double alpha = 0.0;
  SparsityPolicy policy;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double final_accuracy = 0.0;
  std::uint64_t total_bytes = 0;  // uplink + downlink over the run
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::size_t failures() const;
};

// Cell k of the alpha x policy x rate product (alpha outermost) for `base`.
// Its seed is base.seed + k.
ExperimentConfig cell_config(const ExperimentConfig& base, const SweepGrid& grid, std::size_t k);
std::size_t cell_count(const SweepGrid& grid);

// Runs every cell (up to `jobs` concurrently). A failing cell is recorded and
// the rest still run. When write_outputs is set each cell writes its own
// directory under <base.output_dir>/cells/ and the sweep writes sweep.csv and
// pivot.txt to base.output_dir.
SweepResult run_sweep(const ExperimentConfig& base, const SweepGrid& grid, std::size_t jobs, bool write_outputs);

std::string format_sweep_csv(const SweepResult& r);
std::string format_pivot(const SweepResult& r);

}  // namespace fedsparse
