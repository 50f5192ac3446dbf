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

#include "fedsparse/dataset.hpp"
#include "fedsparse/federation.hpp"
#include "fedsparse/model.hpp"
#include "json.hpp"

namespace fedsparse {

enum class DatasetKind { synthetic, csv };
enum class TestSplitMode { global, per_client };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::synthetic;
  SyntheticSpec synthetic;  // synthetic.seed is ignored unless has_seed
  bool has_seed = false;
  std::string path;
  std::size_t input_dim = 0;
  std::size_t classes = 0;
  bool skip_header = false;
  bool normalize = true;

  bool operator==(const DatasetConfig&) const = default;
};

struct ModelConfig {
  std::vector<std::size_t> hidden = {32};
  Activation activation = Activation::relu;

  bool operator==(const ModelConfig&) const = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  ModelConfig model;
  std::size_t clients = 3;
  double alpha = 0.3;
  TrainingConfig training;
  double test_fraction = 0.2;
  TestSplitMode test_split = TestSplitMode::global;
  std::string output_dir = "out";
  bool dump_updates = false;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError naming the offending field (dotted path) and constraint.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config(const std::filesystem::path& path);

// Fully expanded document (every default written out); parse_config(emit_config(c)) == c.
nlohmann::json emit_config(const ExperimentConfig& cfg);

// Applies FEDSPARSE_SEED if set. Throws ConfigError on an unparsable value.
void apply_env_overrides(ExperimentConfig& cfg);

SyntheticSpec parse_synthetic_spec(const nlohmann::json& doc, std::uint64_t default_seed = 0);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace fedsparse
