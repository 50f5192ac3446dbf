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
#include <span>
#include <string>
#include <vector>

#include "fedsparse/matrix.hpp"
#include "fedsparse/model.hpp"

namespace fedsparse {

struct Dataset {
  std::string name;
  Matrix inputs;                    // n x input_dim
  std::vector<std::size_t> labels;  // each < class_count
  std::size_t class_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return inputs.cols; }
  bool operator==(const Dataset&) const = default;
};

void validate(const Dataset& ds);

struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t n_per_class = 200;
  std::size_t input_dim = 10;
  double separation = 2.0;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticSpec&) const = default;
};

// Gaussian blobs: class c ~ N(separation * u_c, I) with u_c unit vectors,
// mutually orthogonal when classes <= input_dim. Rows are grouped by class.
Dataset gen_synthetic(const SyntheticSpec& spec);

// Rows: input_dim decimal features then an integer label, comma separated.
Dataset load_csv(const std::filesystem::path& path, std::size_t input_dim, std::size_t class_count,
                 bool skip_header = false);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation; 0 for constant features
};

NormStats fit_normalization(const Dataset& ds);
Dataset apply_normalization(const Dataset& ds, const NormStats& stats);

struct Normalized {
  Dataset data;
  NormStats stats;
};

// Per-feature zero mean and unit (population) variance; constant features map to 0.
Normalized normalize(const Dataset& ds);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::string> warnings;
};

// Stratified: each class contributes round(test_fraction * class_size) test
// samples; a class with a single sample keeps it in train.
Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);
Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices);

}  // namespace fedsparse
