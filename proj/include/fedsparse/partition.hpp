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
#include <vector>

namespace fedsparse {

struct Partition {
  std::uint16_t client_id = 0;
  std::vector<std::size_t> sample_indices;  // ascending, into the parent dataset
  double weight = 0.0;                      // |D_i| / |D|

  std::size_t size() const { return sample_indices.size(); }
  bool operator==(const Partition&) const = default;
};

struct PartitionResult {
  std::vector<Partition> partitions;
  // Per class c: the Dir(alpha 1_N) draw and the resulting per-client counts
  // before empty-client repair.
  std::vector<std::vector<double>> class_proportions;
  std::vector<std::vector<std::size_t>> class_counts;
};

// Largest-remainder apportionment of `total` items by `shares` (summing to 1).
// Remainder ties go to the lower index.
std::vector<std::size_t> apportion(std::span<const double> shares, std::size_t total);

// Label-skew partition: for each class draw p ~ Dir(alpha * 1_N) and split that
// class's (shuffled) samples across clients by largest remainder. Clients left
// empty receive one sample at a time from the current largest partition.
PartitionResult partition_dataset(std::span<const std::size_t> labels, std::size_t class_count,
                                  std::size_t clients, double alpha, std::uint64_t seed);

// max over clients of the total-variation distance between the client label
// histogram and the global one.
double max_label_skew(std::span<const Partition> parts, std::span<const std::size_t> labels,
                      std::size_t class_count);

// Throws DataError unless the partitions are disjoint, cover [0, n) and are nonempty.
void check_disjoint_cover(std::span<const Partition> parts, std::size_t n);

// CSV with header "sample_index,client_id", rows ordered by sample_index.
void write_partition_csv(const std::filesystem::path& path, std::span<const Partition> parts);

}  // namespace fedsparse
