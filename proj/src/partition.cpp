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

#include "fedsparse/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "fedsparse/dirichlet.hpp"
#include "fedsparse/error.hpp"
#include "fedsparse/rng.hpp"

namespace fedsparse {

std::vector<std::size_t> apportion(std::span<const double> shares, std::size_t total) {
  std::vector<std::size_t> counts(shares.size());
  std::vector<double> frac(shares.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  // floor of each share can overshoot only through rounding in the products
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size(), ++assigned) ++counts[order[k]];
  return counts;
}

PartitionResult partition_dataset(std::span<const std::size_t> labels, std::size_t class_count,
                                  std::size_t clients, double alpha, std::uint64_t seed) {
  if (clients < 1) throw InvalidArgument("need at least one client");
  if (clients > 65536) throw InvalidArgument("client ids are 16-bit; at most 65536 clients");
  if (labels.size() < clients)
    throw DataError("dataset has " + std::to_string(labels.size()) + " samples, fewer than " +
                    std::to_string(clients) + " clients");
  if (!(alpha > 0.0)) throw InvalidArgument("Dirichlet alpha must be > 0");

  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count) throw DataError("label " + std::to_string(labels[i]) + " out of range");
    by_class[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < class_count; ++c)
    if (by_class[c].empty()) throw DataError("class " + std::to_string(c) + " has no samples");

  PartitionResult result;
  result.partitions.resize(clients);
  for (std::size_t k = 0; k < clients; ++k) result.partitions[k].client_id = static_cast<std::uint16_t>(k);

  const std::vector<double> concentration(clients, alpha);
  for (std::size_t c = 0; c < class_count; ++c) {
    auto members = by_class[c];
    Rng rng(derive_seed(seed, {0x9a27, c}));
    rng.shuffle(members.begin(), members.end());
    std::vector<double> p;
    if (clients == 1) {
      p = {1.0};
    } else {
      p = sample_dirichlet(concentration, rng);
    }
    auto counts = apportion(p, members.size());
    std::size_t pos = 0;
    for (std::size_t k = 0; k < clients; ++k) {
      auto& dst = result.partitions[k].sample_indices;
      dst.insert(dst.end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                 members.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
    result.class_proportions.push_back(std::move(p));
    result.class_counts.push_back(std::move(counts));
  }

  for (auto& part : result.partitions) std::sort(part.sample_indices.begin(), part.sample_indices.end());

  for (;;) {
    auto empty = std::find_if(result.partitions.begin(), result.partitions.end(),
                              [](const Partition& p) { return p.sample_indices.empty(); });
    if (empty == result.partitions.end()) break;
    auto donor = std::max_element(result.partitions.begin(), result.partitions.end(),
                                  [](const Partition& a, const Partition& b) { return a.size() < b.size(); });
    empty->sample_indices.push_back(donor->sample_indices.back());
    donor->sample_indices.pop_back();
  }

  const double n = static_cast<double>(labels.size());
  for (auto& part : result.partitions) part.weight = static_cast<double>(part.size()) / n;
  return result;
}

double max_label_skew(std::span<const Partition> parts, std::span<const std::size_t> labels,
                      std::size_t class_count) {
  std::vector<double> global(class_count, 0.0);
  for (auto y : labels) global[y] += 1.0;
  for (auto& g : global) g /= static_cast<double>(labels.size());
  double worst = 0.0;
  for (const auto& part : parts) {
    if (part.sample_indices.empty()) continue;
    std::vector<double> local(class_count, 0.0);
    for (auto i : part.sample_indices) local[labels[i]] += 1.0;
    double tv = 0.0;
    for (std::size_t c = 0; c < class_count; ++c)
      tv += std::abs(local[c] / static_cast<double>(part.size()) - global[c]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

void check_disjoint_cover(std::span<const Partition> parts, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& part : parts) {
    if (part.sample_indices.empty())
      throw DataError("client " + std::to_string(part.client_id) + " has an empty partition");
    for (auto i : part.sample_indices) {
      if (i >= n) throw DataError("sample index " + std::to_string(i) + " out of range");
      if (seen[i]++) throw DataError("sample " + std::to_string(i) + " assigned to more than one client");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw DataError("sample " + std::to_string(i) + " not assigned to any client");
}

void write_partition_csv(const std::filesystem::path& path, std::span<const Partition> parts) {
  std::vector<std::pair<std::size_t, std::uint16_t>> rows;
  for (const auto& part : parts)
    for (auto i : part.sample_indices) rows.emplace_back(i, part.client_id);
  std::sort(rows.begin(), rows.end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "sample_index,client_id\n";
  for (const auto& [i, c] : rows) out << i << ',' << c << '\n';
}

}  // namespace fedsparse
