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
#include <span>
#include <string>
#include <vector>

#include "fedsparse/model.hpp"

namespace fedsparse {

// Index/value view of a dense update. Values are held in double precision in
// memory; the wire codec narrows them to IEEE single precision.
struct SparseUpdate {
  std::uint64_t dim = 0;
  std::vector<std::uint64_t> indices;  // strictly increasing, < dim
  std::vector<double> values;
  std::uint32_t round = 0;
  std::uint16_t client_id = 0;

  std::size_t nnz() const { return indices.size(); }
  bool operator==(const SparseUpdate&) const = default;
};

// Throws InvalidArgument if the index/value invariants do not hold.
void validate(const SparseUpdate& u);

enum class PolicyKind { top_k, threshold, random, dense };

std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

struct SparsityPolicy {
  PolicyKind kind = PolicyKind::dense;
  double rate = 1.0;  // K in (0, 1], top_k and random
  double tau = 0.0;   // threshold

  static SparsityPolicy top_k(double k) { return {PolicyKind::top_k, k, 0.0}; }
  static SparsityPolicy threshold(double t) { return {PolicyKind::threshold, 1.0, t}; }
  static SparsityPolicy random(double k) { return {PolicyKind::random, k, 0.0}; }
  static SparsityPolicy dense() { return {PolicyKind::dense, 1.0, 0.0}; }

  // The rate (top_k, random, dense) or tau (threshold) this policy is keyed on.
  double parameter() const { return kind == PolicyKind::threshold ? tau : rate; }

  bool operator==(const SparsityPolicy&) const = default;
};

void validate(const SparsityPolicy& p);

// m = max(1, ceil(K * d)). Products within 1e-9 of an integer are snapped to
// it first so that e.g. 0.3 * 10 keeps exactly 3 entries.
std::size_t retained_count(std::size_t d, double rate);

SparseUpdate top_k_sparsify(std::span<const double> v, double rate);
SparseUpdate threshold_sparsify(std::span<const double> v, double tau);
SparseUpdate random_sparsify(std::span<const double> v, double rate, std::uint64_t seed);
SparseUpdate dense_update(std::span<const double> v);

// Dispatches on policy.kind. `seed` is only consumed by the random policy.
SparseUpdate sparsify(const SparsityPolicy& policy, std::span<const double> v, std::uint64_t seed);

ParamVector densify(const SparseUpdate& u);

// Retained squared L2 norm.
double retained_energy(const SparseUpdate& u);

}  // namespace fedsparse
