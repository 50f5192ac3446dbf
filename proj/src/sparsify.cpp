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

#include "fedsparse/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsparse/error.hpp"
#include "fedsparse/rng.hpp"

namespace fedsparse {

void validate(const SparseUpdate& u) {
  if (u.indices.size() != u.values.size()) throw InvalidArgument("sparse update index/value length mismatch");
  if (u.indices.size() > u.dim) throw InvalidArgument("sparse update has more entries than its dimension");
  for (std::size_t k = 0; k < u.indices.size(); ++k) {
    if (u.indices[k] >= u.dim)
      throw InvalidArgument("sparse update index " + std::to_string(u.indices[k]) + " >= dim " +
                            std::to_string(u.dim));
    if (k > 0 && u.indices[k] <= u.indices[k - 1])
      throw InvalidArgument("sparse update indices not strictly increasing at entry " + std::to_string(k));
  }
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::top_k: return "top_k";
    case PolicyKind::threshold: return "threshold";
    case PolicyKind::random: return "random";
    case PolicyKind::dense: return "dense";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "top_k") return PolicyKind::top_k;
  if (s == "threshold") return PolicyKind::threshold;
  if (s == "random") return PolicyKind::random;
  if (s == "dense") return PolicyKind::dense;
  throw InvalidArgument("unknown sparsity policy '" + s + "' (expected top_k, threshold, random or dense)");
}

namespace {

void check_rate(double rate) {
  if (!(rate > 0.0 && rate <= 1.0))
    throw InvalidArgument("sparsification rate K must be in (0,1], got " + std::to_string(rate));
}

void check_finite(std::span<const double> v) {
  for (std::size_t j = 0; j < v.size(); ++j)
    if (!std::isfinite(v[j])) throw InvalidArgument("non-finite value at coordinate " + std::to_string(j));
}

SparseUpdate gather(std::span<const double> v, std::vector<std::uint64_t> idx) {
  SparseUpdate u;
  u.dim = v.size();
  u.values.reserve(idx.size());
  for (auto j : idx) u.values.push_back(v[j]);
  u.indices = std::move(idx);
  return u;
}

}  // namespace

void validate(const SparsityPolicy& p) {
  switch (p.kind) {
    case PolicyKind::top_k:
    case PolicyKind::random: check_rate(p.rate); break;
    case PolicyKind::threshold:
      if (!(p.tau >= 0.0) || !std::isfinite(p.tau))
        throw InvalidArgument("threshold tau must be a finite value >= 0");
      break;
    case PolicyKind::dense: break;
  }
}

std::size_t retained_count(std::size_t d, double rate) {
  check_rate(rate);
  if (d == 0) return 0;
  const double x = rate * static_cast<double>(d);
  const double nearest = std::round(x);
  const double m = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::clamp<std::size_t>(static_cast<std::size_t>(m), 1, d);
}

SparseUpdate top_k_sparsify(std::span<const double> v, double rate) {
  check_rate(rate);
  if (v.empty()) throw InvalidArgument("top-k of an empty vector");
  check_finite(v);
  const std::size_t m = retained_count(v.size(), rate);
  std::vector<std::uint64_t> order(v.size());
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  // Strict total order: larger magnitude first, lower index on ties.
  auto before = [&](std::uint64_t a, std::uint64_t b) {
    const double ma = std::abs(v[a]), mb = std::abs(v[b]);
    return ma != mb ? ma > mb : a < b;
  };
  if (m < order.size()) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), before);
    order.resize(m);
  }
  std::sort(order.begin(), order.end());
  return gather(v, std::move(order));
}

SparseUpdate threshold_sparsify(std::span<const double> v, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("threshold tau must be >= 0");
  check_finite(v);
  std::vector<std::uint64_t> idx;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (std::abs(v[j]) >= tau) idx.push_back(j);
  return gather(v, std::move(idx));
}

SparseUpdate random_sparsify(std::span<const double> v, double rate, std::uint64_t seed) {
  check_rate(rate);
  if (v.empty()) throw InvalidArgument("random sparsification of an empty vector");
  check_finite(v);
  const std::size_t m = retained_count(v.size(), rate);
  std::vector<std::uint64_t> pool(v.size());
  std::iota(pool.begin(), pool.end(), std::uint64_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first m slots are a uniform m-subset.
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return gather(v, std::move(pool));
}

SparseUpdate dense_update(std::span<const double> v) {
  check_finite(v);
  std::vector<std::uint64_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::uint64_t{0});
  return gather(v, std::move(idx));
}

SparseUpdate sparsify(const SparsityPolicy& policy, std::span<const double> v, std::uint64_t seed) {
  validate(policy);
  switch (policy.kind) {
    case PolicyKind::top_k: return top_k_sparsify(v, policy.rate);
    case PolicyKind::threshold: return threshold_sparsify(v, policy.tau);
    case PolicyKind::random: return random_sparsify(v, policy.rate, seed);
    case PolicyKind::dense: return dense_update(v);
  }
  throw InvalidArgument("unreachable policy kind");
}

ParamVector densify(const SparseUpdate& u) {
  if (u.indices.size() != u.values.size()) throw InvalidArgument("sparse update index/value length mismatch");
  ParamVector out(u.dim, 0.0);
  for (std::size_t k = 0; k < u.indices.size(); ++k) {
    if (u.indices[k] >= u.dim)
      throw InvalidArgument("index " + std::to_string(u.indices[k]) + " >= dim " + std::to_string(u.dim));
    out[u.indices[k]] = u.values[k];
  }
  return out;
}

double retained_energy(const SparseUpdate& u) {
  double s = 0.0;
  for (double x : u.values) s += x * x;
  return s;
}

}  // namespace fedsparse
