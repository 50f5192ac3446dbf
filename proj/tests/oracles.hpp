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

// Test-only reference computations. Nothing here calls into the code path
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "fedsparse/dataset.hpp"
#include "fedsparse/dirichlet.hpp"
#include "fedsparse/model.hpp"
#include "fedsparse/rng.hpp"

namespace oracles {

// Dir(alpha) density on the 2-simplex, coordinates (x1, x2), via std::lgamma.
inline double dirichlet3_pdf(const double alpha[3], double x1, double x2) {
  const double x3 = 1.0 - x1 - x2;
  if (x1 <= 0.0 || x2 <= 0.0 || x3 <= 0.0) return 0.0;
  const double log_b = std::lgamma(alpha[0]) + std::lgamma(alpha[1]) + std::lgamma(alpha[2]) -
                       std::lgamma(alpha[0] + alpha[1] + alpha[2]);
  return std::exp((alpha[0] - 1) * std::log(x1) + (alpha[1] - 1) * std::log(x2) + (alpha[2] - 1) * std::log(x3) -
                  log_b);
}

struct ChiSquare {
  double statistic;
  double critical;  // upper 1% point
  std::size_t dof;
  bool pass() const { return statistic < critical; }
};

// Bins (x1, x2) on a grid x grid lattice clipped to the simplex. Expected cell
// probabilities come from midpoint quadrature of `pdf` on sub x sub points per
// cell; cells with expected count below 5 are pooled into one bin.
template <class Pdf>
ChiSquare simplex_chi_square(const std::vector<std::vector<double>>& draws, Pdf&& pdf, int grid = 8, int sub = 48,
                             double significance = 0.01) {
  const double h = 1.0 / grid, hs = h / sub;
  std::vector<double> prob(grid * grid, 0.0);
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid - a; ++b) {
      double s = 0.0;
      for (int i = 0; i < sub; ++i)
        for (int j = 0; j < sub; ++j) s += pdf(a * h + (i + 0.5) * hs, b * h + (j + 0.5) * hs);
      prob[a * grid + b] = s * hs * hs;
    }
  double total_p = 0.0;
  for (double p : prob) total_p += p;
  for (auto& p : prob) p /= total_p;

  std::vector<double> observed(grid * grid, 0.0);
  for (const auto& x : draws) {
    const int a = std::min(grid - 1, static_cast<int>(x[0] / h));
    const int b = std::min(grid - 1, static_cast<int>(x[1] / h));
    observed[a * grid + b] += 1.0;
  }
  const double n = static_cast<double>(draws.size());
  double stat = 0.0, pooled_e = 0.0, pooled_o = 0.0;
  std::size_t bins = 0;
  for (std::size_t c = 0; c < prob.size(); ++c) {
    const double e = prob[c] * n;
    if (e < 5.0) {
      pooled_e += e;
      pooled_o += observed[c];
      continue;
    }
    stat += (observed[c] - e) * (observed[c] - e) / e;
    ++bins;
  }
  if (pooled_e >= 5.0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++bins;
  }
  const std::size_t dof = bins - 1;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return {stat, boost::math::quantile(boost::math::complement(dist, significance)), dof};
}

// Largest remainder written out longhand: floor everything, then hand the
// leftover units to the largest fractional parts, earliest first.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& shares, std::size_t total) {
  const std::size_t k = shares.size();
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(exact);
    used += counts[i];
    rema.push_back({exact - static_cast<double>(counts[i]), i});
  }
  std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; used < total; ++j, ++used) ++counts[rema[j % k].second];
  return counts;
}

// Plain minibatch SGD on a whole dataset with the same shuffling scheme the
// clients use: one Fisher-Yates shuffle of the index list per epoch.
inline fedsparse::ParamVector sgd_epochs(const fedsparse::ModelSpec& spec, fedsparse::ParamVector w,
                                         const fedsparse::Dataset& ds, std::vector<std::size_t> order,
                                         std::size_t epochs, double lr, std::size_t batch, fedsparse::Rng& rng) {
  for (std::size_t e = 0; e < epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t s = 0; s < order.size(); s += batch) {
      const std::size_t t = std::min(order.size(), s + batch);
      const auto b = fedsparse::make_batch(ds, std::span(order).subspan(s, t - s));
      const auto g = fedsparse::backward(spec, w, b, fedsparse::Exec::serial);
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
    }
  }
  return w;
}

inline double train_and_score(const fedsparse::Dataset& train, const fedsparse::Dataset& test,
                              std::vector<std::size_t> hidden, std::size_t epochs, double lr, std::uint64_t seed) {
  fedsparse::ModelSpec spec;
  spec.layer_sizes.push_back(train.input_dim());
  for (auto h : hidden) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(train.class_count);
  spec.seed = seed;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  fedsparse::Rng rng(seed);
  const auto w = sgd_epochs(spec, fedsparse::init_params(spec), train, order, epochs, lr, 16, rng);
  return fedsparse::evaluate(spec, w, test.inputs, test.labels);
}

}  // namespace oracles
