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

#include <algorithm>
#include <cmath>
#include <span>

#include "fedsparse/model.hpp"
#include "fedsparse/rng.hpp"

namespace testutil {

// |a - b| / max(|a|, |b|, floor)
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_err(std::span<const double> a, std::span<const double> b, double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_err(a[i], b[i], floor));
  return worst;
}

inline fedsparse::Batch random_batch(std::size_t rows, std::size_t dim, std::size_t classes, fedsparse::Rng& rng) {
  fedsparse::Batch b;
  b.inputs = fedsparse::Matrix(rows, dim);
  for (auto& x : b.inputs.data) x = rng.normal();
  for (std::size_t r = 0; r < rows; ++r) b.labels.push_back(rng.below(classes));
  return b;
}

}  // namespace testutil
