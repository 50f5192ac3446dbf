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

#include <cstdint>
#include <span>
#include <vector>

#include "fedsparse/rng.hpp"

namespace fedsparse {

// ln Gamma(x) for x > 0. Lanczos approximation, g = 7 with 9 coefficients;
// reflection formula below 0.5.
double log_gamma(double x);

// ln B(alpha) = sum ln Gamma(alpha_i) - ln Gamma(sum alpha_i).
double log_multivariate_beta(std::span<const double> alpha);

// Gamma(shape, 1) draw returned as its natural log, so tiny shapes do not
// underflow. Marsaglia-Tsang squeeze; shape < 1 is boosted through
// Gamma(shape + 1) * U^(1/shape).
double sample_log_gamma(double shape, Rng& rng);
double sample_gamma(double shape, Rng& rng);

// One draw from Dir(alpha) by Gamma normalization. alpha.size() >= 2, every entry > 0.
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);
std::vector<double> sample_dirichlet(std::span<const double> alpha, std::uint64_t seed);

// sum (alpha_i - 1) ln x_i - ln B(alpha). x must lie on the simplex (tolerance 1e-9).
double dirichlet_log_pdf(std::span<const double> alpha, std::span<const double> x);

}  // namespace fedsparse
