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

#include "fedsparse/dirichlet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fedsparse/error.hpp"

namespace fedsparse {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

void check_alpha(std::span<const double> alpha) {
  if (alpha.size() < 2) throw InvalidArgument("Dirichlet needs dimension >= 2");
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i]))
      throw InvalidArgument("Dirichlet alpha[" + std::to_string(i) + "] must be a finite value > 0");
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw InvalidArgument("log_gamma requires x > 0");
  if (x < 0.5) return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  x -= 1.0;
  double a = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (x + static_cast<double>(i));
  const double t = x + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

double log_multivariate_beta(std::span<const double> alpha) {
  double s = 0.0, total = 0.0;
  for (double a : alpha) {
    s += log_gamma(a);
    total += a;
  }
  return s - log_gamma(total);
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw InvalidArgument("gamma shape must be > 0");
  if (shape < 1.0) {
    const double boosted = sample_log_gamma(shape + 1.0, rng);
    return boosted + std::log(rng.uniform_open()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return std::log(d) + std::log(v);
  }
}

double sample_gamma(double shape, Rng& rng) { return std::exp(sample_log_gamma(shape, rng)); }

std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  check_alpha(alpha);
  std::vector<double> logs(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) logs[i] = sample_log_gamma(alpha[i], rng);
  const double m = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (auto& l : logs) {
    l = std::exp(l - m);
    total += l;
  }
  for (auto& l : logs) l /= total;
  return logs;
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, std::uint64_t seed) {
  Rng rng(seed);
  return sample_dirichlet(alpha, rng);
}

double dirichlet_log_pdf(std::span<const double> alpha, std::span<const double> x) {
  check_alpha(alpha);
  if (x.size() != alpha.size()) throw InvalidArgument("Dirichlet point has wrong dimension");
  double sum = 0.0;
  for (double xi : x) {
    if (!(xi >= 0.0) || xi > 1.0) throw InvalidArgument("Dirichlet point is not on the simplex");
    sum += xi;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("Dirichlet point does not sum to 1 (tolerance 1e-9)");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (alpha[i] == 1.0) continue;
    if (x[i] == 0.0) {
      if (alpha[i] < 1.0) throw InvalidArgument("Dirichlet point must be interior when some alpha < 1");
      return -std::numeric_limits<double>::infinity();
    }
    acc += (alpha[i] - 1.0) * std::log(x[i]);
  }
  return acc - log_multivariate_beta(alpha);
}

}  // namespace fedsparse
