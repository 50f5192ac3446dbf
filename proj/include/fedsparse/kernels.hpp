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

// Dense inner loops used by the model and the aggregator.
//
// Every kernel has a serial reference and an OpenMP version. The parallel
// versions split work only across independent outputs and keep the per-output
// summation order of the serial loop, so both produce bit-identical results.

#include <cstddef>
#include <span>

namespace fedsparse {

enum class Exec { serial, parallel };

namespace kernels {

// out[r][o] = b[o] + sum_i w[o][i] * in[r][i]
// in: rows x n_in, w: n_out x n_in, b: n_out, out: rows x n_out
struct AffineShape {
  std::size_t rows;
  std::size_t n_in;
  std::size_t n_out;
};

namespace serial {
void affine_forward(AffineShape s, std::span<const double> in, std::span<const double> w,
                    std::span<const double> b, std::span<double> out);
// dw[o][i] = sum_r delta[r][o] * in[r][i];  db[o] = sum_r delta[r][o]
void affine_param_grad(AffineShape s, std::span<const double> delta, std::span<const double> in,
                       std::span<double> dw, std::span<double> db);
// din[r][i] = sum_o w[o][i] * delta[r][o]
void affine_input_grad(AffineShape s, std::span<const double> delta, std::span<const double> w,
                       std::span<double> din);
// y[j] += a * x[j]
void axpy(double a, std::span<const double> x, std::span<double> y);
// out[j] = sum_k weights[k] * vectors[k][j], k ascending
void weighted_sum(std::span<const std::span<const double>> vectors, std::span<const double> weights,
                  std::span<double> out);
}  // namespace serial

namespace parallel {
void affine_forward(AffineShape s, std::span<const double> in, std::span<const double> w,
                    std::span<const double> b, std::span<double> out);
void affine_param_grad(AffineShape s, std::span<const double> delta, std::span<const double> in,
                       std::span<double> dw, std::span<double> db);
void affine_input_grad(AffineShape s, std::span<const double> delta, std::span<const double> w,
                       std::span<double> din);
void axpy(double a, std::span<const double> x, std::span<double> y);
void weighted_sum(std::span<const std::span<const double>> vectors, std::span<const double> weights,
                  std::span<double> out);
}  // namespace parallel

inline void affine_forward(Exec e, AffineShape s, std::span<const double> in, std::span<const double> w,
                           std::span<const double> b, std::span<double> out) {
  e == Exec::parallel ? parallel::affine_forward(s, in, w, b, out) : serial::affine_forward(s, in, w, b, out);
}
inline void affine_param_grad(Exec e, AffineShape s, std::span<const double> delta, std::span<const double> in,
                              std::span<double> dw, std::span<double> db) {
  e == Exec::parallel ? parallel::affine_param_grad(s, delta, in, dw, db)
                      : serial::affine_param_grad(s, delta, in, dw, db);
}
inline void affine_input_grad(Exec e, AffineShape s, std::span<const double> delta, std::span<const double> w,
                              std::span<double> din) {
  e == Exec::parallel ? parallel::affine_input_grad(s, delta, w, din) : serial::affine_input_grad(s, delta, w, din);
}
inline void axpy(Exec e, double a, std::span<const double> x, std::span<double> y) {
  e == Exec::parallel ? parallel::axpy(a, x, y) : serial::axpy(a, x, y);
}
inline void weighted_sum(Exec e, std::span<const std::span<const double>> vectors, std::span<const double> weights,
                         std::span<double> out) {
  e == Exec::parallel ? parallel::weighted_sum(vectors, weights, out) : serial::weighted_sum(vectors, weights, out);
}

// Below this many multiply-adds the parallel kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 1 << 14;

}  // namespace kernels
}  // namespace fedsparse
