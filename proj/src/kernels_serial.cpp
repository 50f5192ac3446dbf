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

#include "fedsparse/kernels.hpp"

namespace fedsparse::kernels::serial {

void affine_forward(AffineShape s, std::span<const double> in, std::span<const double> w,
                    std::span<const double> b, std::span<double> out) {
  for (std::size_t r = 0; r < s.rows; ++r) {
    const double* x = in.data() + r * s.n_in;
    double* y = out.data() + r * s.n_out;
    for (std::size_t o = 0; o < s.n_out; ++o) {
      const double* wo = w.data() + o * s.n_in;
      double acc = b[o];
      for (std::size_t i = 0; i < s.n_in; ++i) acc += wo[i] * x[i];
      y[o] = acc;
    }
  }
}

void affine_param_grad(AffineShape s, std::span<const double> delta, std::span<const double> in,
                       std::span<double> dw, std::span<double> db) {
  for (std::size_t o = 0; o < s.n_out; ++o) {
    double* dwo = dw.data() + o * s.n_in;
    for (std::size_t i = 0; i < s.n_in; ++i) dwo[i] = 0.0;
    double bsum = 0.0;
    for (std::size_t r = 0; r < s.rows; ++r) {
      const double d = delta[r * s.n_out + o];
      const double* x = in.data() + r * s.n_in;
      for (std::size_t i = 0; i < s.n_in; ++i) dwo[i] += d * x[i];
      bsum += d;
    }
    db[o] = bsum;
  }
}

void affine_input_grad(AffineShape s, std::span<const double> delta, std::span<const double> w,
                       std::span<double> din) {
  for (std::size_t r = 0; r < s.rows; ++r) {
    double* g = din.data() + r * s.n_in;
    for (std::size_t i = 0; i < s.n_in; ++i) g[i] = 0.0;
    const double* d = delta.data() + r * s.n_out;
    for (std::size_t o = 0; o < s.n_out; ++o) {
      const double* wo = w.data() + o * s.n_in;
      for (std::size_t i = 0; i < s.n_in; ++i) g[i] += wo[i] * d[o];
    }
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
}

void weighted_sum(std::span<const std::span<const double>> vectors, std::span<const double> weights,
                  std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = weights[0] * vectors[0][j];
    for (std::size_t k = 1; k < vectors.size(); ++k) acc += weights[k] * vectors[k][j];
    out[j] = acc;
  }
}

}  // namespace fedsparse::kernels::serial
