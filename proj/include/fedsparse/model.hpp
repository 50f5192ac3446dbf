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

#include "fedsparse/kernels.hpp"
#include "fedsparse/matrix.hpp"

namespace fedsparse {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Fully connected classifier. layer_sizes = {input_dim, hidden..., class_count}.
struct ModelSpec {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t class_count() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }

  bool operator==(const ModelSpec&) const = default;
};

// Flat parameter (or gradient) vector. Layer l occupies
// [weights n_out x n_in row-major][biases n_out], layers in order.
using ParamVector = std::vector<double>;

struct Batch {
  Matrix inputs;
  std::vector<std::size_t> labels;
};

void validate(const ModelSpec& spec);
std::size_t param_count(const ModelSpec& spec);

// Glorot-uniform weights, zero biases; deterministic in spec.seed.
ParamVector init_params(const ModelSpec& spec);

Matrix forward(const ModelSpec& spec, std::span<const double> params, const Matrix& inputs,
               Exec exec = Exec::parallel);

// Mean over rows of -log softmax(logits)[label], samples summed left to right.
double cross_entropy(const Matrix& logits, std::span<const std::size_t> labels);

struct LossAndGrad {
  double loss;
  ParamVector grad;
};

LossAndGrad loss_and_grad(const ModelSpec& spec, std::span<const double> params, const Batch& batch,
                          Exec exec = Exec::parallel);

ParamVector backward(const ModelSpec& spec, std::span<const double> params, const Batch& batch,
                     Exec exec = Exec::parallel);

double batch_loss(const ModelSpec& spec, std::span<const double> params, const Batch& batch,
                  Exec exec = Exec::parallel);

// Central differences (L(w + h e_j) - L(w - h e_j)) / 2h for every coordinate j.
ParamVector finite_diff_grad(const ModelSpec& spec, std::span<const double> params, const Batch& batch,
                             double step);

// Top-1 accuracy; argmax ties go to the lowest class index.
double evaluate(const ModelSpec& spec, std::span<const double> params, const Matrix& inputs,
                std::span<const std::size_t> labels, Exec exec = Exec::parallel);

std::size_t argmax_row(std::span<const double> row);

bool all_finite(std::span<const double> v);

}  // namespace fedsparse
