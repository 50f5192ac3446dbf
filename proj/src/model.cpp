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

#include "fedsparse/model.hpp"

#include <algorithm>
#include <cmath>

#include "fedsparse/error.hpp"
#include "fedsparse/rng.hpp"

namespace fedsparse {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw InvalidArgument("unknown activation '" + s + "' (expected relu or tanh)");
}

void validate(const ModelSpec& spec) {
  if (spec.layer_sizes.size() < 2) throw ShapeError("model needs at least an input and an output layer");
  for (auto n : spec.layer_sizes)
    if (n < 1) throw ShapeError("layer sizes must be >= 1");
}

std::size_t param_count(const ModelSpec& spec) {
  validate(spec);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l)
    total += spec.layer_sizes[l] * spec.layer_sizes[l + 1] + spec.layer_sizes[l + 1];
  return total;
}

ParamVector init_params(const ModelSpec& spec) {
  ParamVector p(param_count(spec), 0.0);
  Rng rng(derive_seed(spec.seed, {0x1a17}));
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const auto n_in = spec.layer_sizes[l], n_out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    for (std::size_t j = 0; j < n_in * n_out; ++j) p[off + j] = rng.uniform(-limit, limit);
    off += n_in * n_out + n_out;
  }
  return p;
}

namespace {

struct LayerView {
  kernels::AffineShape shape;
  std::span<const double> w;
  std::span<const double> b;
  std::size_t offset;
};

void check_params(const ModelSpec& spec, std::span<const double> params) {
  const auto expected = param_count(spec);
  if (params.size() != expected)
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, model expects " +
                     std::to_string(expected));
}

void check_inputs(const ModelSpec& spec, const Matrix& inputs) {
  if (inputs.cols != spec.input_dim())
    throw ShapeError("input has " + std::to_string(inputs.cols) + " features, model expects " +
                     std::to_string(spec.input_dim()));
}

void check_labels(const ModelSpec& spec, const Matrix& inputs, std::span<const std::size_t> labels) {
  if (labels.size() != inputs.rows) throw ShapeError("label count does not match input rows");
  for (auto y : labels)
    if (y >= spec.class_count()) throw ShapeError("label " + std::to_string(y) + " out of range");
}

LayerView layer(const ModelSpec& spec, std::span<const double> params, std::size_t l, std::size_t rows,
                std::size_t offset) {
  const auto n_in = spec.layer_sizes[l], n_out = spec.layer_sizes[l + 1];
  return {{rows, n_in, n_out}, params.subspan(offset, n_in * n_out), params.subspan(offset + n_in * n_out, n_out),
          offset};
}

void activate(Activation a, std::span<double> z) {
  if (a == Activation::relu) {
    for (auto& v : z) v = v > 0.0 ? v : 0.0;
  } else {
    for (auto& v : z) v = std::tanh(v);
  }
}

// Returns the output of every layer; acts[0] is the input, acts.back() the logits.
std::vector<Matrix> forward_all(const ModelSpec& spec, std::span<const double> params, const Matrix& inputs,
                                Exec exec) {
  std::vector<Matrix> acts;
  acts.reserve(spec.layer_sizes.size());
  acts.push_back(inputs);
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    auto lv = layer(spec, params, l, inputs.rows, off);
    Matrix out(inputs.rows, lv.shape.n_out);
    kernels::affine_forward(exec, lv.shape, acts.back().data, lv.w, lv.b, out.data);
    if (l + 1 < spec.layer_count()) activate(spec.activation, out.data);
    acts.push_back(std::move(out));
    off += lv.shape.n_in * lv.shape.n_out + lv.shape.n_out;
  }
  return acts;
}

double log_sum_exp(std::span<const double> row) {
  const double m = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

Matrix forward(const ModelSpec& spec, std::span<const double> params, const Matrix& inputs, Exec exec) {
  check_params(spec, params);
  check_inputs(spec, inputs);
  return std::move(forward_all(spec, params, inputs, exec).back());
}

double cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
  if (logits.rows == 0) throw InvalidArgument("cross entropy of an empty batch");
  if (labels.size() != logits.rows) throw ShapeError("label count does not match logit rows");
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows; ++r) {
    if (labels[r] >= logits.cols) throw ShapeError("label " + std::to_string(labels[r]) + " out of range");
    const auto row = logits.row(r);
    total += log_sum_exp(row) - row[labels[r]];
  }
  return total / static_cast<double>(logits.rows);
}

LossAndGrad loss_and_grad(const ModelSpec& spec, std::span<const double> params, const Batch& batch, Exec exec) {
  check_params(spec, params);
  check_inputs(spec, batch.inputs);
  check_labels(spec, batch.inputs, batch.labels);
  if (batch.inputs.rows == 0) throw InvalidArgument("gradient of an empty batch");

  const auto acts = forward_all(spec, params, batch.inputs, exec);
  const Matrix& logits = acts.back();
  const double loss = cross_entropy(logits, batch.labels);

  const std::size_t rows = batch.inputs.rows;
  const double inv_rows = 1.0 / static_cast<double>(rows);

  // dL/dlogits = (softmax - onehot) / rows
  Matrix delta(rows, spec.class_count());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto z = logits.row(r);
    const double lse = log_sum_exp(z);
    auto d = delta.row(r);
    for (std::size_t c = 0; c < z.size(); ++c) d[c] = std::exp(z[c] - lse);
    d[batch.labels[r]] -= 1.0;
    for (auto& v : d) v *= inv_rows;
  }

  std::vector<std::size_t> offsets(spec.layer_count());
  for (std::size_t l = 0, off = 0; l < spec.layer_count(); ++l) {
    offsets[l] = off;
    off += spec.layer_sizes[l] * spec.layer_sizes[l + 1] + spec.layer_sizes[l + 1];
  }

  ParamVector grad(params.size(), 0.0);
  for (std::size_t l = spec.layer_count(); l-- > 0;) {
    auto lv = layer(spec, params, l, rows, offsets[l]);
    const auto nw = lv.shape.n_in * lv.shape.n_out;
    std::span<double> g(grad);
    kernels::affine_param_grad(exec, lv.shape, delta.data, acts[l].data, g.subspan(lv.offset, nw),
                               g.subspan(lv.offset + nw, lv.shape.n_out));
    if (l == 0) break;
    Matrix din(rows, lv.shape.n_in);
    kernels::affine_input_grad(exec, lv.shape, delta.data, lv.w, din.data);
    // acts[l] holds the activated hidden output of layer l-1.
    const auto& a = acts[l].data;
    if (spec.activation == Activation::relu) {
      for (std::size_t j = 0; j < din.data.size(); ++j) din.data[j] = a[j] > 0.0 ? din.data[j] : 0.0;
    } else {
      for (std::size_t j = 0; j < din.data.size(); ++j) din.data[j] *= 1.0 - a[j] * a[j];
    }
    delta = std::move(din);
  }
  return {loss, std::move(grad)};
}

ParamVector backward(const ModelSpec& spec, std::span<const double> params, const Batch& batch, Exec exec) {
  return loss_and_grad(spec, params, batch, exec).grad;
}

double batch_loss(const ModelSpec& spec, std::span<const double> params, const Batch& batch, Exec exec) {
  check_labels(spec, batch.inputs, batch.labels);
  return cross_entropy(forward(spec, params, batch.inputs, exec), batch.labels);
}

ParamVector finite_diff_grad(const ModelSpec& spec, std::span<const double> params, const Batch& batch,
                             double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite difference step must be > 0");
  ParamVector w(params.begin(), params.end());
  ParamVector g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double orig = w[j];
    w[j] = orig + step;
    const double up = batch_loss(spec, w, batch, Exec::serial);
    w[j] = orig - step;
    const double down = batch_loss(spec, w, batch, Exec::serial);
    w[j] = orig;
    g[j] = (up - down) / (2.0 * step);
  }
  return g;
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c)
    if (row[c] > row[best]) best = c;
  return best;
}

double evaluate(const ModelSpec& spec, std::span<const double> params, const Matrix& inputs,
                std::span<const std::size_t> labels, Exec exec) {
  if (inputs.rows == 0) throw InvalidArgument("evaluate on an empty dataset");
  check_labels(spec, inputs, labels);
  const Matrix logits = forward(spec, params, inputs, exec);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < logits.rows; ++r)
    if (argmax_row(logits.row(r)) == labels[r]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(inputs.rows);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace fedsparse
