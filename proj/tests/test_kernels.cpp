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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "fedsparse/kernels.hpp"
#include "fedsparse/model.hpp"
#include "fedsparse/rng.hpp"
#include "test_util.hpp"

using namespace fedsparse;

namespace {
std::vector<double> rv(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}
}  // namespace

TEST_CASE("affine_forward matches a hand computed product") {
  // in = [[1,2]], w = [[1,0],[0,1],[1,1]], b = [0.5, -1, 0]
  const std::vector<double> in{1, 2}, w{1, 0, 0, 1, 1, 1}, b{0.5, -1, 0};
  std::vector<double> out(3);
  kernels::serial::affine_forward({1, 2, 3}, in, w, b, out);
  CHECK(out == std::vector<double>{1.5, 1.0, 3.0});
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(3);
  // Sizes straddle kParallelThreshold so both the threaded and the inline path run.
  for (kernels::AffineShape s : {kernels::AffineShape{3, 4, 5}, kernels::AffineShape{64, 48, 40},
                                 kernels::AffineShape{200, 33, 17}}) {
    const auto in = rv(s.rows * s.n_in, rng), w = rv(s.n_out * s.n_in, rng), b = rv(s.n_out, rng),
               delta = rv(s.rows * s.n_out, rng);
    std::vector<double> o1(s.rows * s.n_out), o2(o1.size());
    kernels::serial::affine_forward(s, in, w, b, o1);
    kernels::parallel::affine_forward(s, in, w, b, o2);
    CHECK(o1 == o2);

    std::vector<double> dw1(w.size()), db1(b.size()), dw2(w.size()), db2(b.size());
    kernels::serial::affine_param_grad(s, delta, in, dw1, db1);
    kernels::parallel::affine_param_grad(s, delta, in, dw2, db2);
    CHECK(dw1 == dw2);
    CHECK(db1 == db2);

    std::vector<double> d1(in.size()), d2(in.size());
    kernels::serial::affine_input_grad(s, delta, w, d1);
    kernels::parallel::affine_input_grad(s, delta, w, d2);
    CHECK(d1 == d2);
  }

  for (std::size_t n : {std::size_t{7}, std::size_t{100000}}) {
    const auto x = rv(n, rng);
    auto y1 = rv(n, rng);
    auto y2 = y1;
    kernels::serial::axpy(-0.37, x, y1);
    kernels::parallel::axpy(-0.37, x, y2);
    CHECK(y1 == y2);

    std::vector<std::vector<double>> vs{rv(n, rng), rv(n, rng), rv(n, rng)};
    std::vector<std::span<const double>> views(vs.begin(), vs.end());
    const std::vector<double> wts{0.1, 0.2, 0.7};
    std::vector<double> s1(n), s2(n);
    kernels::serial::weighted_sum(views, wts, s1);
    kernels::parallel::weighted_sum(views, wts, s2);
    CHECK(s1 == s2);
  }
}

TEST_CASE("loss_and_grad is identical under serial and parallel execution") {
  Rng rng(11);
  ModelSpec spec{{20, 64, 64, 5}, Activation::tanh, 5};
  const auto p = init_params(spec);
  const auto batch = testutil::random_batch(96, 20, 5, rng);
  const auto a = loss_and_grad(spec, p, batch, Exec::serial);
  const auto b = loss_and_grad(spec, p, batch, Exec::parallel);
  CHECK(a.loss == b.loss);
  CHECK(a.grad == b.grad);
}
