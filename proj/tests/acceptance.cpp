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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are fixed here and not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fedsparse/codec.hpp"
#include "fedsparse/dirichlet.hpp"
#include "fedsparse/experiment.hpp"
#include "fedsparse/model.hpp"
#include "fedsparse/sparsify.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fedsparse;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-6;
constexpr double kGradRelFloor = 1e-6;
constexpr double kGradBudgetS = 30.0;
constexpr double kSparsifyBudgetS = 60.0;
constexpr double kRandomFreqTol = 0.02;
constexpr double kCostRatioTol = 0.01;
constexpr double kPdfTol = 1e-9;
constexpr double kMomentTol = 0.01;
constexpr double kChiSquareSignificance = 0.01;
constexpr double kHeterogeneityBudgetS = 600.0;
constexpr double kSparsityGap = 0.05;
constexpr double kMethodSlack = 0.01;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The synthetic 3-class task used by the trend criteria.
ExperimentConfig trend_config(std::uint64_t seed, double alpha, SparsityPolicy policy) {
  ExperimentConfig c;
  c.seed = seed;
  c.dataset.synthetic = SyntheticSpec{3, 1000, 10, 2.0, 0};
  c.model.hidden = {32};
  c.clients = 3;
  c.alpha = alpha;
  c.training.rounds = 50;
  c.training.local_epochs = 5;
  c.training.learning_rate = 0.01;
  c.training.batch_size = 32;
  c.training.policy = policy;
  return c;
}

double final_accuracy(const ExperimentConfig& c) { return run_experiment(c).final_accuracy; }

std::size_t oracle_retained(std::size_t d, double rate) {
  const double x = rate * static_cast<double>(d);
  const double r = std::round(x);
  const auto m = static_cast<std::size_t>(std::abs(x - r) <= 1e-9 ? r : std::ceil(x));
  return std::max<std::size_t>(1, std::min(m, d));
}

void gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(0xacc1);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    ModelSpec spec;
    const std::size_t depth = 2 + rng.below(3);
    for (std::size_t l = 0; l < depth; ++l) spec.layer_sizes.push_back(1 + rng.below(8));
    spec.layer_sizes.back() = 2 + rng.below(4);
    spec.activation = rng.below(2) ? Activation::tanh : Activation::relu;
    spec.seed = rng.next_u64();
    auto p = init_params(spec);
    for (auto& v : p) v += 0.1 * rng.normal();
    const auto b = testutil::random_batch(1 + rng.below(8), spec.input_dim(), spec.layer_sizes.back(), rng);
    const auto g = backward(spec, p, b);
    const auto fd = finite_diff_grad(spec, p, b, kGradStep);
    worst = std::max(worst, testutil::max_rel_err(g, fd, kGradRelFloor));
  }
  const double t = seconds_since(t0);
  report(1, "gradient correctness", worst < kGradTol && t < kGradBudgetS,
         fmt("20 instances, max rel err %.2e (< %.0e), %.2f s (< %.0f s)", worst, kGradTol, t, kGradBudgetS));
}

void sparsifier_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(0xacc2);
  std::size_t topk_bad = 0, thr_bad = 0, rand_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 1 + rng.below(10000);
    std::vector<double> v(d);
    const bool ties = rng.below(4) == 0;
    for (auto& x : v) x = ties ? 0.5 * std::round(4.0 * rng.normal()) : rng.normal();
    const double rate = 1.0 - rng.uniform();  // (0, 1]

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
    std::vector<std::size_t> expect(order.begin(), order.begin() + oracle_retained(d, rate));
    std::sort(expect.begin(), expect.end());
    const auto tk = top_k_sparsify(v, rate);
    topk_bad += std::vector<std::size_t>(tk.indices.begin(), tk.indices.end()) != expect;

    const double tau = std::abs(v[rng.below(d)]) * (rng.below(2) ? 1.0 : 0.7);
    std::vector<std::size_t> scan;
    for (std::size_t j = 0; j < d; ++j)
      if (std::abs(v[j]) >= tau) scan.push_back(j);
    const auto th = threshold_sparsify(v, tau);
    thr_bad += std::vector<std::size_t>(th.indices.begin(), th.indices.end()) != scan;

    rand_bad += random_sparsify(v, rate, rng.next_u64()).nnz() != oracle_retained(d, rate);
  }
  const std::size_t d = 200;
  const std::vector<double> v(d, 1.0);
  std::vector<double> freq(d, 0.0);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto r = random_sparsify(v, 0.2, s);
    rand_bad += r.nnz() != 40;
    for (auto j : r.indices) freq[j] += 1e-4;
  }
  double worst = 0.0;
  for (double f : freq) worst = std::max(worst, std::abs(f - 0.2));
  const double t = seconds_since(t0);
  report(2, "sparsifier oracle equivalence",
         topk_bad == 0 && thr_bad == 0 && rand_bad == 0 && worst <= kRandomFreqTol && t < kSparsifyBudgetS,
         fmt("mismatches top_k=%zu threshold=%zu random-cardinality=%zu; per-index freq max |f-0.2|=%.4f (<= %.2f); "
             "%.2f s (< %.0f s)",
             topk_bad, thr_bad, rand_bad, worst, kRandomFreqTol, t, kSparsifyBudgetS));
}

void codec_identity() {
  Rng rng(0xacc3);
  std::size_t bad_identity = 0, bad_length = 0, empty = 0, full = 0;
  for (int i = 0; i < 10000; ++i) {
    SparseUpdate u;
    u.dim = 1 + rng.below(3000);
    u.round = static_cast<std::uint32_t>(rng.next_u64());
    u.client_id = static_cast<std::uint16_t>(rng.next_u64());
    const auto mode = i % 4;
    for (std::uint64_t j = 0; j < u.dim; ++j) {
      const bool take = mode == 1 || (mode >= 2 && rng.uniform() < 0.3);
      if (mode == 0 || !take) continue;
      u.indices.push_back(j);
      u.values.push_back(rng.normal() * std::pow(10.0, static_cast<double>(rng.below(13)) - 6.0));
    }
    empty += u.nnz() == 0;
    full += u.nnz() == u.dim;
    const auto bytes = codec::encode(u);
    bad_length += bytes.size() != 27 + 8 * u.nnz();
    bad_identity += !(codec::decode(bytes) == codec::quantized(u)) || codec::encode(codec::decode(bytes)) != bytes;
  }
  report(3, "codec identity", bad_identity == 0 && bad_length == 0 && empty > 0 && full > 0,
         fmt("10000 updates (%zu empty, %zu full): identity failures=%zu, length != 27+8m: %zu", empty, full,
             bad_identity, bad_length));
}

void communication_cost() {
  const std::size_t d = 100000;
  Rng rng(0xacc4);
  std::vector<double> v(d);
  for (auto& x : v) x = rng.normal();
  const double dense = static_cast<double>(codec::encode(dense_update(v)).size());
  bool ok = true;
  std::string detail = fmt("d=%zu, dense %.0f bytes;", d, dense);
  for (double k : {0.1, 0.2, 0.3, 0.4}) {
    const double ratio = static_cast<double>(codec::encode(top_k_sparsify(v, k)).size()) / dense;
    ok = ok && std::abs(ratio - k) <= kCostRatioTol;
    detail += fmt(" K=%.1f ratio=%.5f", k, ratio);
  }
  report(4, "communication cost", ok, detail + fmt(" (tol %.2f)", kCostRatioTol));
}

void dirichlet_correctness() {
  const double e1 = std::abs(dirichlet_log_pdf(std::vector<double>{1, 1, 1}, std::vector<double>{0.2, 0.3, 0.5}) -
                             std::log(2.0));
  const double e2 = std::abs(dirichlet_log_pdf(std::vector<double>{2, 2}, std::vector<double>{0.5, 0.5}) -
                             (std::log(6.0) + std::log(0.25)));
  double worst_moment = 0.0;
  for (const std::vector<double>& alpha : {std::vector<double>{2, 3, 4}, std::vector<double>{0.3, 0.6, 1.2},
                                           std::vector<double>{1, 1, 1, 1, 1}}) {
    Rng rng(0xacc5);
    const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    std::vector<double> mean(alpha.size(), 0.0);
    for (int i = 0; i < 100000; ++i) {
      const auto x = sample_dirichlet(alpha, rng);
      for (std::size_t k = 0; k < x.size(); ++k) mean[k] += x[k] / 100000.0;
    }
    for (std::size_t k = 0; k < alpha.size(); ++k) worst_moment = std::max(worst_moment, std::abs(mean[k] - alpha[k] / total));
  }
  const double a[3] = {2.0, 3.0, 4.0};
  Rng rng(0xacc6);
  std::vector<std::vector<double>> draws;
  for (int i = 0; i < 20000; ++i) draws.push_back(sample_dirichlet(std::vector<double>(a, a + 3), rng));
  const auto chi = oracles::simplex_chi_square(
      draws, [&](double x1, double x2) { return oracles::dirichlet3_pdf(a, x1, x2); }, 8, 48, kChiSquareSignificance);
  report(5, "dirichlet correctness", e1 < kPdfTol && e2 < kPdfTol && worst_moment < kMomentTol && chi.pass(),
         fmt("closed-form errors %.1e, %.1e (< %.0e); max moment error %.4f (< %.2f); chi2=%.2f < %.2f (dof %zu, p=%.2f)",
             e1, e2, kPdfTol, worst_moment, kMomentTol, chi.statistic, chi.critical, chi.dof, kChiSquareSignificance));
}

void heterogeneity_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  double m03 = 0.0, m06 = 0.0;
  int wins = 0, ties = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const double a = final_accuracy(trend_config(s, 0.3, SparsityPolicy::top_k(0.2)));
    const double b = final_accuracy(trend_config(s, 0.6, SparsityPolicy::top_k(0.2)));
    m03 += a / 10;
    m06 += b / 10;
    wins += b > a;
    ties += b == a;
  }
  const double t = seconds_since(t0);
  report(6, "heterogeneity ordering", m06 >= m03 && t < kHeterogeneityBudgetS,
         fmt("10 seeds, mean acc alpha=0.6 %.4f >= alpha=0.3 %.4f (paired: %d higher, %d tied); %.1f s (< %.0f s)", m06,
             m03, wins, ties, t, kHeterogeneityBudgetS));
}

void sparsification_tolerance() {
  double sparse = 0.0, dense = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    sparse += final_accuracy(trend_config(s, 0.6, SparsityPolicy::top_k(0.2))) / 5;
    dense += final_accuracy(trend_config(s, 0.6, SparsityPolicy::top_k(1.0))) / 5;
  }
  report(7, "sparsification tolerance", std::abs(sparse - dense) <= kSparsityGap,
         fmt("alpha=0.6, 5 seeds: mean acc K=0.2 %.4f vs K=1.0 %.4f, gap %.4f (<= %.2f)", sparse, dense,
             std::abs(sparse - dense), kSparsityGap));
}

void method_ordering() {
  const SparsityPolicy policies[3] = {SparsityPolicy::top_k(0.2), SparsityPolicy::threshold(0.2),
                                      SparsityPolicy::random(0.2)};
  double mean[3] = {0, 0, 0};
  std::uint64_t bytes[3] = {0, 0, 0};
  for (int p = 0; p < 3; ++p)
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const auto r = run_experiment(trend_config(s, 0.3, policies[p]));
      mean[p] += r.final_accuracy / 10;
      bytes[p] += r.total_uplink_bytes / 10;
    }
  std::printf("     | alpha=0.3, T=50, 10 seeds   mean final acc   mean uplink bytes\n");
  const char* names[3] = {"top_k K=0.2", "threshold tau=0.2", "random K=0.2"};
  for (int p = 0; p < 3; ++p) std::printf("     | %-26s %10.4f %19llu\n", names[p], mean[p], static_cast<unsigned long long>(bytes[p]));
  report(8, "method ordering", mean[0] >= mean[2] - kMethodSlack,
         fmt("top_k %.4f >= random %.4f - %.2f (threshold %.4f)", mean[0], mean[2], kMethodSlack, mean[1]));
}

void fedavg_degeneration() {
  auto c = trend_config(21, 0.6, SparsityPolicy::top_k(1.0));
  c.clients = 1;
  c.training.rounds = 10;
  const auto prepared = prepare_task(c);
  const auto& task = prepared.task;
  const auto fed = train_federated(task, c.training).global_params;

  ParamVector w = init_params(task.spec);
  for (std::uint32_t t = 0; t < c.training.rounds; ++t) {
    Rng rng(client_stream_seed(task.seed, 0, t));
    w = oracles::sgd_epochs(task.spec, w, task.train, task.partitions[0].sample_indices, c.training.local_epochs,
                            c.training.learning_rate, c.training.batch_size, rng);
  }
  std::size_t differ = 0;
  double worst = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    differ += fed[j] != w[j];
    worst = std::max(worst, std::abs(fed[j] - w[j]));
  }
  report(9, "fedavg degeneration", differ == 0,
         fmt("N=1, K=1.0, 10 rounds: %zu of %zu parameters differ bitwise from centralized SGD (max abs diff %.1e)",
             differ, w.size(), worst));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void run_determinism() {
  const auto root = fs::temp_directory_path() / ("fedsparse_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<ExperimentConfig> configs{trend_config(3, 0.3, SparsityPolicy::top_k(0.2)),
                                        trend_config(4, 0.6, SparsityPolicy::random(0.1)),
                                        trend_config(5, 0.3, SparsityPolicy::threshold(0.2))};
  configs[1].training.site = SparsifySite::local_gradient;
  configs[2].training.participation = 0.67;
  std::size_t identical = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    configs[i].training.rounds = 10;
    std::string out[2];
    for (int rep = 0; rep < 2; ++rep) {
      configs[i].output_dir = (root / fmt("c%zu_%d", i, rep)).string();
      run_to_directory(configs[i]);
      out[rep] = slurp(fs::path(configs[i].output_dir) / "metrics.csv");
    }
    identical += !out[0].empty() && out[0] == out[1];
  }
  fs::remove_all(root);
  report(10, "determinism", identical == configs.size(),
         fmt("%zu of %zu configs produced byte-identical metrics.csv on rerun", identical, configs.size()));
}

}  // namespace

int main() {
  gradient_correctness();
  sparsifier_oracles();
  codec_identity();
  communication_cost();
  dirichlet_correctness();
  heterogeneity_ordering();
  sparsification_tolerance();
  method_ordering();
  fedavg_degeneration();
  run_determinism();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
