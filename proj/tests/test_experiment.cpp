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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "fedsparse/codec.hpp"
#include "fedsparse/error.hpp"
#include "fedsparse/experiment.hpp"
#include "fedsparse/update_json.hpp"

using namespace fedsparse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("fedsparse_exp_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

ExperimentConfig smoke(const fs::path& out, std::size_t rounds = 2) {
  ExperimentConfig c;
  c.seed = 5;
  c.dataset.synthetic = SyntheticSpec{3, 30, 4, 2.0, 0};
  c.model.hidden = {6};
  c.training.rounds = rounds;
  c.training.local_epochs = 1;
  c.training.batch_size = 8;
  c.training.learning_rate = 0.05;
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("tiny run emits one round") {
  TempDir tmp("tiny");
  auto c = smoke(tmp.path, 1);
  const auto r = run_experiment(c);
  REQUIRE(r.history.size() == 1);
  CHECK(r.final_accuracy == r.history[0].top1_accuracy);
  CHECK(r.final_loss == r.history[0].global_loss);
  CHECK(r.total_uplink_bytes == r.history[0].uplink_bytes);
  CHECK(r.partitions.size() == 3);
}

TEST_CASE("prepared task") {
  TempDir tmp("prep");
  auto c = smoke(tmp.path);
  const auto p = prepare_task(c);
  CHECK(p.task.spec.layer_sizes == std::vector<std::size_t>{4, 6, 3});
  CHECK(p.task.train.size() + p.task.test.size() == 90);
  CHECK(p.task.test.size() == 18);
  CHECK_NOTHROW(check_disjoint_cover(p.task.partitions, p.task.train.size()));
  // train features are standardized
  for (std::size_t j = 0; j < 4; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.task.train.size(); ++i) m += p.task.train.inputs(i, j);
    CHECK(std::abs(m / p.task.train.size()) < 1e-10);
  }
  c.test_split = TestSplitMode::per_client;
  const auto q = prepare_task(c);
  CHECK(q.task.train.size() + q.task.test.size() == 90);
  CHECK_NOTHROW(check_disjoint_cover(q.task.partitions, q.task.train.size()));

  c.clients = 500;
  CHECK_THROWS_AS(prepare_task(c), DataError);
}

TEST_CASE("run writes metrics, summary and partitions") {
  TempDir tmp("run");
  const auto c = smoke(tmp.path / "out");
  const auto r = run_to_directory(c);
  const auto metrics = slurp(tmp.path / "out" / "metrics.csv");
  const auto rows = csv_rows(metrics);
  REQUIRE(rows.size() == 3);
  CHECK(metrics.substr(0, metrics.find('\n')) == "round,global_loss,top1_accuracy,uplink_bytes,downlink_bytes,elapsed_s");
  CHECK(rows[1][0] == "0");
  CHECK(rows[2][0] == "1");

  const auto summary = json::parse(slurp(tmp.path / "out" / "summary.json"));
  std::uint64_t up = 0, down = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    up += std::stoull(rows[i][3]);
    down += std::stoull(rows[i][4]);
  }
  CHECK(summary.at("total_uplink_bytes").get<std::uint64_t>() == up);
  CHECK(summary.at("total_downlink_bytes").get<std::uint64_t>() == down);
  CHECK(summary.at("rounds").get<std::size_t>() == 2);
  CHECK(summary.at("final_accuracy").get<double>() == r.final_accuracy);
  CHECK(summary.contains("wall_time_s"));
  CHECK(summary.contains("version"));
  CHECK(parse_config(summary.at("config")) == c);

  const auto parts = csv_rows(slurp(tmp.path / "out" / "partitions.csv"));
  CHECK(parts.size() == 1 + r.partitions[0].size() + r.partitions[1].size() + r.partitions[2].size());
  CHECK(!fs::exists(tmp.path / "out" / "updates"));
  for (const auto& e : fs::directory_iterator(tmp.path / "out")) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("repeated runs give identical metrics") {
  TempDir tmp("det");
  auto c = smoke(tmp.path / "a", 3);
  run_to_directory(c);
  c.output_dir = (tmp.path / "b").string();
  run_to_directory(c);
  CHECK(slurp(tmp.path / "a" / "metrics.csv") == slurp(tmp.path / "b" / "metrics.csv"));
  c.seed = 6;
  c.output_dir = (tmp.path / "c").string();
  run_to_directory(c);
  CHECK(slurp(tmp.path / "a" / "metrics.csv") != slurp(tmp.path / "c" / "metrics.csv"));

  // parallel clients reproduce the serial history
  auto p = smoke(tmp.path / "p", 3);
  p.training.exec = Exec::parallel;
  const auto rp = run_experiment(p);
  const auto rs = run_experiment(smoke(tmp.path / "s", 3));
  CHECK(std::abs(rp.final_loss - rs.final_loss) < 1e-9);
  CHECK(format_metrics_csv(rp.history, false) == format_metrics_csv(rs.history, false));
}

TEST_CASE("dumped updates decode and round trip through JSON") {
  TempDir tmp("dump");
  auto c = smoke(tmp.path / "out");
  c.dump_updates = true;
  run_to_directory(c);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "out" / "updates")) {
    ++files;
    const auto bytes = slurp(e.path());
    const std::vector<std::uint8_t> raw(bytes.begin(), bytes.end());
    const auto u = codec::decode(raw);
    const auto doc = update_to_json(u);
    CHECK(doc.at("entries").get<std::size_t>() == u.nnz());
    CHECK(codec::encode(update_from_json(json::parse(doc.dump()))) == raw);
  }
  CHECK(files == 6);
  CHECK(fs::exists(tmp.path / "out" / "updates" / "r0001_c002.fsu"));
}

TEST_CASE("sweeps") {
  TempDir tmp("sweep");
  auto base = smoke(tmp.path / "sw");
  base.training.policy = SparsityPolicy::top_k(0.2);

  SUBCASE("grid parsing and cell layout") {
    const auto g = parse_grid(json::parse(R"({"alpha": [0.3, 0.6], "rate": [0.1, 0.2, 0.3, 0.4]})"));
    CHECK(cell_count(g) == 8);
    const auto c5 = cell_config(base, g, 5);
    CHECK(c5.alpha == 0.6);
    CHECK(c5.training.policy == SparsityPolicy::top_k(0.2));
    CHECK(c5.seed == base.seed + 5);
    const auto g2 = parse_grid(json::parse(R"({"alpha": [0.3], "policy": ["top_k", "dense", "threshold"],
                                               "rate": [0.1, 0.2]})"));
    CHECK(cell_count(g2) == 5);
    CHECK(cell_config(base, g2, 2).training.policy == SparsityPolicy::dense());
    CHECK(cell_config(base, g2, 3).training.policy == SparsityPolicy::threshold(0.1));
    CHECK_THROWS_AS(parse_grid(json::parse(R"({"alpha": []})")), ConfigError);
    CHECK_THROWS_AS(parse_grid(json::parse(R"({"alpha": [0.3], "rate": [2]})")), ConfigError);
    CHECK_THROWS_AS(parse_grid(json::parse(R"({"alphas": [0.3]})")), ConfigError);
  }
  SUBCASE("alpha by rate grid") {
    const auto g = parse_grid(json::parse(R"({"alpha": [0.3, 0.6], "rate": [0.1, 0.2, 0.3, 0.4]})"));
    const auto r = run_sweep(base, g, 2, true);
    REQUIRE(r.cells.size() == 8);
    CHECK(r.failures() == 0);
    const auto rows = csv_rows(slurp(tmp.path / "sw" / "sweep.csv"));
    REQUIRE(rows.size() == 9);
    CHECK(rows[0] == std::vector<std::string>{"alpha", "policy", "rate", "final_accuracy", "total_bytes"});
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t k = 1; k < 4; ++k)
        CHECK(r.cells[a * 4 + k].total_bytes > r.cells[a * 4 + k - 1].total_bytes);
    CHECK(fs::exists(tmp.path / "sw" / "pivot.txt"));
    CHECK(fs::exists(tmp.path / "sw" / "cells" / "cell_007" / "metrics.csv"));
    const auto pivot = format_pivot(r);
    CHECK(pivot.find("0.3") != std::string::npos);
    CHECK(pivot.find("top_k") != std::string::npos);
  }
  SUBCASE("one cell equals a single run") {
    const auto g = parse_grid(json::parse(R"({"alpha": [0.6], "policy": ["random"], "rate": [0.3]})"));
    const auto r = run_sweep(base, g, 1, false);
    REQUIRE(r.cells.size() == 1);
    const auto single = run_experiment(cell_config(base, g, 0));
    CHECK(r.cells[0].final_accuracy == single.final_accuracy);
    CHECK(r.cells[0].total_bytes == single.total_uplink_bytes + single.total_downlink_bytes);
  }
  SUBCASE("cells do not depend on scheduling") {
    const auto g = parse_grid(json::parse(R"({"alpha": [0.3, 1.0], "policy": ["top_k", "random"], "rate": [0.2]})"));
    const auto a = run_sweep(base, g, 1, false);
    const auto b = run_sweep(base, g, 4, false);
    CHECK(format_sweep_csv(a) == format_sweep_csv(b));
  }
  SUBCASE("a failing cell does not stop the rest") {
    auto bad = base;
    bad.clients = 60;  // more clients than training samples
    bad.dataset.synthetic.n_per_class = 20;
    const auto g = parse_grid(json::parse(R"({"alpha": [0.5], "rate": [0.2, 0.4]})"));
    const auto r = run_sweep(bad, g, 2, false);
    CHECK(r.failures() == 2);
    CHECK(format_sweep_csv(r).find("nan") != std::string::npos);
    const auto ok = run_sweep(base, g, 2, false);
    CHECK(ok.failures() == 0);
  }
}
