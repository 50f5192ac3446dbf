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

#include "fedsparse/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fedsparse/codec.hpp"
#include "fedsparse/error.hpp"
#include "fedsparse/rng.hpp"
#include "fedsparse/version.hpp"

namespace fedsparse {

using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  if (d.kind == DatasetKind::csv) return load_csv(d.path, d.input_dim, d.classes, d.skip_header);
  SyntheticSpec s = d.synthetic;
  if (!d.has_seed) s.seed = derive_seed(cfg.seed, {0xda7a});
  return gen_synthetic(s);
}

}  // namespace

PreparedTask prepare_task(const ExperimentConfig& cfg) {
  PreparedTask out;
  const Dataset ds = load_dataset(cfg);
  validate(ds);

  Dataset train, test;
  std::vector<Partition> parts;
  if (cfg.test_split == TestSplitMode::global) {
    auto split = train_test_split(ds, cfg.test_fraction, derive_seed(cfg.seed, {0x5b17}));
    out.warnings = std::move(split.warnings);
    train = std::move(split.train);
    test = std::move(split.test);
    auto pr = partition_dataset(train.labels, train.class_count, cfg.clients, cfg.alpha,
                                derive_seed(cfg.seed, {0x9a27}));
    parts = std::move(pr.partitions);
    out.class_proportions = std::move(pr.class_proportions);
  } else {
    auto pr = partition_dataset(ds.labels, ds.class_count, cfg.clients, cfg.alpha, derive_seed(cfg.seed, {0x9a27}));
    out.class_proportions = std::move(pr.class_proportions);
    std::vector<std::size_t> train_idx, test_idx;
    std::vector<std::vector<std::size_t>> client_train(pr.partitions.size());
    for (std::size_t k = 0; k < pr.partitions.size(); ++k) {
      const auto& members = pr.partitions[k].sample_indices;
      const Dataset local = subset(ds, members);
      auto split = train_test_split(local, cfg.test_fraction, derive_seed(cfg.seed, {0x5b17, k}));
      for (auto& w : split.warnings) out.warnings.push_back("client " + std::to_string(k) + ": " + w);
      for (auto i : split.train_indices) client_train[k].push_back(members[i]);
      for (auto i : split.test_indices) test_idx.push_back(members[i]);
      train_idx.insert(train_idx.end(), client_train[k].begin(), client_train[k].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    train = subset(ds, train_idx);
    test = subset(ds, test_idx);
    // Re-express every client's samples as positions in the train set.
    std::vector<std::size_t> position(ds.size());
    for (std::size_t p = 0; p < train_idx.size(); ++p) position[train_idx[p]] = p;
    const double n = static_cast<double>(train_idx.size());
    for (std::size_t k = 0; k < client_train.size(); ++k) {
      Partition part;
      part.client_id = static_cast<std::uint16_t>(k);
      for (auto i : client_train[k]) part.sample_indices.push_back(position[i]);
      std::sort(part.sample_indices.begin(), part.sample_indices.end());
      part.weight = static_cast<double>(part.size()) / n;
      parts.push_back(std::move(part));
    }
  }
  if (test.size() == 0) throw DataError("test split is empty; increase test_fraction or the dataset size");

  if (cfg.dataset.normalize) {
    const auto stats = fit_normalization(train);
    train = apply_normalization(train, stats);
    test = apply_normalization(test, stats);
  }

  auto& task = out.task;
  task.spec.layer_sizes.push_back(ds.input_dim());
  for (auto h : cfg.model.hidden) task.spec.layer_sizes.push_back(h);
  task.spec.layer_sizes.push_back(ds.class_count);
  task.spec.activation = cfg.model.activation;
  task.spec.seed = derive_seed(cfg.seed, {0x3d1});
  task.train = std::move(train);
  task.test = std::move(test);
  task.partitions = std::move(parts);
  task.seed = cfg.seed;
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const UploadObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  auto prepared = prepare_task(cfg);
  const auto& task = prepared.task;
  auto server = train_federated(task, cfg.training, observer);

  ExperimentResult r;
  r.history = std::move(server.history);
  r.final_params = std::move(server.global_params);
  r.final_accuracy = r.history.back().top1_accuracy;
  r.final_loss = r.history.back().global_loss;
  for (const auto& m : r.history) {
    r.total_uplink_bytes += m.uplink_bytes;
    r.total_downlink_bytes += m.downlink_bytes;
  }
  r.label_skew = max_label_skew(task.partitions, task.train.labels, task.train.class_count);
  r.partitions = task.partitions;
  r.warnings = std::move(prepared.warnings);
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_metrics_csv(const std::vector<RoundMetrics>& history, bool include_timing) {
  std::ostringstream os;
  os << kMetricsHeader << '\n';
  for (const auto& m : history) {
    os << m.round << ',' << num(m.global_loss) << ',' << num(m.top1_accuracy) << ',' << m.uplink_bytes << ','
       << m.downlink_bytes << ',' << (include_timing ? num(m.elapsed_s) : std::string("0")) << '\n';
  }
  return os.str();
}

json summary_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  json rounds = json::array();
  for (const auto& m : r.history) rounds.push_back(m.elapsed_s);
  std::vector<std::size_t> sizes;
  for (const auto& p : r.partitions) sizes.push_back(p.size());
  return {{"version", kVersion},
          {"rounds", r.history.size()},
          {"final_accuracy", r.final_accuracy},
          {"final_global_loss", r.final_loss},
          {"total_uplink_bytes", r.total_uplink_bytes},
          {"total_downlink_bytes", r.total_downlink_bytes},
          {"wall_time_s", r.wall_time_s},
          {"round_wall_times_s", rounds},
          {"client_sample_counts", sizes},
          {"label_skew", r.label_skew},
          {"warnings", r.warnings},
          {"config", emit_config(cfg)}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ExperimentResult run_to_directory(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  UploadObserver observer;
  if (cfg.dump_updates) {
    std::filesystem::create_directories(dir / "updates");
    observer = [&dir](const ClientUpdate& u) {
      char name[64];
      std::snprintf(name, sizeof(name), "r%04u_c%03u.fsu", static_cast<unsigned>(u.upload.round),
                    static_cast<unsigned>(u.client_id));
      codec::write_file(dir / "updates" / name, u.upload);
    };
  }
  auto result = run_experiment(cfg, observer);
  write_file_atomic(dir / "metrics.csv", format_metrics_csv(result.history, cfg.training.exec == Exec::parallel));
  write_file_atomic(dir / "summary.json", summary_json(cfg, result).dump(2) + "\n");
  write_partition_csv(dir / "partitions.csv", result.partitions);
  return result;
}

SweepGrid parse_grid(const json& doc) {
  if (!doc.is_object()) throw ConfigError("grid", "expected an object");
  for (const auto& [k, v] : doc.items())
    if (k != "alpha" && k != "policy" && k != "rate") throw ConfigError("grid." + k, "unknown key");
  auto reals = [&](const char* key) {
    const std::string f = std::string("grid.") + key;
    if (!doc.contains(key) || !doc.at(key).is_array() || doc.at(key).empty())
      throw ConfigError(f, "must be a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& v : doc.at(key)) {
      if (!v.is_number()) throw ConfigError(f, "must be a nonempty array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  };
  SweepGrid g;
  g.alphas = reals("alpha");
  for (double a : g.alphas)
    if (!(a > 0.0)) throw ConfigError("grid.alpha", "every alpha must be > 0");
  if (doc.contains("policy")) {
    const auto& p = doc.at("policy");
    if (!p.is_array() || p.empty()) throw ConfigError("grid.policy", "must be a nonempty array of policy names");
    for (const auto& v : p) {
      if (!v.is_string()) throw ConfigError("grid.policy", "must be a nonempty array of policy names");
      try {
        g.policies.push_back(policy_kind_from_string(v.get<std::string>()));
      } catch (const InvalidArgument& e) {
        throw ConfigError("grid.policy", e.what());
      }
    }
  } else {
    g.policies = {PolicyKind::top_k};
  }
  g.rates = reals("rate");
  for (auto kind : g.policies) {
    for (double r : g.rates) {
      if ((kind == PolicyKind::top_k || kind == PolicyKind::random) && !(r > 0.0 && r <= 1.0))
        throw ConfigError("grid.rate", "rates for " + to_string(kind) + " must be in (0,1]");
      if (kind == PolicyKind::threshold && !(r >= 0.0))
        throw ConfigError("grid.rate", "thresholds must be >= 0");
    }
  }
  return g;
}

std::size_t cell_count(const SweepGrid& grid) {
  std::size_t per_alpha = 0;
  for (auto kind : grid.policies) per_alpha += kind == PolicyKind::dense ? 1 : grid.rates.size();
  return per_alpha * grid.alphas.size();
}

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepGrid& grid, std::size_t k) {
  std::size_t idx = 0;
  for (double alpha : grid.alphas) {
    for (auto kind : grid.policies) {
      const std::size_t n = kind == PolicyKind::dense ? 1 : grid.rates.size();
      for (std::size_t r = 0; r < n; ++r, ++idx) {
        if (idx != k) continue;
        ExperimentConfig c = base;
        c.alpha = alpha;
        switch (kind) {
          case PolicyKind::top_k: c.training.policy = SparsityPolicy::top_k(grid.rates[r]); break;
          case PolicyKind::random: c.training.policy = SparsityPolicy::random(grid.rates[r]); break;
          case PolicyKind::threshold: c.training.policy = SparsityPolicy::threshold(grid.rates[r]); break;
          case PolicyKind::dense: c.training.policy = SparsityPolicy::dense(); break;
        }
        c.seed = base.seed + k;
        char name[32];
        std::snprintf(name, sizeof(name), "cell_%03zu", k);
        c.output_dir = (std::filesystem::path(base.output_dir) / "cells" / name).string();
        return c;
      }
    }
  }
  throw InvalidArgument("sweep cell " + std::to_string(k) + " out of range");
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.ok; }));
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepGrid& grid, std::size_t jobs, bool write_outputs) {
  const std::size_t n = cell_count(grid);
  if (n == 0) throw ConfigError("grid", "grid has no cells");
  SweepResult result;
  result.cells.resize(n);
  auto run_cell = [&](std::size_t k) {
    auto& cell = result.cells[k];
    cell.index = k;
    try {
      const auto cfg = cell_config(base, grid, k);
      cell.alpha = cfg.alpha;
      cell.policy = cfg.training.policy;
      cell.seed = cfg.seed;
      const auto r = write_outputs ? run_to_directory(cfg) : run_experiment(cfg);
      cell.final_accuracy = r.final_accuracy;
      cell.total_bytes = r.total_uplink_bytes + r.total_downlink_bytes;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };
  const int threads = static_cast<int>(std::max<std::size_t>(1, jobs));
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
  for (std::int64_t k = 0; k < count; ++k) run_cell(static_cast<std::size_t>(k));

  if (write_outputs) {
    const std::filesystem::path dir(base.output_dir);
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "sweep.csv", format_sweep_csv(result));
    write_file_atomic(dir / "pivot.txt", format_pivot(result));
  }
  return result;
}

std::string format_sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "alpha,policy,rate,final_accuracy,total_bytes\n";
  for (const auto& c : r.cells) {
    os << num(c.alpha) << ',' << to_string(c.policy.kind) << ',' << num(c.policy.parameter()) << ',';
    if (c.ok)
      os << num(c.final_accuracy) << ',' << c.total_bytes << '\n';
    else
      os << "nan,\n";
  }
  return os.str();
}

std::string format_pivot(const SweepResult& r) {
  std::vector<double> columns;
  std::vector<std::pair<double, PolicyKind>> rows;
  for (const auto& c : r.cells) {
    if (std::find(columns.begin(), columns.end(), c.policy.parameter()) == columns.end())
      columns.push_back(c.policy.parameter());
    const std::pair<double, PolicyKind> key{c.alpha, c.policy.kind};
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
  }
  std::ostringstream os;
  os << "Top-1 accuracy (%) by alpha / policy and rate (K, or tau for threshold)\n";
  os << std::left << std::setw(8) << "alpha" << std::setw(11) << "policy";
  for (double col : columns) os << std::right << std::setw(10) << num(col);
  os << '\n';
  for (const auto& [alpha, kind] : rows) {
    os << std::left << std::setw(8) << num(alpha) << std::setw(11) << to_string(kind);
    for (double col : columns) {
      auto it = std::find_if(r.cells.begin(), r.cells.end(), [&](const SweepCell& c) {
        return c.alpha == alpha && c.policy.kind == kind && c.policy.parameter() == col;
      });
      std::ostringstream cell;
      if (it == r.cells.end())
        cell << "-";
      else if (!it->ok)
        cell << "FAIL";
      else
        cell << std::fixed << std::setprecision(2) << 100.0 * it->final_accuracy;
      os << std::right << std::setw(10) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace fedsparse
