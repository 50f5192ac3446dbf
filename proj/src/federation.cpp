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

#include "fedsparse/federation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include "fedsparse/codec.hpp"
#include "fedsparse/error.hpp"
#include "fedsparse/kernels.hpp"

namespace fedsparse {

std::string to_string(SparsifySite s) { return s == SparsifySite::uploaded_delta ? "uploaded_delta" : "local_gradient"; }

SparsifySite sparsify_site_from_string(const std::string& s) {
  if (s == "uploaded_delta") return SparsifySite::uploaded_delta;
  if (s == "local_gradient") return SparsifySite::local_gradient;
  throw InvalidArgument("unknown sparsify site '" + s + "' (expected uploaded_delta or local_gradient)");
}

void validate(const TrainingConfig& cfg) {
  if (cfg.rounds < 1) throw InvalidArgument("rounds must be >= 1");
  if (cfg.local_epochs < 1) throw InvalidArgument("local_epochs must be >= 1");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw InvalidArgument("learning_rate must be a finite value >= 0");
  if (cfg.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(cfg.participation > 0.0 && cfg.participation <= 1.0))
    throw InvalidArgument("participation must be in (0,1]");
  validate(cfg.policy);
}

std::uint64_t client_stream_seed(std::uint64_t experiment_seed, std::uint16_t client_id, std::uint32_t round) {
  return derive_seed(experiment_seed, {0xc11e, client_id, round});
}

ClientUpdate client_local_train(ClientState& client, const Dataset& train, const ModelSpec& spec,
                                std::span<const double> global_params, const TrainingConfig& cfg,
                                std::uint32_t round) {
  if (client.partition.sample_indices.empty())
    throw DataError("client " + std::to_string(client.client_id) + " has no local data");
  const Exec exec = cfg.exec;
  const double eta = cfg.learning_rate;
  auto& w = client.local_params;
  w.assign(global_params.begin(), global_params.end());

  std::vector<std::size_t> order = client.partition.sample_indices;
  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    client.rng.shuffle(order.begin(), order.end());
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const Batch batch = make_batch(train, std::span(order).subspan(start, stop - start));
      const auto step = loss_and_grad(spec, w, batch, exec);
      if (cfg.site == SparsifySite::uploaded_delta) {
        kernels::axpy(exec, -eta, step.grad, w);
      } else {
        if (!all_finite(step.grad)) throw DivergenceError(client.client_id, epoch, batch_no);
        const auto sparse = sparsify(cfg.policy, step.grad, client.rng.next_u64());
        for (std::size_t k = 0; k < sparse.nnz(); ++k) w[sparse.indices[k]] -= eta * sparse.values[k];
      }
      if (!all_finite(w)) throw DivergenceError(client.client_id, epoch, batch_no);
    }
  }

  ClientUpdate out;
  out.client_id = client.client_id;
  out.sample_count = client.partition.size();
  out.site = cfg.site;
  if (cfg.site == SparsifySite::uploaded_delta) {
    ParamVector delta(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) delta[j] = w[j] - global_params[j];
    out.upload = sparsify(cfg.policy, delta, client.rng.next_u64());
  } else {
    out.upload = dense_update(w);
  }
  out.upload.round = round;
  out.upload.client_id = client.client_id;
  return out;
}

ParamVector aggregate(std::span<const ClientUpdate> updates, std::span<const double> prev, Exec exec) {
  if (updates.empty()) throw InvalidArgument("aggregate needs at least one client update");
  std::vector<const ClientUpdate*> ordered;
  for (const auto& u : updates) {
    if (u.upload.dim != prev.size())
      throw ShapeError("update from client " + std::to_string(u.client_id) + " has dim " +
                       std::to_string(u.upload.dim) + ", model has " + std::to_string(prev.size()));
    if (u.sample_count == 0)
      throw InvalidArgument("update from client " + std::to_string(u.client_id) + " has sample_count 0");
    ordered.push_back(&u);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const ClientUpdate* a, const ClientUpdate* b) { return a->client_id < b->client_id; });
  for (std::size_t k = 1; k < ordered.size(); ++k)
    if (ordered[k]->client_id == ordered[k - 1]->client_id)
      throw InvalidArgument("duplicate update from client " + std::to_string(ordered[k]->client_id));

  std::size_t total = 0;
  for (const auto* u : ordered) total += u->sample_count;

  // Combine updates rather than models: w' = w + sum_i p_i (w_i - w). Equal to
  // the weighted model average, and leaves w untouched when every update is zero.
  std::vector<ParamVector> deltas;
  std::vector<double> weights;
  deltas.reserve(ordered.size());
  for (const auto* u : ordered) {
    ParamVector d = densify(u->upload);
    if (u->site == SparsifySite::local_gradient) {
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = d[j] - prev[j];
    }
    deltas.push_back(std::move(d));
    weights.push_back(static_cast<double>(u->sample_count) / static_cast<double>(total));
  }
  std::vector<std::span<const double>> views(deltas.begin(), deltas.end());
  ParamVector out(prev.size());
  kernels::weighted_sum(exec, views, weights, out);
  kernels::axpy(exec, 1.0, prev, out);
  return out;
}

double global_loss(const ModelSpec& spec, std::span<const double> params, std::span<const Partition> partitions,
                   const Dataset& train, Exec exec) {
  if (partitions.empty()) throw InvalidArgument("global loss needs at least one partition");
  std::size_t total = 0;
  for (const auto& p : partitions) {
    if (p.sample_indices.empty())
      throw DataError("client " + std::to_string(p.client_id) + " has an empty partition");
    total += p.size();
  }
  double loss = 0.0;
  for (const auto& p : partitions) {
    const Batch b = make_batch(train, p.sample_indices);
    const double local = cross_entropy(forward(spec, params, b.inputs, exec), b.labels);
    loss += (static_cast<double>(p.size()) / static_cast<double>(total)) * local;
  }
  return loss;
}

std::vector<std::uint16_t> select_clients(std::size_t n, double participation, std::uint64_t experiment_seed,
                                          std::uint32_t round) {
  if (!(participation > 0.0 && participation <= 1.0)) throw InvalidArgument("participation must be in (0,1]");
  const std::size_t k = retained_count(n, participation);
  std::vector<std::uint16_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::uint16_t{0});
  if (k < n) {
    Rng rng(derive_seed(experiment_seed, {0x5e1, round}));
    for (std::size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

RoundMetrics run_round(ServerState& server, const FederatedTask& task, const TrainingConfig& cfg,
                       const UploadObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t round = server.round;
  const auto selected = select_clients(task.partitions.size(), cfg.participation, task.seed, round);
  const std::size_t n_sel = selected.size();

  std::vector<ClientUpdate> updates(n_sel);
  std::vector<std::exception_ptr> errors(n_sel);
  auto train_one = [&](std::size_t k) {
    try {
      ClientState client(task.partitions[selected[k]], task.seed, round);
      updates[k] = client_local_train(client, task.train, task.spec, server.global_params, cfg, round);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (cfg.exec == Exec::parallel) {
    const auto n = static_cast<std::int64_t>(n_sel);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < n; ++k) train_one(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < n_sel; ++k) train_one(k);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RoundMetrics m;
  m.round = round;
  m.downlink_bytes = n_sel * codec::encoded_size(server.global_params.size());
  for (const auto& u : updates) {
    m.uplink_bytes += codec::encoded_size(u.upload.nnz());
    if (observer) observer(u);
  }

  server.global_params = aggregate(updates, server.global_params, cfg.exec);
  if (!all_finite(server.global_params)) throw Error("aggregated model is non-finite in round " + std::to_string(round));
  m.global_loss = global_loss(task.spec, server.global_params, task.partitions, task.train, cfg.exec);
  m.top1_accuracy = evaluate(task.spec, server.global_params, task.test.inputs, task.test.labels, cfg.exec);
  m.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  server.history.push_back(m);
  ++server.round;
  return m;
}

ServerState train_federated(const FederatedTask& task, const TrainingConfig& cfg, const UploadObserver& observer) {
  validate(cfg);
  validate(task.spec);
  check_disjoint_cover(task.partitions, task.train.size());
  if (task.spec.input_dim() != task.train.input_dim())
    throw ShapeError("model input dim does not match dataset feature count");
  ServerState server;
  server.global_params = init_params(task.spec);
  for (std::size_t t = 0; t < cfg.rounds; ++t) run_round(server, task, cfg, observer);
  return server;
}

}  // namespace fedsparse
