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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedsparse/dataset.hpp"
#include "fedsparse/model.hpp"
#include "fedsparse/partition.hpp"
#include "fedsparse/rng.hpp"
#include "fedsparse/sparsify.hpp"

namespace fedsparse {

// Where the sparsity policy is applied.
//   uploaded_delta: dense local SGD, the round's model delta is sparsified for upload.
//   local_gradient: every minibatch gradient is sparsified before the SGD step and
//                   the full local model is uploaded.
enum class SparsifySite { uploaded_delta, local_gradient };

std::string to_string(SparsifySite s);
SparsifySite sparsify_site_from_string(const std::string& s);

struct TrainingConfig {
  std::size_t rounds = 200;
  std::size_t local_epochs = 5;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  SparsityPolicy policy = SparsityPolicy::top_k(0.2);
  double participation = 1.0;
  SparsifySite site = SparsifySite::uploaded_delta;
  // serial: clients train one after another on single-threaded kernels.
  // parallel: clients of a round train concurrently under OpenMP.
  Exec exec = Exec::serial;

  bool operator==(const TrainingConfig&) const = default;
};

void validate(const TrainingConfig& cfg);

// Seed of the private stream a client uses in a given round.
std::uint64_t client_stream_seed(std::uint64_t experiment_seed, std::uint16_t client_id, std::uint32_t round);

struct ClientState {
  std::uint16_t client_id = 0;
  Partition partition;
  ParamVector local_params;
  Rng rng;

  ClientState(Partition p, std::uint64_t experiment_seed, std::uint32_t round)
      : client_id(p.client_id), partition(std::move(p)), rng(client_stream_seed(experiment_seed, client_id, round)) {}
};

struct ClientUpdate {
  std::uint16_t client_id = 0;
  std::size_t sample_count = 0;
  SparsifySite site = SparsifySite::uploaded_delta;
  // uploaded_delta: sparsified w_i - w. local_gradient: the dense local model w_i.
  SparseUpdate upload;
};

ClientUpdate client_local_train(ClientState& client, const Dataset& train, const ModelSpec& spec,
                                std::span<const double> global_params, const TrainingConfig& cfg,
                                std::uint32_t round);

// w' = w + sum_i (n_i / sum n) (w_i - w), clients combined in ascending client_id order.
ParamVector aggregate(std::span<const ClientUpdate> updates, std::span<const double> prev, Exec exec = Exec::serial);

// sum_i (|D_i| / |D|) * mean cross-entropy over D_i.
double global_loss(const ModelSpec& spec, std::span<const double> params, std::span<const Partition> partitions,
                   const Dataset& train, Exec exec = Exec::serial);

// ceil(participation * n) distinct ids in ascending order.
std::vector<std::uint16_t> select_clients(std::size_t n, double participation, std::uint64_t experiment_seed,
                                          std::uint32_t round);

struct RoundMetrics {
  std::uint32_t round = 0;
  double global_loss = 0.0;
  double top1_accuracy = 0.0;
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  double elapsed_s = 0.0;
};

struct ServerState {
  ParamVector global_params;
  std::uint32_t round = 0;
  std::vector<RoundMetrics> history;
};

// Everything that stays fixed over a federated run.
struct FederatedTask {
  ModelSpec spec;
  Dataset train;
  Dataset test;
  std::vector<Partition> partitions;
  std::uint64_t seed = 0;
};

using UploadObserver = std::function<void(const ClientUpdate&)>;

RoundMetrics run_round(ServerState& server, const FederatedTask& task, const TrainingConfig& cfg,
                       const UploadObserver& observer = {});

// cfg.rounds calls to run_round starting from init_params(task.spec).
ServerState train_federated(const FederatedTask& task, const TrainingConfig& cfg, const UploadObserver& observer = {});

}  // namespace fedsparse
