#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "swarmaudit/dataset.hpp"
#include "swarmaudit/errors.hpp"
#include "swarmaudit/nn.hpp"
#include "swarmaudit/rng.hpp"

namespace swarmaudit::swarm {

struct ClientState {
  int id = 0;  // 1-based
  Dataset train_data;
  nn::Mlp model;
  double weight = 0.0;
  std::uint64_t seed = 0;
};

enum class Election { kRoundRobin, kSeededRandom };

struct SwarmConfig {
  int rounds = 1;
  int local_epochs = 1;
  Election election = Election::kRoundRobin;
  nn::TrainConfig train_cfg;          // template; seed/epochs are set per client per round
  std::vector<double> weights;        // optional; empty = take ClientState weights
};

struct RoundLog {
  int round = 0;           // 1-based
  int aggregator_id = 0;
  nn::ModelParams global_model;
  std::vector<double> per_client_train_acc;  // global model on each client's train set
  double shared_test_acc = 0.0;
};

// Rounds are 1-based: round_robin yields 1,2,...,N,1,...
inline int elect_aggregator(int round, int client_count, Election election, Rng& protocol_rng) {
  if (client_count < 2) throw ArgumentError("elect_aggregator: need at least 2 clients");
  if (election == Election::kRoundRobin) return ((round - 1) % client_count) + 1;
  return static_cast<int>(protocol_rng.uniform_int(client_count)) + 1;
}

// Weighted parameter mean. Zero-weight models are skipped entirely so a
// weight vector like [1,0,...] returns the first model bit-for-bit.
inline nn::ModelParams aggregate(const std::vector<nn::ModelParams>& models,
                                 const std::vector<double>& weights) {
  if (models.empty()) throw ArgumentError("aggregate: no models");
  if (models.size() != weights.size()) throw ShapeError("aggregate: models/weights size mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ArgumentError("aggregate: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ArgumentError("aggregate: weights sum to " + std::to_string(sum) + ", expected 1");
  for (const auto& m : models)
    if (!m.same_shape(models.front())) throw ShapeError("aggregate: model shape mismatch");

  nn::ModelParams out = nn::zeros_like(models.front());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    for (std::size_t k = 0; k < out.layers.size(); ++k) {
      auto& acc = out.layers[k];
      const auto& src = models[i].layers[k];
      for (std::size_t j = 0; j < acc.weights.data.size(); ++j)
        acc.weights.data[j] += w * src.weights.data[j];
      for (std::size_t j = 0; j < acc.biases.size(); ++j) acc.biases[j] += w * src.biases[j];
    }
  }
  return out;
}

struct SwarmResult {
  nn::Mlp global_model;
  std::vector<RoundLog> logs;
};

// One training run of the decentralized protocol: per round every client
// trains local_epochs on its own data from the current model, the elected
// aggregator forms the weighted average and broadcasts it. Round 1 starts
// from each client's own initial model. Per-round training seeds derive from
// (client seed, round), so the result is independent of evaluation order.
inline SwarmResult run_swarm(const std::vector<ClientState>& clients, const SwarmConfig& cfg,
                             const Dataset& shared_test) {
  if (clients.size() < 2) throw ArgumentError("run_swarm: need at least 2 clients");
  if (cfg.rounds < 1) throw ArgumentError("run_swarm: rounds must be >= 1");
  if (cfg.local_epochs < 0) throw ArgumentError("run_swarm: local_epochs must be >= 0");
  for (const auto& c : clients)
    if (!c.model.params.same_shape(clients.front().model.params))
      throw ShapeError("run_swarm: client model shapes differ");

  std::vector<double> weights = cfg.weights;
  if (weights.empty()) {
    weights.reserve(clients.size());
    for (const auto& c : clients) weights.push_back(c.weight);
  }
  if (weights.size() != clients.size())
    throw ShapeError("run_swarm: weights size != client count");

  Rng protocol_rng(derive_seed(cfg.train_cfg.seed, SeedDomain::kProtocol));
  const int n = static_cast<int>(clients.size());

  std::vector<nn::Mlp> local(clients.size());
  for (std::size_t i = 0; i < clients.size(); ++i) local[i] = clients[i].model;

  SwarmResult result;
  result.global_model = clients.front().model;  // arch template
  for (int round = 1; round <= cfg.rounds; ++round) {
    std::vector<nn::ModelParams> trained(clients.size());
    for (std::size_t i = 0; i < clients.size(); ++i) {
      nn::TrainConfig tc = cfg.train_cfg;
      tc.epochs = cfg.local_epochs;
      tc.seed = derive_seed(clients[i].seed, static_cast<std::uint64_t>(round));
      trained[i] = nn::train_local(local[i], clients[i].train_data, tc).params;
    }

    const int aggregator = elect_aggregator(round, n, cfg.election, protocol_rng);
    nn::ModelParams global = aggregate(trained, weights);
    result.global_model.params = global;
    for (auto& m : local) m.params = global;  // broadcast

    RoundLog log;
    log.round = round;
    log.aggregator_id = aggregator;
    log.global_model = global;
    log.per_client_train_acc.reserve(clients.size());
    for (const auto& c : clients)
      log.per_client_train_acc.push_back(nn::accuracy(result.global_model, c.train_data));
    log.shared_test_acc = shared_test.empty() ? 0.0 : nn::accuracy(result.global_model, shared_test);
    result.logs.push_back(std::move(log));
  }
  return result;
}

}  // namespace swarmaudit::swarm
