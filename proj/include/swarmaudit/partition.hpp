#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "swarmaudit/dataset.hpp"
#include "swarmaudit/errors.hpp"
#include "swarmaudit/nn.hpp"
#include "swarmaudit/rng.hpp"

namespace swarmaudit {

enum class PartitionMode { kIid, kDirichlet };

struct PartitionSpec {
  PartitionMode mode = PartitionMode::kIid;
  double alpha = 0.5;       // dirichlet concentration
  int client_count = 2;
  std::uint64_t seed = 0;
  std::vector<double> weights;  // optional per-client share; empty = uniform

  void validate() const {
    if (client_count < 2) throw ArgumentError("partition: client_count must be >= 2");
    if (mode == PartitionMode::kDirichlet && alpha <= 0.0)
      throw ArgumentError("partition: alpha must be > 0 in dirichlet mode");
    if (!weights.empty()) {
      if (static_cast<int>(weights.size()) != client_count)
        throw ArgumentError("partition: weights size != client_count");
      double sum = 0.0;
      for (double w : weights) {
        if (w <= 0.0) throw ArgumentError("partition: weights must be positive");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("partition: weights must sum to 1");
    }
  }
};

struct PartitionResult {
  std::vector<std::vector<std::size_t>> client_indices;  // positions into the input
  Matrix class_proportions;  // client_count x class_count; dirichlet draws (iid: empty)
};

namespace detail {

inline std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& labels,
                                                              int class_count) {
  std::vector<std::vector<std::size_t>> per_class(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) per_class[labels[i]].push_back(i);
  return per_class;
}

// Deals one class's shuffled indices into per-client quotas proportional to
// the weights: floor shares, then largest remainders. Remainder ties rotate
// with the class id so equal-weight totals stay balanced across classes.
inline void deal_class(const std::vector<std::size_t>& shuffled, int class_id,
                       const std::vector<double>& weights,
                       std::vector<std::vector<std::size_t>>& out) {
  const int clients = static_cast<int>(out.size());
  const std::size_t n = shuffled.size();
  std::vector<std::size_t> quota(clients);
  std::vector<std::pair<double, int>> frac(clients);
  std::size_t assigned = 0;
  for (int k = 0; k < clients; ++k) {
    const double share = weights[k] * static_cast<double>(n);
    quota[k] = static_cast<std::size_t>(share);
    frac[k] = {share - static_cast<double>(quota[k]), k};
    assigned += quota[k];
  }
  const int rot = class_id % clients;
  std::stable_sort(frac.begin(), frac.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return (a.second - rot + clients) % clients < (b.second - rot + clients) % clients;
  });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++quota[frac[r % clients].second];

  std::size_t pos = 0;
  for (int k = 0; k < clients; ++k)
    for (std::size_t c = 0; c < quota[k]; ++c) out[k].push_back(shuffled[pos++]);
}

inline PartitionResult partition_iid(const std::vector<int>& labels, int class_count,
                                     const PartitionSpec& spec) {
  const auto per_class = indices_by_class(labels, class_count);
  for (int c = 0; c < class_count; ++c)
    if (per_class[c].size() < static_cast<std::size_t>(spec.client_count))
      throw ArgumentError("partition: class " + std::to_string(c) +
                          " has fewer samples than clients");

  const std::vector<double> weights =
      spec.weights.empty()
          ? std::vector<double>(spec.client_count, 1.0 / spec.client_count)
          : spec.weights;

  Rng rng(spec.seed);
  PartitionResult res;
  res.client_indices.resize(spec.client_count);
  for (int c = 0; c < class_count; ++c) {
    auto shuffled = per_class[c];
    rng.shuffle(shuffled);
    deal_class(shuffled, c, weights, res.client_indices);
  }
  return res;
}

inline PartitionResult partition_dirichlet(const std::vector<int>& labels, int class_count,
                                           const PartitionSpec& spec) {
  if (labels.size() < static_cast<std::size_t>(spec.client_count))
    throw ArgumentError("partition: fewer samples than clients");
  const auto per_class = indices_by_class(labels, class_count);
  constexpr int kMaxRetries = 100;

  PartitionResult res;
  for (int retry = 0; retry <= kMaxRetries; ++retry) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(retry)));
    res.client_indices.assign(spec.client_count, {});
    res.class_proportions = Matrix(spec.client_count, class_count);

    for (int c = 0; c < class_count; ++c) {
      if (per_class[c].empty()) continue;
      const auto p = rng.dirichlet(spec.alpha, spec.client_count);
      for (int k = 0; k < spec.client_count; ++k) res.class_proportions(k, c) = p[k];
      std::vector<double> cum(p.size());
      std::partial_sum(p.begin(), p.end(), cum.begin());
      auto shuffled = per_class[c];
      rng.shuffle(shuffled);
      for (std::size_t idx : shuffled)
        res.client_indices[rng.categorical(cum)].push_back(idx);
    }

    const bool any_empty = std::any_of(res.client_indices.begin(), res.client_indices.end(),
                                       [](const auto& v) { return v.empty(); });
    if (!any_empty) return res;
  }

  // Retries exhausted: move one sample from the largest client to each empty one.
  for (auto& target : res.client_indices) {
    if (!target.empty()) continue;
    auto largest = std::max_element(
        res.client_indices.begin(), res.client_indices.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    if (largest->size() <= 1)
      throw ArgumentError("partition: dirichlet repair failed, not enough samples");
    target.push_back(largest->back());
    largest->pop_back();
  }
  return res;
}

}  // namespace detail

inline PartitionResult partition_indices(const std::vector<int>& labels, int class_count,
                                         const PartitionSpec& spec) {
  spec.validate();
  return spec.mode == PartitionMode::kIid ? detail::partition_iid(labels, class_count, spec)
                                          : detail::partition_dirichlet(labels, class_count, spec);
}

inline std::vector<Dataset> partition(const Dataset& ds, const PartitionSpec& spec) {
  const auto res = partition_indices(ds.labels, ds.class_count, spec);
  std::vector<Dataset> out;
  out.reserve(res.client_indices.size());
  for (const auto& idx : res.client_indices) out.push_back(subset(ds, idx));
  return out;
}

// The experiment split: per-client train sets, the shared test set, and the
// attacker pool halves (never seen by any client's training).
struct SwarmSplit {
  std::vector<Dataset> client_train;
  Dataset shared_test;
  Dataset shadow_train;  // attacker-pool half used to fit attack models
  Dataset shadow_test;   // attacker-pool half held out for evaluation
  std::vector<Dataset> client_test;  // per-client test sets (dirichlet mode only)

  // positions into the source dataset, for disjointness checks
  std::vector<std::vector<std::size_t>> client_train_idx;
  std::vector<std::size_t> shared_test_idx;
  std::vector<std::size_t> shadow_train_idx;
  std::vector<std::size_t> shadow_test_idx;
};

struct SplitFractions {
  double test_fraction = 0.25;    // share of the source set reserved as shared test
  double pool_fraction = 0.25;    // share reserved as the attacker pool
  double shadow_fraction = 0.5;   // pool share that becomes shadow_train
};

// Shared test and the attacker pool are drawn before client partitioning.
// Under dirichlet mode the same per-class draw is applied to the test pool,
// so each client's test set mirrors its training skew.
inline SwarmSplit make_swarm_split(const Dataset& ds, const PartitionSpec& spec,
                                   const SplitFractions& fr = {}) {
  spec.validate();
  if (fr.test_fraction <= 0.0 || fr.pool_fraction <= 0.0 || fr.shadow_fraction <= 0.0 ||
      fr.shadow_fraction >= 1.0 || fr.test_fraction + fr.pool_fraction >= 1.0)
    throw ArgumentError("make_swarm_split: fractions must leave every part nonempty");

  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(spec.seed, SeedDomain::kSplit));
  shuffle_rng.shuffle(order);

  const std::size_t n_test = static_cast<std::size_t>(fr.test_fraction * n);
  const std::size_t n_pool = static_cast<std::size_t>(fr.pool_fraction * n);
  const std::size_t n_shadow_train = static_cast<std::size_t>(fr.shadow_fraction * n_pool);

  SwarmSplit split;
  split.shared_test_idx.assign(order.begin(), order.begin() + n_test);
  split.shadow_train_idx.assign(order.begin() + n_test, order.begin() + n_test + n_shadow_train);
  split.shadow_test_idx.assign(order.begin() + n_test + n_shadow_train,
                               order.begin() + n_test + n_pool);
  std::vector<std::size_t> train_pool(order.begin() + n_test + n_pool, order.end());

  if (split.shared_test_idx.empty() || split.shadow_train_idx.empty() ||
      split.shadow_test_idx.empty() || train_pool.size() < static_cast<std::size_t>(spec.client_count))
    throw ArgumentError("make_swarm_split: a part came out empty");

  // Partition the train pool by position, then map back to source indices.
  std::vector<int> pool_labels(train_pool.size());
  for (std::size_t i = 0; i < train_pool.size(); ++i) pool_labels[i] = ds.labels[train_pool[i]];
  PartitionSpec part_spec = spec;
  part_spec.seed = derive_seed(spec.seed, SeedDomain::kPartition);
  const auto res = partition_indices(pool_labels, ds.class_count, part_spec);

  split.client_train_idx.resize(spec.client_count);
  for (int k = 0; k < spec.client_count; ++k) {
    for (std::size_t pos : res.client_indices[k])
      split.client_train_idx[k].push_back(train_pool[pos]);
    if (split.client_train_idx[k].empty())
      throw ArgumentError("make_swarm_split: client train set came out empty");
    split.client_train.push_back(subset(ds, split.client_train_idx[k]));
  }
  split.shared_test = subset(ds, split.shared_test_idx);
  split.shadow_train = subset(ds, split.shadow_train_idx);
  split.shadow_test = subset(ds, split.shadow_test_idx);

  if (spec.mode == PartitionMode::kDirichlet) {
    Rng test_rng(derive_seed(spec.seed, SeedDomain::kEval));
    std::vector<std::vector<std::size_t>> client_test_idx(spec.client_count);
    for (std::size_t idx : split.shared_test_idx) {
      const int c = ds.labels[idx];
      std::vector<double> cum(spec.client_count);
      double acc = 0.0;
      for (int k = 0; k < spec.client_count; ++k) {
        acc += res.class_proportions(k, c);
        cum[k] = acc;
      }
      if (acc <= 0.0) continue;  // class absent from the train pool
      for (double& v : cum) v /= acc;
      client_test_idx[test_rng.categorical(cum)].push_back(idx);
    }
    for (int k = 0; k < spec.client_count; ++k)
      split.client_test.push_back(subset(ds, client_test_idx[k]));
  }
  return split;
}

// Labeled attack rows from prediction vectors: features are descending-sorted
// probabilities, labels 1 = member / 0 = non-member. With balance, the
// majority class is undersampled (seeded) to the minority size.
inline Dataset build_attack_set(const std::vector<nn::PredictionVector>& member_preds,
                                const std::vector<nn::PredictionVector>& nonmember_preds,
                                bool balance, std::uint64_t seed) {
  if (member_preds.empty() || nonmember_preds.empty())
    throw ArgumentError("build_attack_set: empty input list");

  std::size_t n_mem = member_preds.size();
  std::size_t n_non = nonmember_preds.size();
  std::vector<std::size_t> mem_idx(n_mem), non_idx(n_non);
  std::iota(mem_idx.begin(), mem_idx.end(), 0);
  std::iota(non_idx.begin(), non_idx.end(), 0);

  if (balance) {
    Rng rng(seed);
    if (n_mem > n_non) {
      rng.shuffle(mem_idx);
      mem_idx.resize(n_non);
      std::sort(mem_idx.begin(), mem_idx.end());
    } else if (n_non > n_mem) {
      rng.shuffle(non_idx);
      non_idx.resize(n_mem);
      std::sort(non_idx.begin(), non_idx.end());
    }
  }

  const std::size_t dim = member_preds[0].size();
  Dataset out;
  out.class_count = 2;
  out.features = Matrix(mem_idx.size() + non_idx.size(), dim);
  out.labels.reserve(out.features.rows);
  std::size_t row = 0;
  auto emit = [&](const nn::PredictionVector& p, int label) {
    if (p.size() != dim) throw ShapeError("build_attack_set: prediction length mismatch");
    std::vector<double> sorted(p);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::copy(sorted.begin(), sorted.end(), out.features.row(row));
    out.labels.push_back(label);
    ++row;
  };
  for (std::size_t i : mem_idx) emit(member_preds[i], 1);
  for (std::size_t i : non_idx) emit(nonmember_preds[i], 0);
  return out;
}

}  // namespace swarmaudit
