#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "swarmaudit/partition.hpp"

using namespace swarmaudit;

namespace {

// Disjoint exact cover of 0..n-1.
void expect_exact_cover(const std::vector<std::vector<std::size_t>>& parts, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  ASSERT_EQ(all.size(), n);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(all[i], i);
}

std::vector<nn::PredictionVector> fake_preds(std::size_t count, std::size_t dim,
                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<nn::PredictionVector> preds;
  for (std::size_t i = 0; i < count; ++i) {
    nn::PredictionVector p(dim);
    double sum = 0.0;
    for (auto& v : p) {
      v = rng.uniform() + 1e-3;
      sum += v;
    }
    for (auto& v : p) v /= sum;
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace

TEST(PartitionIid, BalancedTwoClientExample) {
  const auto ds = generate_synthetic(2, 10, 2, 0.2, 5);
  PartitionSpec spec;
  spec.mode = PartitionMode::kIid;
  spec.client_count = 2;
  spec.seed = 3;
  const auto parts = partition(ds, spec);
  ASSERT_EQ(parts.size(), 2u);
  for (const auto& p : parts) {
    EXPECT_EQ(p.size(), 10u);
    EXPECT_EQ(std::count(p.labels.begin(), p.labels.end(), 0), 5);
    EXPECT_EQ(std::count(p.labels.begin(), p.labels.end(), 1), 5);
  }
}

TEST(PartitionIid, WeightedSharesRoughlyProportional) {
  const auto ds = generate_synthetic(2, 100, 2, 0.2, 6);
  PartitionSpec spec;
  spec.client_count = 2;
  spec.seed = 4;
  spec.weights = {0.75, 0.25};
  const auto parts = partition(ds, spec);
  EXPECT_EQ(parts[0].size(), 150u);
  EXPECT_EQ(parts[1].size(), 50u);
}

TEST(PartitionIid, LargestRemainderQuotas) {
  // per class: shares 3.5/2.1/1.4 -> floors 3/2/1, remainder to the 0.5 frac
  const auto ds = generate_synthetic(2, 7, 2, 0.2, 61);
  PartitionSpec spec;
  spec.client_count = 3;
  spec.seed = 62;
  spec.weights = {0.5, 0.3, 0.2};
  const auto parts = partition(ds, spec);
  EXPECT_EQ(parts[0].size(), 8u);
  EXPECT_EQ(parts[1].size(), 4u);
  EXPECT_EQ(parts[2].size(), 2u);
}

TEST(PartitionIid, UniformRemaindersRotateAcrossClasses) {
  const auto ds = generate_synthetic(2, 7, 2, 0.2, 63);
  PartitionSpec spec;
  spec.client_count = 3;
  spec.seed = 64;
  const auto parts = partition(ds, spec);
  std::multiset<std::size_t> sizes = {parts[0].size(), parts[1].size(), parts[2].size()};
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{5, 5, 4}));
}

TEST(PartitionIid, TooFewSamplesPerClassThrows) {
  const auto ds = generate_synthetic(2, 2, 2, 0.2, 7);
  PartitionSpec spec;
  spec.client_count = 3;
  spec.seed = 1;
  EXPECT_THROW(partition(ds, spec), ArgumentError);
}

TEST(Partition, DisjointExactCoverBothModes) {
  const auto ds = generate_synthetic(5, 30, 3, 0.4, 8);
  for (const auto mode : {PartitionMode::kIid, PartitionMode::kDirichlet}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      PartitionSpec spec;
      spec.mode = mode;
      spec.alpha = 0.5;
      spec.client_count = 4;
      spec.seed = seed;
      const auto res = partition_indices(ds.labels, ds.class_count, spec);
      expect_exact_cover(res.client_indices, ds.size());
    }
  }
}

TEST(PartitionDirichlet, HugeAlphaApproachesUniform) {
  const auto ds = generate_synthetic(4, 200, 3, 0.4, 9);
  PartitionSpec spec;
  spec.mode = PartitionMode::kDirichlet;
  spec.alpha = 1e6;
  spec.client_count = 4;
  spec.seed = 31;
  const auto parts = partition(ds, spec);
  for (const auto& p : parts) {
    for (int c = 0; c < 4; ++c) {
      const double share =
          static_cast<double>(std::count(p.labels.begin(), p.labels.end(), c)) / p.size();
      EXPECT_NEAR(share, 0.25, 0.05);
    }
  }
}

// Small concentration on many classes: every client sees only a strict
// subset of labels and the sizes spread out.
TEST(PartitionDirichlet, SkewedRegimeShape) {
  const auto ds = generate_synthetic(100, 20, 3, 0.3, 10);
  PartitionSpec spec;
  spec.mode = PartitionMode::kDirichlet;
  spec.alpha = 0.5;
  spec.client_count = 4;
  spec.seed = 17;
  const auto parts = partition(ds, spec);
  std::set<std::size_t> sizes;
  for (const auto& p : parts) {
    std::set<int> labels(p.labels.begin(), p.labels.end());
    EXPECT_LT(labels.size(), 100u);
    EXPECT_FALSE(p.empty());
    sizes.insert(p.size());
  }
  EXPECT_GT(sizes.size(), 1u);  // unequal client sizes
}

TEST(PartitionDirichlet, NoEmptyClientsAfterRepair) {
  const auto ds = generate_synthetic(2, 6, 2, 0.2, 11);
  PartitionSpec spec;
  spec.mode = PartitionMode::kDirichlet;
  spec.alpha = 0.05;
  spec.client_count = 5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto res = partition_indices(ds.labels, ds.class_count, spec);
    for (const auto& client : res.client_indices) EXPECT_FALSE(client.empty());
    expect_exact_cover(res.client_indices, ds.size());
  }
}

TEST(Partition, DeterministicBySeed) {
  const auto ds = generate_synthetic(3, 50, 3, 0.4, 12);
  PartitionSpec spec;
  spec.mode = PartitionMode::kDirichlet;
  spec.alpha = 0.3;
  spec.client_count = 3;
  spec.seed = 77;
  const auto a = partition_indices(ds.labels, ds.class_count, spec);
  const auto b = partition_indices(ds.labels, ds.class_count, spec);
  EXPECT_EQ(a.client_indices, b.client_indices);
}

TEST(SwarmSplit, PartsNonemptyDisjointCover) {
  const auto ds = generate_synthetic(2, 50, 2, 0.3, 13);
  PartitionSpec spec;
  spec.client_count = 2;
  spec.seed = 21;
  SplitFractions fr;
  fr.test_fraction = 0.2;
  fr.pool_fraction = 0.2;
  fr.shadow_fraction = 0.5;
  const auto split = make_swarm_split(ds, spec, fr);

  EXPECT_FALSE(split.shared_test.empty());
  EXPECT_FALSE(split.shadow_train.empty());
  EXPECT_FALSE(split.shadow_test.empty());
  for (const auto& c : split.client_train) EXPECT_FALSE(c.empty());

  std::vector<std::vector<std::size_t>> parts = {split.shared_test_idx, split.shadow_train_idx,
                                                 split.shadow_test_idx};
  for (const auto& c : split.client_train_idx) parts.push_back(c);
  std::vector<std::size_t> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  ASSERT_EQ(all.size(), ds.size());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(SwarmSplit, SameSeedIdentical) {
  const auto ds = generate_synthetic(3, 40, 3, 0.3, 14);
  PartitionSpec spec;
  spec.client_count = 3;
  spec.seed = 5;
  const auto a = make_swarm_split(ds, spec);
  const auto b = make_swarm_split(ds, spec);
  EXPECT_EQ(a.shared_test_idx, b.shared_test_idx);
  EXPECT_EQ(a.shadow_train_idx, b.shadow_train_idx);
  EXPECT_EQ(a.shadow_test_idx, b.shadow_test_idx);
  EXPECT_EQ(a.client_train_idx, b.client_train_idx);
}

TEST(SwarmSplit, DirichletAddsPerClientTestSets) {
  const auto ds = generate_synthetic(4, 100, 3, 0.3, 15);
  PartitionSpec spec;
  spec.mode = PartitionMode::kDirichlet;
  spec.alpha = 0.4;
  spec.client_count = 4;
  spec.seed = 6;
  const auto split = make_swarm_split(ds, spec);
  ASSERT_EQ(split.client_test.size(), 4u);
  std::size_t assigned = 0;
  for (const auto& t : split.client_test) assigned += t.size();
  EXPECT_EQ(assigned, split.shared_test.size());
}

TEST(SwarmSplit, BadFractionsThrow) {
  const auto ds = generate_synthetic(2, 20, 2, 0.3, 16);
  PartitionSpec spec;
  spec.client_count = 2;
  SplitFractions fr;
  fr.test_fraction = 0.7;
  fr.pool_fraction = 0.4;
  EXPECT_THROW(make_swarm_split(ds, spec, fr), ArgumentError);
}

TEST(BuildAttackSet, BalancedCounts) {
  const auto members = fake_preds(10, 4, 1);
  const auto nonmembers = fake_preds(10, 4, 2);
  const auto ds = build_attack_set(members, nonmembers, true, 3);
  EXPECT_EQ(ds.size(), 20u);
  EXPECT_EQ(std::count(ds.labels.begin(), ds.labels.end(), 1), 10);
  EXPECT_EQ(std::count(ds.labels.begin(), ds.labels.end(), 0), 10);
}

TEST(BuildAttackSet, UndersamplesMajority) {
  const auto members = fake_preds(100, 4, 4);
  const auto nonmembers = fake_preds(10, 4, 5);
  const auto balanced = build_attack_set(members, nonmembers, true, 6);
  EXPECT_EQ(balanced.size(), 20u);
  EXPECT_EQ(std::count(balanced.labels.begin(), balanced.labels.end(), 1), 10);

  const auto unbalanced = build_attack_set(members, nonmembers, false, 6);
  EXPECT_EQ(unbalanced.size(), 110u);
  EXPECT_EQ(std::count(unbalanced.labels.begin(), unbalanced.labels.end(), 1), 100);
}

TEST(BuildAttackSet, RowsAreSortedDistributions) {
  const auto members = fake_preds(5, 6, 7);
  const auto nonmembers = fake_preds(5, 6, 8);
  const auto ds = build_attack_set(members, nonmembers, false, 9);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      if (j > 0) EXPECT_LE(ds.features(i, j), ds.features(i, j - 1));
      sum += ds.features(i, j);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(BuildAttackSet, EmptyInputThrows) {
  const auto preds = fake_preds(3, 4, 10);
  EXPECT_THROW(build_attack_set({}, preds, true, 0), ArgumentError);
  EXPECT_THROW(build_attack_set(preds, {}, true, 0), ArgumentError);
}
