#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swarmaudit/attacks.hpp"
#include "swarmaudit/dataset.hpp"
#include "swarmaudit/defenses.hpp"
#include "swarmaudit/errors.hpp"
#include "swarmaudit/nn.hpp"
#include "swarmaudit/partition.hpp"
#include "swarmaudit/report.hpp"
#include "swarmaudit/rng.hpp"
#include "swarmaudit/swarm.hpp"

namespace swarmaudit::harness {

using nlohmann::json;

enum class AttackKind {
  kShadowOneToOne,
  kShadowMultiToOne,
  kShadowOneToMulti,
  kMetricConfidence,
  kMetricEntropy,
  kDifferentialV1,
  kDifferentialV2,
};

inline const std::map<std::string, AttackKind>& attack_kind_names() {
  static const std::map<std::string, AttackKind> names = {
      {"shadow_one_to_one", AttackKind::kShadowOneToOne},
      {"shadow_multi_to_one", AttackKind::kShadowMultiToOne},
      {"shadow_one_to_multi", AttackKind::kShadowOneToMulti},
      {"metric_confidence", AttackKind::kMetricConfidence},
      {"metric_entropy", AttackKind::kMetricEntropy},
      {"differential_v1", AttackKind::kDifferentialV1},
      {"differential_v2", AttackKind::kDifferentialV2},
  };
  return names;
}

inline std::string attack_kind_name(AttackKind kind) {
  for (const auto& [name, k] : attack_kind_names())
    if (k == kind) return name;
  return "?";
}

struct DataSourceSpec {
  enum class Kind { kSynthetic, kIdx, kCsv } kind = Kind::kSynthetic;
  // synthetic
  int class_count = 10;
  int per_class = 120;
  int dim = 20;
  double spread = 0.5;
  // idx
  std::string images_path, labels_path;
  // csv
  std::string csv_path, label_column;
};

struct AttackSettings {
  AttackKind kind = AttackKind::kShadowOneToOne;
  int attacker_id = 0;          // 0 = default (client N)
  std::vector<int> victim_ids;  // empty = default per topology
  bool balance_attack_set = true;
  std::vector<int> model_hidden = {64, 32};
  int epochs = 100;
  double learning_rate = 0.01;
  int batch_size = 32;
  double ref_fraction = 0.5;  // client-train share used as attack references
  attacks::MMDConfig mmd;
};

struct SwarmSettings {
  int rounds = 20;
  int local_epochs = 1;
  swarm::Election election = swarm::Election::kRoundRobin;
  double learning_rate = 0.05;
  double l2_lambda = 0.0;
  int batch_size = 32;
  std::vector<double> weights;  // empty = uniform
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  DataSourceSpec dataset;
  SplitFractions split;
  PartitionSpec partition;
  std::vector<int> model_hidden = {64};
  SwarmSettings swarm;
  AttackSettings attack;
  defense::DefenseSpec defense;

  int client_count() const { return partition.client_count; }
  int resolved_attacker() const {
    return attack.attacker_id == 0 ? partition.client_count : attack.attacker_id;
  }
  std::vector<int> resolved_victims() const {
    if (!attack.victim_ids.empty()) return attack.victim_ids;
    switch (attack.kind) {
      case AttackKind::kShadowOneToMulti: {
        std::vector<int> v;
        for (int id = 1; id <= partition.client_count; ++id)
          if (id != resolved_attacker()) v.push_back(id);
        return v;
      }
      case AttackKind::kDifferentialV1:
      case AttackKind::kDifferentialV2: {
        std::vector<int> v(partition.client_count);
        std::iota(v.begin(), v.end(), 1);
        return v;
      }
      default:
        return {1};
    }
  }
};

// ---------------------------------------------------------------------------
// Strict JSON parsing: unknown keys are errors, messages carry field paths.
// ---------------------------------------------------------------------------

namespace cfgdetail {

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void check_keys(const json& j, const std::string& path,
                       const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw ConfigError(path + "." + key, "unknown key");
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const std::string& key, T def) {
  if (!j.contains(key)) return def;
  return get_as<T>(j.at(key), path + "." + key);
}

template <typename T>
T get_req(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "required key missing");
  return get_as<T>(j.at(key), path + "." + key);
}

}  // namespace cfgdetail

inline DataSourceSpec parse_dataset(const json& j, const std::string& path) {
  using namespace cfgdetail;
  expect_object(j, path);
  DataSourceSpec spec;
  const std::string type = get_or<std::string>(j, path, "type", "synthetic");
  if (type == "synthetic") {
    check_keys(j, path, {"type", "class_count", "per_class", "dim", "spread"});
    spec.kind = DataSourceSpec::Kind::kSynthetic;
    spec.class_count = get_or(j, path, "class_count", spec.class_count);
    spec.per_class = get_or(j, path, "per_class", spec.per_class);
    spec.dim = get_or(j, path, "dim", spec.dim);
    spec.spread = get_or(j, path, "spread", spec.spread);
    if (spec.class_count < 2) throw ConfigError(path + ".class_count", "must be >= 2");
    if (spec.per_class < 1) throw ConfigError(path + ".per_class", "must be >= 1");
    if (spec.dim < 2) throw ConfigError(path + ".dim", "must be >= 2");
    if (spec.spread < 0) throw ConfigError(path + ".spread", "must be >= 0");
  } else if (type == "idx") {
    check_keys(j, path, {"type", "images", "labels"});
    spec.kind = DataSourceSpec::Kind::kIdx;
    spec.images_path = get_req<std::string>(j, path, "images");
    spec.labels_path = get_req<std::string>(j, path, "labels");
  } else if (type == "csv") {
    check_keys(j, path, {"type", "path", "label_column"});
    spec.kind = DataSourceSpec::Kind::kCsv;
    spec.csv_path = get_req<std::string>(j, path, "path");
    spec.label_column = get_req<std::string>(j, path, "label_column");
  } else {
    throw ConfigError(path + ".type", "must be synthetic, idx or csv");
  }
  return spec;
}

inline ScenarioConfig parse_scenario(const json& j) {
  using namespace cfgdetail;
  expect_object(j, "config");
  check_keys(j, "config",
             {"seed", "dataset", "split", "partition", "model", "swarm", "attack", "defense"});

  ScenarioConfig cfg;
  cfg.seed = get_req<std::uint64_t>(j, "config", "seed");
  if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"), "dataset");

  if (j.contains("split")) {
    const json& s = j.at("split");
    expect_object(s, "split");
    check_keys(s, "split", {"test_fraction", "pool_fraction", "shadow_fraction"});
    cfg.split.test_fraction = get_or(s, "split", "test_fraction", cfg.split.test_fraction);
    cfg.split.pool_fraction = get_or(s, "split", "pool_fraction", cfg.split.pool_fraction);
    cfg.split.shadow_fraction = get_or(s, "split", "shadow_fraction", cfg.split.shadow_fraction);
    if (cfg.split.test_fraction <= 0 || cfg.split.pool_fraction <= 0 ||
        cfg.split.test_fraction + cfg.split.pool_fraction >= 1.0)
      throw ConfigError("split", "test_fraction + pool_fraction must be in (0,1)");
    if (cfg.split.shadow_fraction <= 0 || cfg.split.shadow_fraction >= 1)
      throw ConfigError("split.shadow_fraction", "must be in (0,1)");
  }

  {
    if (!j.contains("partition")) throw ConfigError("partition", "required key missing");
    const json& p = j.at("partition");
    expect_object(p, "partition");
    check_keys(p, "partition", {"mode", "alpha", "client_count", "weights"});
    const std::string mode = get_or<std::string>(p, "partition", "mode", "iid");
    if (mode == "iid")
      cfg.partition.mode = PartitionMode::kIid;
    else if (mode == "dirichlet")
      cfg.partition.mode = PartitionMode::kDirichlet;
    else
      throw ConfigError("partition.mode", "must be iid or dirichlet");
    cfg.partition.alpha = get_or(p, "partition", "alpha", cfg.partition.alpha);
    cfg.partition.client_count = get_req<int>(p, "partition", "client_count");
    cfg.partition.weights = get_or(p, "partition", "weights", std::vector<double>{});
    cfg.partition.seed = cfg.seed;  // all randomness flows from the scenario seed
    try {
      cfg.partition.validate();
    } catch (const std::exception& e) {
      throw ConfigError("partition", e.what());
    }
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    expect_object(m, "model");
    check_keys(m, "model", {"hidden"});
    cfg.model_hidden = get_or(m, "model", "hidden", cfg.model_hidden);
    for (int h : cfg.model_hidden)
      if (h < 1) throw ConfigError("model.hidden", "layer sizes must be >= 1");
  }

  if (j.contains("swarm")) {
    const json& s = j.at("swarm");
    expect_object(s, "swarm");
    check_keys(s, "swarm",
               {"rounds", "local_epochs", "election", "learning_rate", "l2_lambda", "batch_size",
                "weights"});
    cfg.swarm.rounds = get_or(s, "swarm", "rounds", cfg.swarm.rounds);
    cfg.swarm.local_epochs = get_or(s, "swarm", "local_epochs", cfg.swarm.local_epochs);
    const std::string el = get_or<std::string>(s, "swarm", "election", "round_robin");
    if (el == "round_robin")
      cfg.swarm.election = swarm::Election::kRoundRobin;
    else if (el == "seeded_random")
      cfg.swarm.election = swarm::Election::kSeededRandom;
    else
      throw ConfigError("swarm.election", "must be round_robin or seeded_random");
    cfg.swarm.learning_rate = get_or(s, "swarm", "learning_rate", cfg.swarm.learning_rate);
    cfg.swarm.l2_lambda = get_or(s, "swarm", "l2_lambda", cfg.swarm.l2_lambda);
    cfg.swarm.batch_size = get_or(s, "swarm", "batch_size", cfg.swarm.batch_size);
    cfg.swarm.weights = get_or(s, "swarm", "weights", std::vector<double>{});
    if (cfg.swarm.rounds < 1) throw ConfigError("swarm.rounds", "must be >= 1");
    if (cfg.swarm.local_epochs < 0) throw ConfigError("swarm.local_epochs", "must be >= 0");
    if (cfg.swarm.learning_rate <= 0) throw ConfigError("swarm.learning_rate", "must be > 0");
    if (cfg.swarm.l2_lambda < 0) throw ConfigError("swarm.l2_lambda", "must be >= 0");
    if (cfg.swarm.batch_size < 1) throw ConfigError("swarm.batch_size", "must be >= 1");
    if (!cfg.swarm.weights.empty()) {
      if (static_cast<int>(cfg.swarm.weights.size()) != cfg.partition.client_count)
        throw ConfigError("swarm.weights", "size must equal partition.client_count");
      double sum = 0.0;
      for (double w : cfg.swarm.weights) {
        if (w < 0) throw ConfigError("swarm.weights", "entries must be >= 0");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("swarm.weights", "must sum to 1");
    }
  }

  if (j.contains("attack")) {
    const json& a = j.at("attack");
    expect_object(a, "attack");
    check_keys(a, "attack",
               {"kind", "attacker_id", "victim_ids", "balance_attack_set", "model_hidden",
                "epochs", "learning_rate", "batch_size", "ref_fraction", "mmd"});
    const std::string kind = get_or<std::string>(a, "attack", "kind", "shadow_one_to_one");
    const auto it = attack_kind_names().find(kind);
    if (it == attack_kind_names().end()) throw ConfigError("attack.kind", "unknown attack kind");
    cfg.attack.kind = it->second;
    cfg.attack.attacker_id = get_or(a, "attack", "attacker_id", 0);
    cfg.attack.victim_ids = get_or(a, "attack", "victim_ids", std::vector<int>{});
    cfg.attack.balance_attack_set =
        get_or(a, "attack", "balance_attack_set", cfg.attack.balance_attack_set);
    cfg.attack.model_hidden = get_or(a, "attack", "model_hidden", cfg.attack.model_hidden);
    cfg.attack.epochs = get_or(a, "attack", "epochs", cfg.attack.epochs);
    cfg.attack.learning_rate = get_or(a, "attack", "learning_rate", cfg.attack.learning_rate);
    cfg.attack.batch_size = get_or(a, "attack", "batch_size", cfg.attack.batch_size);
    cfg.attack.ref_fraction = get_or(a, "attack", "ref_fraction", cfg.attack.ref_fraction);
    if (cfg.attack.epochs < 1) throw ConfigError("attack.epochs", "must be >= 1");
    if (cfg.attack.learning_rate <= 0) throw ConfigError("attack.learning_rate", "must be > 0");
    if (cfg.attack.batch_size < 1) throw ConfigError("attack.batch_size", "must be >= 1");
    if (cfg.attack.ref_fraction <= 0 || cfg.attack.ref_fraction >= 1)
      throw ConfigError("attack.ref_fraction", "must be in (0,1)");
    if (a.contains("mmd")) {
      const json& mm = a.at("mmd");
      expect_object(mm, "attack.mmd");
      check_keys(mm, "attack.mmd", {"sigma", "kernel_exponent"});
      if (mm.contains("sigma")) {
        if (mm.at("sigma").is_string()) {
          if (mm.at("sigma").get<std::string>() != "median")
            throw ConfigError("attack.mmd.sigma", "must be a positive number or \"median\"");
          cfg.attack.mmd.median_heuristic = true;
        } else {
          cfg.attack.mmd.median_heuristic = false;
          cfg.attack.mmd.sigma = get_as<double>(mm.at("sigma"), "attack.mmd.sigma");
          if (cfg.attack.mmd.sigma <= 0) throw ConfigError("attack.mmd.sigma", "must be > 0");
        }
      }
      cfg.attack.mmd.kernel_exponent =
          get_or(mm, "attack.mmd", "kernel_exponent", cfg.attack.mmd.kernel_exponent);
      if (cfg.attack.mmd.kernel_exponent != 1 && cfg.attack.mmd.kernel_exponent != 2)
        throw ConfigError("attack.mmd.kernel_exponent", "must be 1 or 2");
    }
  }

  if (j.contains("defense")) {
    const json& d = j.at("defense");
    expect_object(d, "defense");
    check_keys(d, "defense", {"dropout_rates", "l2_lambda"});
    cfg.defense.dropout_rates = get_or(d, "defense", "dropout_rates", std::vector<double>{});
    cfg.defense.l2_lambda = get_or(d, "defense", "l2_lambda", 0.0);
    try {
      cfg.defense.validate();
    } catch (const std::exception& e) {
      throw ConfigError("defense", e.what());
    }
    if (cfg.defense.dropout_rates.size() > cfg.model_hidden.size())
      throw ConfigError("defense.dropout_rates", "more rates than hidden layers");
  }

  // id sanity
  const int n = cfg.partition.client_count;
  const int attacker = cfg.resolved_attacker();
  if (attacker < 1 || attacker > n) throw ConfigError("attack.attacker_id", "must be in [1, N]");
  const auto victims = cfg.resolved_victims();
  for (int v : victims) {
    if (v < 1 || v > n) throw ConfigError("attack.victim_ids", "ids must be in [1, N]");
    const bool differential = cfg.attack.kind == AttackKind::kDifferentialV1 ||
                              cfg.attack.kind == AttackKind::kDifferentialV2;
    if (v == attacker && !differential)
      throw ConfigError("attack.victim_ids", "attacker_id must not be a victim");
  }
  if (victims.empty()) throw ConfigError("attack.victim_ids", "no victims resolved");
  return cfg;
}

inline ScenarioConfig parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

// Normalized echo with every default materialized.
inline json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  json ds;
  switch (cfg.dataset.kind) {
    case DataSourceSpec::Kind::kSynthetic:
      ds = {{"type", "synthetic"},
            {"class_count", cfg.dataset.class_count},
            {"per_class", cfg.dataset.per_class},
            {"dim", cfg.dataset.dim},
            {"spread", cfg.dataset.spread}};
      break;
    case DataSourceSpec::Kind::kIdx:
      ds = {{"type", "idx"}, {"images", cfg.dataset.images_path},
            {"labels", cfg.dataset.labels_path}};
      break;
    case DataSourceSpec::Kind::kCsv:
      ds = {{"type", "csv"}, {"path", cfg.dataset.csv_path},
            {"label_column", cfg.dataset.label_column}};
      break;
  }
  j["dataset"] = ds;
  j["split"] = {{"test_fraction", cfg.split.test_fraction},
                {"pool_fraction", cfg.split.pool_fraction},
                {"shadow_fraction", cfg.split.shadow_fraction}};
  j["partition"] = {
      {"mode", cfg.partition.mode == PartitionMode::kIid ? "iid" : "dirichlet"},
      {"alpha", cfg.partition.alpha},
      {"client_count", cfg.partition.client_count},
      {"weights", cfg.partition.weights}};
  j["model"] = {{"hidden", cfg.model_hidden}};
  j["swarm"] = {
      {"rounds", cfg.swarm.rounds},
      {"local_epochs", cfg.swarm.local_epochs},
      {"election",
       cfg.swarm.election == swarm::Election::kRoundRobin ? "round_robin" : "seeded_random"},
      {"learning_rate", cfg.swarm.learning_rate},
      {"l2_lambda", cfg.swarm.l2_lambda},
      {"batch_size", cfg.swarm.batch_size},
      {"weights", cfg.swarm.weights}};
  j["attack"] = {{"kind", attack_kind_name(cfg.attack.kind)},
                 {"attacker_id", cfg.resolved_attacker()},
                 {"victim_ids", cfg.resolved_victims()},
                 {"balance_attack_set", cfg.attack.balance_attack_set},
                 {"model_hidden", cfg.attack.model_hidden},
                 {"epochs", cfg.attack.epochs},
                 {"learning_rate", cfg.attack.learning_rate},
                 {"batch_size", cfg.attack.batch_size},
                 {"ref_fraction", cfg.attack.ref_fraction},
                 {"mmd",
                  {{"sigma", cfg.attack.mmd.median_heuristic ? json("median")
                                                             : json(cfg.attack.mmd.sigma)},
                   {"kernel_exponent", cfg.attack.mmd.kernel_exponent}}}};
  j["defense"] = {{"dropout_rates", cfg.defense.dropout_rates},
                  {"l2_lambda", cfg.defense.l2_lambda}};
  return j;
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

struct RunArtifacts {
  ExperimentReport report;
  std::vector<swarm::RoundLog> logs;
  std::vector<attacks::AttackVerdict> verdicts;
  std::vector<int> truth;
  std::vector<attacks::DiffTraceRow> trace;  // differential attacks only
};

namespace rundetail {

inline Dataset build_dataset(const ScenarioConfig& cfg) {
  switch (cfg.dataset.kind) {
    case DataSourceSpec::Kind::kSynthetic:
      return generate_synthetic(cfg.dataset.class_count, cfg.dataset.per_class, cfg.dataset.dim,
                                cfg.dataset.spread, derive_seed(cfg.seed, SeedDomain::kData));
    case DataSourceSpec::Kind::kIdx:
      return load_idx(cfg.dataset.images_path, cfg.dataset.labels_path);
    case DataSourceSpec::Kind::kCsv:
      return load_csv(cfg.dataset.csv_path, cfg.dataset.label_column);
  }
  throw ArgumentError("unreachable dataset kind");
}

// Seeded undersample of `ds` rows to `count`, preserving row order.
inline std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  if (count < total) {
    rng.shuffle(idx);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

// Two-pool eval set undersampled to equal class counts: members labeled
// `member_label`, nonmembers labeled 0.
struct EvalTargets {
  Dataset data;
  std::vector<int> truth;
};

inline EvalTargets balanced_pair_targets(const Dataset& members, const Dataset& nonmembers,
                                         int member_label, std::uint64_t seed) {
  if (members.empty() || nonmembers.empty())
    throw ArgumentError("eval targets: empty member or nonmember pool");
  Rng rng(seed);
  const std::size_t count = std::min(members.size(), nonmembers.size());
  const auto mem_idx = sample_indices(members.size(), count, rng);
  const auto non_idx = sample_indices(nonmembers.size(), count, rng);

  EvalTargets out;
  out.data.class_count = members.class_count;
  out.data.features = Matrix(2 * count, members.dim());
  std::size_t row = 0;
  for (std::size_t i : mem_idx) {
    std::copy(members.features.row(i), members.features.row(i) + members.dim(),
              out.data.features.row(row));
    out.data.labels.push_back(members.labels[i]);
    out.truth.push_back(member_label);
    ++row;
  }
  for (std::size_t i : non_idx) {
    std::copy(nonmembers.features.row(i), nonmembers.features.row(i) + nonmembers.dim(),
              out.data.features.row(row));
    out.data.labels.push_back(nonmembers.labels[i]);
    out.truth.push_back(0);
    ++row;
  }
  return out;
}

// Disjoint (reference, holdout) row split of one client's train set.
inline std::pair<Dataset, Dataset> split_refs(const Dataset& ds, double ref_fraction,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  std::size_t n_ref = static_cast<std::size_t>(ref_fraction * ds.size());
  n_ref = std::min(std::max<std::size_t>(n_ref, 1), ds.size() - 1);
  std::vector<std::size_t> ref(idx.begin(), idx.begin() + n_ref);
  std::vector<std::size_t> held(idx.begin() + n_ref, idx.end());
  std::sort(ref.begin(), ref.end());
  std::sort(held.begin(), held.end());
  return {subset(ds, ref), subset(ds, held)};
}

inline attacks::ShadowAttackConfig shadow_cfg(const ScenarioConfig& cfg, std::uint64_t seed) {
  attacks::ShadowAttackConfig sc;
  sc.hidden = cfg.attack.model_hidden;
  sc.train.learning_rate = cfg.attack.learning_rate;
  sc.train.epochs = cfg.attack.epochs;
  sc.train.batch_size = cfg.attack.batch_size;
  sc.balance = cfg.attack.balance_attack_set;
  sc.seed = seed;
  return sc;
}

}  // namespace rundetail

inline RunArtifacts run_scenario(const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunArtifacts out;

  const Dataset dataset = rundetail::build_dataset(cfg);
  PartitionSpec part = cfg.partition;
  part.seed = cfg.seed;
  const SwarmSplit split = make_swarm_split(dataset, part, cfg.split);

  // Model architecture with the defense applied.
  nn::TrainConfig base_train;
  base_train.learning_rate = cfg.swarm.learning_rate;
  base_train.l2_lambda = cfg.swarm.l2_lambda;
  base_train.batch_size = cfg.swarm.batch_size;
  base_train.seed = cfg.seed;  // protocol stream master; per-client seeds below
  auto base_layers = nn::dense_stack(static_cast<int>(dataset.dim()), cfg.model_hidden,
                                     dataset.class_count);
  const auto [layers, train_cfg] = defense::apply_defense(base_layers, base_train, cfg.defense);

  const int n = cfg.partition.client_count;
  std::vector<swarm::ClientState> clients;
  clients.reserve(n);
  for (int id = 1; id <= n; ++id) {
    const std::uint64_t base = client_seed(cfg.seed, id);
    swarm::ClientState c;
    c.id = id;
    c.train_data = split.client_train[id - 1];
    Rng init_rng(derive_seed(base, 1));
    c.model = nn::make_mlp(layers, init_rng);
    c.weight = cfg.swarm.weights.empty() ? 1.0 / n : cfg.swarm.weights[id - 1];
    c.seed = derive_seed(base, 2);
    clients.push_back(std::move(c));
  }

  swarm::SwarmConfig scfg;
  scfg.rounds = cfg.swarm.rounds;
  scfg.local_epochs = cfg.swarm.local_epochs;
  scfg.election = cfg.swarm.election;
  scfg.train_cfg = train_cfg;
  auto sres = swarm::run_swarm(clients, scfg, split.shared_test);
  out.logs = std::move(sres.logs);
  const nn::Mlp& global = sres.global_model;

  const std::uint64_t attack_seed = derive_seed(cfg.seed, SeedDomain::kAttack);
  const std::uint64_t eval_seed = derive_seed(cfg.seed, SeedDomain::kEval);
  const int attacker = cfg.resolved_attacker();
  const auto victims = cfg.resolved_victims();
  json detail;

  switch (cfg.attack.kind) {
    case AttackKind::kShadowOneToOne: {
      const int victim = victims.front();
      const auto attack_model = attacks::shadow_attack_train(
          clients[attacker - 1].train_data, global, split.shadow_train,
          rundetail::shadow_cfg(cfg, attack_seed));
      const auto targets = rundetail::balanced_pair_targets(
          clients[victim - 1].train_data, split.shared_test, 1, eval_seed);
      out.verdicts = attacks::shadow_attack_infer(attack_model, global, targets.data);
      out.truth = targets.truth;
      detail["attacker_id"] = attacker;
      detail["victim_id"] = victim;
      break;
    }
    case AttackKind::kShadowMultiToOne: {
      const int victim = victims.front();
      json per_attacker = json::array();
      std::size_t offset = 0;
      for (int atk = 1; atk <= n; ++atk) {
        if (atk == victim) continue;
        const auto attack_model = attacks::shadow_attack_train(
            clients[atk - 1].train_data, global, split.shadow_train,
            rundetail::shadow_cfg(cfg, derive_seed(attack_seed, atk)));
        const auto targets = rundetail::balanced_pair_targets(
            clients[victim - 1].train_data, split.shared_test, 1,
            derive_seed(eval_seed, atk));
        auto verdicts = attacks::shadow_attack_infer(attack_model, global, targets.data);
        const auto metrics = attacks::evaluate_attack(verdicts, targets.truth);
        per_attacker.push_back({{"attacker_id", atk},
                                {"accuracy", metrics.accuracy},
                                {"macro_f1", metrics.macro_f1}});
        for (auto& v : verdicts) {
          v.target_index += offset;
          out.verdicts.push_back(v);
        }
        out.truth.insert(out.truth.end(), targets.truth.begin(), targets.truth.end());
        offset += targets.truth.size();
      }
      detail["victim_id"] = victim;
      detail["per_attacker"] = per_attacker;
      break;
    }
    case AttackKind::kShadowOneToMulti: {
      std::vector<attacks::OwnerRef> refs;
      Dataset targets;
      std::vector<int> truth;
      targets.class_count = dataset.class_count;
      std::vector<std::pair<Dataset, int>> pools;  // (holdout, owner label)
      for (int v : victims) {
        auto [ref, held] =
            rundetail::split_refs(clients[v - 1].train_data, cfg.attack.ref_fraction,
                                  derive_seed(eval_seed, static_cast<std::uint64_t>(v)));
        refs.push_back({v, std::move(ref)});
        pools.emplace_back(std::move(held), v);
      }
      pools.emplace_back(split.shadow_test, 0);
      std::size_t per_class = SIZE_MAX;
      for (const auto& [pool, _] : pools) per_class = std::min(per_class, pool.size());
      Rng eval_rng(derive_seed(eval_seed, 777));
      targets.features = Matrix(per_class * pools.size(), dataset.dim());
      std::size_t row = 0;
      for (const auto& [pool, label] : pools) {
        const auto idx = rundetail::sample_indices(pool.size(), per_class, eval_rng);
        for (std::size_t i : idx) {
          std::copy(pool.features.row(i), pool.features.row(i) + pool.dim(),
                    targets.features.row(row));
          targets.labels.push_back(pool.labels[i]);
          truth.push_back(label);
          ++row;
        }
      }
      out.verdicts = attacks::one_to_multi_attack(global, refs, split.shadow_train, targets,
                                                  rundetail::shadow_cfg(cfg, attack_seed));
      out.truth = std::move(truth);
      detail["attacker_id"] = attacker;
      detail["victim_ids"] = victims;
      break;
    }
    case AttackKind::kMetricConfidence:
    case AttackKind::kMetricEntropy: {
      const auto kind = cfg.attack.kind == AttackKind::kMetricConfidence
                            ? attacks::MetricKind::kConfidence
                            : attacks::MetricKind::kEntropy;
      const auto member_preds = nn::predict_dataset(global, clients[attacker - 1].train_data);
      const auto nonmember_preds = nn::predict_dataset(global, split.shadow_train);
      std::vector<double> member_cal, nonmember_cal;
      for (const auto& p : member_preds) member_cal.push_back(attacks::metric_value(kind, p));
      for (const auto& p : nonmember_preds)
        nonmember_cal.push_back(attacks::metric_value(kind, p));

      const int victim = victims.front();
      const auto targets = rundetail::balanced_pair_targets(
          clients[victim - 1].train_data, split.shared_test, 1, eval_seed);
      std::vector<nn::PredictionVector> target_preds;
      target_preds.reserve(targets.data.size());
      for (std::size_t i = 0; i < targets.data.size(); ++i)
        target_preds.push_back(nn::forward(
            global, std::span<const double>(targets.data.features.row(i), targets.data.dim())));
      out.verdicts = attacks::metric_attack(kind, member_cal, nonmember_cal, target_preds);
      out.truth = targets.truth;
      const auto fit = attacks::fit_threshold(kind, member_cal, nonmember_cal);
      detail["attacker_id"] = attacker;
      detail["victim_id"] = victim;
      detail["threshold"] = fit.tau;
      detail["calibration_balanced_acc"] = fit.balanced_acc;
      break;
    }
    case AttackKind::kDifferentialV1:
    case AttackKind::kDifferentialV2: {
      std::vector<std::vector<nn::PredictionVector>> member_refs(n);
      std::vector<Dataset> holdouts(n);
      for (int id = 1; id <= n; ++id) {
        auto [ref, held] =
            rundetail::split_refs(clients[id - 1].train_data, cfg.attack.ref_fraction,
                                  derive_seed(eval_seed, static_cast<std::uint64_t>(id)));
        member_refs[id - 1] = nn::predict_dataset(global, ref);
        holdouts[id - 1] = std::move(held);
      }
      const auto nonmember_ref = nn::predict_dataset(global, split.shadow_train);

      // Attribution task: held-out member samples of every client, equal counts.
      std::size_t per_client = SIZE_MAX;
      for (const auto& h : holdouts) per_client = std::min(per_client, h.size());
      Rng eval_rng(derive_seed(eval_seed, 888));
      std::vector<nn::PredictionVector> target_preds;
      for (int id = 1; id <= n; ++id) {
        const auto idx = rundetail::sample_indices(holdouts[id - 1].size(), per_client, eval_rng);
        for (std::size_t i : idx) {
          target_preds.push_back(nn::forward(
              global, std::span<const double>(holdouts[id - 1].features.row(i),
                                              holdouts[id - 1].dim())));
          out.truth.push_back(id);
        }
      }
      if (cfg.attack.kind == AttackKind::kDifferentialV1)
        out.verdicts = attacks::differential_attack_v1(target_preds, member_refs, nonmember_ref,
                                                       cfg.attack.mmd, &out.trace);
      else
        out.verdicts = attacks::differential_attack_v2(target_preds, member_refs, nonmember_ref,
                                                       cfg.attack.mmd, &out.trace);
      detail["client_ids"] = victims;
      detail["targets_per_client"] = per_client;
      break;
    }
  }

  out.report.scenario = scenario_to_json(cfg);
  out.report.metrics = attacks::evaluate_attack(out.verdicts, out.truth);
  out.report.detail = detail;
  out.report.round_count = out.logs.size();
  const auto& last = out.logs.back();
  out.report.final_train_acc_mean =
      std::accumulate(last.per_client_train_acc.begin(), last.per_client_train_acc.end(), 0.0) /
      static_cast<double>(last.per_client_train_acc.size());
  out.report.final_test_acc = last.shared_test_acc;
  out.report.seed = cfg.seed;
  out.report.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps and plot data
// ---------------------------------------------------------------------------

inline const std::map<std::string, std::string>& sweep_axis_aliases() {
  static const std::map<std::string, std::string> aliases = {
      {"client_count", "/partition/client_count"},
      {"alpha", "/partition/alpha"},
      {"weights", "/swarm/weights"},
      {"rounds", "/swarm/rounds"},
      {"local_epochs", "/swarm/local_epochs"},
      {"balance_attack_set", "/attack/balance_attack_set"},
      {"dropout_rates", "/defense/dropout_rates"},
      {"l2_lambda", "/defense/l2_lambda"},
      {"spread", "/dataset/spread"},
      {"seed", "/seed"},
  };
  return aliases;
}

// Applies `value` at the axis location of `base` and re-validates. The axis
// is either a documented alias or a JSON pointer like /swarm/rounds.
inline json apply_axis(const json& base, const std::string& axis, const json& value) {
  std::string pointer;
  if (const auto it = sweep_axis_aliases().find(axis); it != sweep_axis_aliases().end())
    pointer = it->second;
  else if (!axis.empty() && axis.front() == '/')
    pointer = axis;
  else
    throw ConfigError("axis", "unknown axis '" + axis + "'");
  json cfg = base;
  try {
    cfg[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigError("axis", std::string("cannot apply axis: ") + e.what());
  }
  return cfg;
}

struct SweepResult {
  std::string axis;
  std::vector<json> values;
  std::vector<RunArtifacts> runs;
};

inline SweepResult sweep(const json& base_cfg, const std::string& axis,
                         const std::vector<json>& values) {
  SweepResult result;
  result.axis = axis;
  result.values = values;
  for (const auto& v : values) {
    const json patched = apply_axis(base_cfg, axis, v);
    result.runs.push_back(run_scenario(parse_scenario(patched)));
  }
  return result;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

// One CSV per sweep: axis,value,accuracy,macro_f1,baseline
inline std::string plotdata_csv(const SweepResult& sweep_result) {
  std::string csv = "axis,value,accuracy,macro_f1,baseline\n";
  for (std::size_t i = 0; i < sweep_result.runs.size(); ++i) {
    const auto& m = sweep_result.runs[i].report.metrics;
    json row = {m.accuracy, m.macro_f1, m.baseline};
    csv += csv_quote(sweep_result.axis) + "," + csv_quote(sweep_result.values[i].dump()) + "," +
           row[0].dump() + "," + row[1].dump() + "," + row[2].dump() + "\n";
  }
  return csv;
}

inline void emit_plotdata(const SweepResult& sweep_result, const std::string& path) {
  write_text_file(path, plotdata_csv(sweep_result));
}

// ---------------------------------------------------------------------------
// Defense comparison
// ---------------------------------------------------------------------------

struct DefensePairedReport {
  ExperimentReport undefended;
  ExperimentReport defended;
};

// Same-seed paired run differing only in the defense spec.
inline DefensePairedReport defense_comparison(const ScenarioConfig& base,
                                              const defense::DefenseSpec& defense_spec,
                                              AttackKind attack) {
  ScenarioConfig off = base;
  off.defense = defense::DefenseSpec{};
  off.attack.kind = attack;
  ScenarioConfig on = base;
  on.defense = defense_spec;
  on.attack.kind = attack;
  DefensePairedReport paired;
  paired.undefended = run_scenario(off).report;
  paired.defended = run_scenario(on).report;
  return paired;
}

inline json paired_report_to_json(const DefensePairedReport& paired) {
  const auto gap = [](const ExperimentReport& r) {
    return r.final_train_acc_mean - r.final_test_acc;
  };
  json j;
  j["undefended"] = report_to_json(paired.undefended, false);
  j["defended"] = report_to_json(paired.defended, false);
  j["delta"] = {
      {"attack_accuracy", paired.defended.metrics.accuracy - paired.undefended.metrics.accuracy},
      {"macro_f1", paired.defended.metrics.macro_f1 - paired.undefended.metrics.macro_f1},
      {"train_test_gap", gap(paired.defended) - gap(paired.undefended)}};
  return j;
}

}  // namespace swarmaudit::harness
