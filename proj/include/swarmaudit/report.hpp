#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmaudit/attacks.hpp"
#include "swarmaudit/errors.hpp"
#include "swarmaudit/swarm.hpp"

namespace swarmaudit::harness {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct ExperimentReport {
  nlohmann::json scenario;            // config echo
  attacks::AttackMetrics metrics;
  nlohmann::json detail;              // per-topology extras (per-attacker blocks, ...)
  std::size_t round_count = 0;
  double final_train_acc_mean = 0.0;  // global model on client train sets, last round
  double final_test_acc = 0.0;        // global model on the shared test set, last round
  std::uint64_t seed = 0;
  double wall_clock_ms = 0.0;
};

inline nlohmann::json metrics_to_json(const attacks::AttackMetrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["baseline"] = m.baseline;
  j["class_labels"] = m.class_labels;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["support"] = m.support;
  j["confusion"] = m.confusion;
  return j;
}

// nlohmann objects keep keys sorted, so two reports from identical runs dump
// byte-identically once the wall-clock field is excluded.
inline nlohmann::json report_to_json(const ExperimentReport& r, bool include_wall_clock = true) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["artifact_version"] = kArtifactVersion;
  j["seed"] = r.seed;
  j["scenario"] = r.scenario;
  j["metrics"] = metrics_to_json(r.metrics);
  if (!r.detail.is_null()) j["detail"] = r.detail;
  j["rounds"] = r.round_count;
  j["final_train_acc_mean"] = r.final_train_acc_mean;
  j["final_test_acc"] = r.final_test_acc;
  j["train_test_gap"] = r.final_train_acc_mean - r.final_test_acc;
  if (include_wall_clock) j["wall_clock_ms"] = r.wall_clock_ms;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  f << content;
}

inline void write_report(const std::string& path, const ExperimentReport& r) {
  write_text_file(path, report_to_json(r).dump(2) + "\n");
}

// One JSON object per round. Full parameter tensors stay in memory; the
// stream carries their l2 norm so drift is still visible post hoc.
inline void write_round_logs_jsonl(const std::string& path,
                                   const std::vector<swarm::RoundLog>& logs) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  for (const auto& log : logs) {
    double l2 = 0.0;
    for (const auto& layer : log.global_model.layers) {
      l2 += layer.weights.squared_norm();
      for (double b : layer.biases) l2 += b * b;
    }
    nlohmann::json j;
    j["round"] = log.round;
    j["aggregator_id"] = log.aggregator_id;
    j["per_client_train_acc"] = log.per_client_train_acc;
    j["shared_test_acc"] = log.shared_test_acc;
    j["global_model_l2"] = std::sqrt(l2);
    f << j.dump() << "\n";
  }
}

// One row per target: target_index,truth,predicted,score
inline void write_verdicts_csv(const std::string& path,
                               const std::vector<attacks::AttackVerdict>& verdicts,
                               const std::vector<int>& truth) {
  if (verdicts.size() != truth.size())
    throw ArgumentError("write_verdicts_csv: verdicts/truth length mismatch");
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  f << "target_index,truth,predicted,score\n";
  f.precision(17);
  for (std::size_t i = 0; i < verdicts.size(); ++i)
    f << verdicts[i].target_index << "," << truth[i] << "," << verdicts[i].predicted << ","
      << verdicts[i].score << "\n";
}

// MMD intermediate distances, one JSON object per target.
inline void write_trace_jsonl(const std::string& path,
                              const std::vector<attacks::DiffTraceRow>& rows) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  for (const auto& row : rows) {
    nlohmann::json j;
    j["target_index"] = row.target_index;
    j["baseline"] = row.baseline;
    j["with_target"] = row.with_target;
    j["member_threshold"] = row.member_threshold;
    f << j.dump() << "\n";
  }
}

}  // namespace swarmaudit::harness
