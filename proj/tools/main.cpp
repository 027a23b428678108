#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmaudit/report.hpp"
#include "swarmaudit/scenario.hpp"
#include "swarmaudit/selfcheck.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swarmaudit;

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return j;
}

void write_run_artifacts(const harness::RunArtifacts& run, const std::string& out_dir,
                         bool trace) {
  fs::create_directories(out_dir);
  harness::write_report((fs::path(out_dir) / "report.json").string(), run.report);
  harness::write_round_logs_jsonl((fs::path(out_dir) / "round_logs.jsonl").string(), run.logs);
  harness::write_verdicts_csv((fs::path(out_dir) / "verdicts.csv").string(), run.verdicts,
                              run.truth);
  if (trace && !run.trace.empty())
    harness::write_trace_jsonl((fs::path(out_dir) / "trace.jsonl").string(), run.trace);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool trace) {
  const json raw = load_json_file(config_path);
  const auto cfg = harness::parse_scenario(raw);
  const auto run = harness::run_scenario(cfg);
  if (!out_dir.empty()) write_run_artifacts(run, out_dir, trace);
  const auto& m = run.report.metrics;
  std::cout << "attack=" << harness::attack_kind_name(cfg.attack.kind)
            << " accuracy=" << m.accuracy << " macro_f1=" << m.macro_f1
            << " baseline=" << m.baseline << " train_test_gap="
            << run.report.final_train_acc_mean - run.report.final_test_acc << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_text, const std::string& out_dir, bool trace) {
  const json raw = load_json_file(config_path);
  json values;
  try {
    values = json::parse(values_text);
  } catch (const json::exception& e) {
    throw ConfigError("values", std::string("invalid JSON list: ") + e.what());
  }
  if (!values.is_array() || values.empty())
    throw ConfigError("values", "expected a non-empty JSON list");

  const auto result =
      harness::sweep(raw, axis, std::vector<json>(values.begin(), values.end()));
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < result.runs.size(); ++i)
      write_run_artifacts(result.runs[i], (fs::path(out_dir) / ("value_" + std::to_string(i))).string(),
                          trace);
    harness::emit_plotdata(result, (fs::path(out_dir) / "sweep.csv").string());
  }
  std::cout << harness::plotdata_csv(result);
  return kExitOk;
}

int cmd_gradcheck(int trials) {
  const auto r = selfcheck::gradient_check(trials, 20240901ULL);
  std::cout << "gradcheck trials=" << r.trials << " max_rel_error=" << r.max_rel_error
            << " tol=1e-4 " << (r.pass ? "PASS" : "FAIL") << "\n";
  return r.pass ? kExitOk : kExitRuntime;
}

int cmd_mmdcheck(int trials) {
  const auto r = selfcheck::mmd_check(trials, 20240902ULL);
  std::cout << "mmdcheck trials=" << r.trials << " max_abs_error=" << r.max_abs_error
            << " max_self=" << r.max_self << " max_asymmetry=" << r.max_asymmetry << " "
            << (r.pass ? "PASS" : "FAIL") << "\n";
  return r.pass ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarm-learning membership leakage audit harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values_text;
  bool trace = false;
  int trials_grad = 20;
  int trials_mmd = 50;

  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--trace", trace, "write MMD distance traces (differential attacks)");

  auto* sweep = app.add_subcommand("sweep", "run a scenario across one axis");
  sweep->add_option("--config", config_path, "scenario config JSON")->required();
  sweep->add_option("--axis", axis, "axis name or JSON pointer")->required();
  sweep->add_option("--values", values_text, "JSON list of axis values")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_flag("--trace", trace, "write MMD distance traces");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient self-test");
  gradcheck->add_option("--trials", trials_grad, "number of random fixtures");

  auto* mmdcheck = app.add_subcommand("mmdcheck", "MMD oracle equivalence self-test");
  mmdcheck->add_option("--trials", trials_mmd, "number of random set pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, trace);
    if (sweep->parsed()) return cmd_sweep(config_path, axis, values_text, out_dir, trace);
    if (gradcheck->parsed()) return cmd_gradcheck(trials_grad);
    if (mmdcheck->parsed()) return cmd_mmdcheck(trials_mmd);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
