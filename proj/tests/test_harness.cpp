#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "swarmaudit/scenario.hpp"

using namespace swarmaudit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config(int clients = 2, const std::string& attack = "shadow_one_to_one") {
  return {
      {"seed", 1001},
      {"dataset", {{"class_count", 5}, {"per_class", 40}, {"dim", 8}, {"spread", 0.4}}},
      {"partition", {{"client_count", clients}}},
      {"model", {{"hidden", {16}}}},
      {"swarm", {{"rounds", 3}, {"local_epochs", 1}, {"learning_rate", 0.1}}},
      {"attack", {{"kind", attack}, {"epochs", 15}}},
  };
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SWARMAUDIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("swarmaudit_harness_" + name);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, MinimalParsesWithDefaults) {
  const auto cfg = harness::parse_scenario(small_config());
  EXPECT_EQ(cfg.partition.client_count, 2);
  EXPECT_EQ(cfg.resolved_attacker(), 2);  // defaults to client N
  EXPECT_EQ(cfg.resolved_victims(), (std::vector<int>{1}));
  EXPECT_TRUE(cfg.attack.balance_attack_set);
  EXPECT_TRUE(cfg.attack.mmd.median_heuristic);
}

TEST(Config, UnknownKeyRejectedWithPath) {
  auto j = small_config();
  j["swarm"]["bogus"] = 1;
  try {
    harness::parse_scenario(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("swarm.bogus"), std::string::npos);
  }
}

TEST(Config, WrongTypeRejectedWithPath) {
  auto j = small_config();
  j["swarm"]["rounds"] = "many";
  try {
    harness::parse_scenario(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("swarm.rounds"), std::string::npos);
  }
}

TEST(Config, AttackerCannotBeVictim) {
  auto j = small_config();
  j["attack"]["attacker_id"] = 1;
  j["attack"]["victim_ids"] = {1};
  EXPECT_THROW(harness::parse_scenario(j), ConfigError);
}

TEST(Config, IdsMustBeInRange) {
  auto j = small_config();
  j["attack"]["victim_ids"] = {9};
  EXPECT_THROW(harness::parse_scenario(j), ConfigError);
}

TEST(Config, WeightsMustSumToOne) {
  auto j = small_config();
  j["swarm"]["weights"] = {0.9, 0.3};
  EXPECT_THROW(harness::parse_scenario(j), ConfigError);
}

TEST(Config, MissingSeedRejected) {
  auto j = small_config();
  j.erase("seed");
  EXPECT_THROW(harness::parse_scenario(j), ConfigError);
}

TEST(RunScenario, ByteIdenticalReportsModuloWallClock) {
  const auto cfg = harness::parse_scenario(small_config());
  const auto a = harness::run_scenario(cfg);
  const auto b = harness::run_scenario(cfg);
  EXPECT_EQ(harness::report_to_json(a.report, false).dump(),
            harness::report_to_json(b.report, false).dump());
}

// With almost no training the model never memorizes, so the shadow attack
// sits at chance level.
TEST(RunScenario, NonOverfitRegimeGivesChanceAccuracy) {
  auto j = small_config();
  j["dataset"]["per_class"] = 100;
  j["swarm"]["rounds"] = 1;
  j["swarm"]["local_epochs"] = 1;
  j["attack"]["epochs"] = 100;
  const auto run = harness::run_scenario(harness::parse_scenario(j));
  EXPECT_NEAR(run.report.metrics.accuracy, 0.5, 0.07);
}

TEST(RunScenario, BinaryTopologyBaselineHalf) {
  const auto run = harness::run_scenario(harness::parse_scenario(small_config()));
  EXPECT_DOUBLE_EQ(run.report.metrics.baseline, 0.5);
  EXPECT_EQ(run.truth.size(), run.verdicts.size());
}

TEST(RunScenario, OneToMultiBaselineThird) {
  auto j = small_config(3, "shadow_one_to_multi");
  const auto run = harness::run_scenario(harness::parse_scenario(j));
  EXPECT_NEAR(run.report.metrics.baseline, 1.0 / 3.0, 1e-12);
}

TEST(RunScenario, DifferentialFourClientsBaselineQuarter) {
  auto j = small_config(4, "differential_v1");
  j["dataset"]["per_class"] = 60;
  j["partition"]["mode"] = "dirichlet";
  j["partition"]["alpha"] = 0.5;
  const auto run = harness::run_scenario(harness::parse_scenario(j));
  EXPECT_DOUBLE_EQ(run.report.metrics.baseline, 0.25);
  EXPECT_FALSE(run.trace.empty());
}

TEST(RunScenario, MetricAttackProducesThresholdDetail) {
  const auto run =
      harness::run_scenario(harness::parse_scenario(small_config(2, "metric_confidence")));
  EXPECT_TRUE(run.report.detail.contains("threshold"));
  EXPECT_DOUBLE_EQ(run.report.metrics.baseline, 0.5);
}

TEST(RunScenario, MultiToOneAggregatesAllAttackers) {
  const auto run =
      harness::run_scenario(harness::parse_scenario(small_config(3, "shadow_multi_to_one")));
  ASSERT_TRUE(run.report.detail.contains("per_attacker"));
  EXPECT_EQ(run.report.detail["per_attacker"].size(), 2u);  // clients 2 and 3 attack victim 1
}

TEST(Sweep, ClientCountAxisProducesOneReportPerValue) {
  const auto base = small_config();
  const auto result = harness::sweep(base, "client_count", {json(2), json(3), json(4)});
  ASSERT_EQ(result.runs.size(), 3u);
  for (const auto& run : result.runs) EXPECT_GT(run.report.metrics.accuracy, 0.0);
}

TEST(Sweep, UnknownAxisRejected) {
  EXPECT_THROW(harness::sweep(small_config(), "nonsense", {json(1)}), ConfigError);
}

TEST(Sweep, PlotdataSchema) {
  const auto base = small_config();
  auto result = harness::sweep(base, "rounds", {json(1), json(2), json(3)});
  const auto csv = harness::plotdata_csv(result);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "axis,value,accuracy,macro_f1,baseline");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 3);

  result.runs.clear();
  result.values.clear();
  EXPECT_EQ(harness::plotdata_csv(result), "axis,value,accuracy,macro_f1,baseline\n");
}

TEST(Cli, ExitCodesAndArtifacts) {
  const auto dir = temp_dir("cli");
  const auto cfg_path = dir / "cfg.json";
  std::ofstream(cfg_path) << small_config().dump();

  EXPECT_EQ(run_cli("run --config " + cfg_path.string() + " --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "round_logs.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "verdicts.csv"));

  EXPECT_EQ(run_cli("run --config /nonexistent.json"), 2);

  const auto bad_cfg = dir / "bad.json";
  auto bad = small_config();
  bad["oops"] = true;
  std::ofstream(bad_cfg) << bad.dump();
  EXPECT_EQ(run_cli("run --config " + bad_cfg.string()), 2);

  EXPECT_EQ(run_cli("gradcheck --trials 3"), 0);
  EXPECT_EQ(run_cli("mmdcheck --trials 5"), 0);
}

TEST(Cli, SweepWritesPlotdata) {
  const auto dir = temp_dir("cli_sweep");
  const auto cfg_path = dir / "cfg.json";
  std::ofstream(cfg_path) << small_config().dump();
  EXPECT_EQ(run_cli("sweep --config " + cfg_path.string() + " --axis rounds --values [1,2] --out " +
                    (dir / "out").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "value_0" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "value_1" / "report.json"));
}
