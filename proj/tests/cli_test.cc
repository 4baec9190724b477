// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "privaudit/cli/config.h"
#include "privaudit/cli/experiments.h"
#include "privaudit/cli/report.h"

namespace privaudit::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

fs::path TempDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("privaudit_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

ExperimentConfig FromYaml(ExperimentKind kind, const std::string& yaml) {
  auto j = YamlToJson(yaml);
  EXPECT_TRUE(j.ok()) << j.status();
  auto c = ConfigFromJson(kind, *j);
  EXPECT_TRUE(c.ok()) << c.status();
  return *c;
}

// Small variants so the suite stays fast.
ExperimentConfig SmallConfig(ExperimentKind kind) {
  ExperimentConfig c = DefaultConfig(kind);
  switch (kind) {
    case ExperimentKind::kProtocolGap:
      c.universe.n = 400;
      c.pipeline.r_ipc = 0.05;
      c.protocol_gap.seeds = 3;
      break;
    case ExperimentKind::kDmProperties:
      c.dm_properties.pairs = 6;
      break;
    case ExperimentKind::kDpSgdTable:
      c.universe.n = 300;
      c.dpsgd_table.seeds = 2;
      c.dpsgd_table.rows.resize(3);
      break;
    case ExperimentKind::kEpsEstimation:
      c.eps_estimation.repeats = 5;
      c.eps_estimation.subgroup_n = 400;
      break;
    case ExperimentKind::kAudit:
      c.audit.trials_per_side = 20;
      break;
    case ExperimentKind::kEmCheck:
      c.em_check.max_size = 2;
      break;
  }
  return c;
}

void ForEachObject(const Json& j, const std::function<void(const std::string&, const Json&)>& fn) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      fn(k, v);
      ForEachObject(v, fn);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) ForEachObject(v, fn);
  }
}

Json WithoutProvenance(const Report& r) {
  Json j = ReportToJson(r);
  j.erase("provenance");
  return j;
}

// ---------------------------------------------------------------------------
// Config

TEST(ConfigTest, DefaultsRoundTripForEveryKind) {
  for (ExperimentKind kind : kAllExperiments) {
    const Json j = ConfigToJson(DefaultConfig(kind));
    auto back = ConfigFromJson(kind, j);
    ASSERT_TRUE(back.ok()) << ExperimentKindName(kind) << ": " << back.status();
    EXPECT_EQ(ConfigToJson(*back), j) << ExperimentKindName(kind);
    EXPECT_EQ(j, DefaultConfigJson(kind));
  }
}

TEST(ConfigTest, KindNamesRoundTrip) {
  for (ExperimentKind kind : kAllExperiments) {
    EXPECT_EQ(*ParseExperimentKind(ExperimentKindName(kind)), kind);
  }
  EXPECT_FALSE(ParseExperimentKind("table1").ok());
}

TEST(ConfigTest, PartialConfigKeepsDefaults) {
  auto c = FromYaml(ExperimentKind::kProtocolGap,
                    "seed: 7\nprotocol_gap:\n  seeds: 4\nuniverse:\n  dim: 3\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.protocol_gap.seeds, 4);
  EXPECT_EQ(c.universe.dim, 3);
  const auto d = DefaultConfig(ExperimentKind::kProtocolGap);
  EXPECT_EQ(c.universe.n, d.universe.n);
  EXPECT_EQ(c.protocol_gap.scorer, d.protocol_gap.scorer);
  EXPECT_EQ(c.pipeline.learner, d.pipeline.learner);
}

TEST(ConfigTest, ErrorsNameTheOffendingPath) {
  struct Case {
    ExperimentKind kind;
    std::string yaml;
    std::string path;
  };
  const std::vector<Case> cases = {
      {ExperimentKind::kProtocolGap, "protocol_gap:\n  sedes: 3\n", "protocol_gap.sedes"},
      {ExperimentKind::kProtocolGap, "universe:\n  n: \"2000\"\n", "universe.n"},
      {ExperimentKind::kProtocolGap, "universe:\n  n: 20.5\n", "universe.n"},
      {ExperimentKind::kProtocolGap, "protocol_gap:\n  sampling_rate: 1.5\n",
       "protocol_gap.sampling_rate"},
      {ExperimentKind::kProtocolGap, "protocol_gap:\n  scorer: oracle\n",
       "protocol_gap.scorer"},
      {ExperimentKind::kProtocolGap, "seed: -1\n", "seed"},
      {ExperimentKind::kEmCheck, "experiment: audit\n", "experiment"},
      {ExperimentKind::kEmCheck, "universe:\n  n: 10\n", "universe"},
      {ExperimentKind::kAudit, "audit:\n  trials_per_side: 10\n", "audit.trials_per_side"},
      {ExperimentKind::kAudit, "audit:\n  pipelines: []\n", "audit.pipelines"},
      {ExperimentKind::kAudit,
       "audit:\n  pipelines:\n    - name: a\n    - name: a\n", "audit.pipelines[1]"},
      {ExperimentKind::kAudit,
       "audit:\n  pipelines:\n    - name: a\n      target_epsilon: 1.0\n"
       "      pipeline: {learner: sgd}\n",
       "audit.pipelines[0]"},
      {ExperimentKind::kDmProperties, "dm_properties:\n  t_size: 100000\n",
       "dm_properties.t_size"},
  };
  for (const auto& c : cases) {
    auto j = YamlToJson(c.yaml);
    ASSERT_TRUE(j.ok()) << c.yaml;
    auto config = ConfigFromJson(c.kind, *j);
    ASSERT_FALSE(config.ok()) << c.yaml;
    EXPECT_EQ(config.status().code(), absl::StatusCode::kInvalidArgument);
    EXPECT_NE(config.status().message().find("config " + c.path), std::string::npos)
        << config.status();
  }
}

TEST(ConfigTest, YamlScalarsAreTyped) {
  auto j = YamlToJson(
      "a: 3\nb: -2.5\nc: true\nd: ~\ne: \"7\"\nf: text\ng: [1, 2.0]\nh: 1.0e-9\n");
  ASSERT_TRUE(j.ok()) << j.status();
  EXPECT_TRUE((*j)["a"].is_number_integer());
  EXPECT_EQ((*j)["a"].get<int>(), 3);
  EXPECT_EQ((*j)["b"].get<double>(), -2.5);
  EXPECT_TRUE((*j)["c"].is_boolean());
  EXPECT_TRUE((*j)["d"].is_null());
  EXPECT_TRUE((*j)["e"].is_string());
  EXPECT_EQ((*j)["f"].get<std::string>(), "text");
  EXPECT_TRUE((*j)["g"][0].is_number_integer());
  EXPECT_TRUE((*j)["g"][1].is_number_float());
  EXPECT_EQ((*j)["h"].get<double>(), 1e-9);
  EXPECT_FALSE(YamlToJson("a: [1, 2\n").ok());
}

TEST(ConfigTest, ShippedConfigsLoad) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(PRIVAUDIT_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    ++seen;
    std::string stem = entry.path().stem().string();
    if (stem.ends_with("_lira")) stem.resize(stem.size() - 5);
    auto kind = ParseExperimentKind(stem);
    ASSERT_TRUE(kind.ok()) << entry.path();
    auto config = LoadConfigFile(*kind, entry.path().string());
    EXPECT_TRUE(config.ok()) << entry.path() << ": " << config.status();
  }
  EXPECT_EQ(seen, 7);
}

TEST(ConfigTest, PublishedSchemaIsCurrent) {
  std::ifstream in(fs::path(PRIVAUDIT_CONFIG_DIR) / "schema.json");
  ASSERT_TRUE(in.good());
  EXPECT_EQ(Json::parse(in), SchemaJson());
}

TEST(ConfigTest, SchemaClosesEveryObject) {
  int objects = 0;
  ForEachObject(SchemaJson()["experiments"], [&](const std::string&, const Json& v) {
    if (v.is_object() && v.value("type", "") == "object") {
      ++objects;
      EXPECT_FALSE(v.at("additionalProperties").get<bool>());
    }
  });
  EXPECT_GT(objects, 6);
}

TEST(ConfigTest, TrialsOverrideTargetsTheRepetitionCount) {
  auto gap = DefaultConfig(ExperimentKind::kProtocolGap);
  ASSERT_TRUE(ApplyTrialsOverride(gap, 5).ok());
  EXPECT_EQ(gap.protocol_gap.seeds, 5);
  auto dm = DefaultConfig(ExperimentKind::kDmProperties);
  ASSERT_TRUE(ApplyTrialsOverride(dm, 9).ok());
  EXPECT_EQ(dm.dm_properties.pairs, 9);
  auto table = DefaultConfig(ExperimentKind::kDpSgdTable);
  ASSERT_TRUE(ApplyTrialsOverride(table, 2).ok());
  EXPECT_EQ(table.dpsgd_table.seeds, 2);
  auto eps = DefaultConfig(ExperimentKind::kEpsEstimation);
  ASSERT_TRUE(ApplyTrialsOverride(eps, 11).ok());
  EXPECT_EQ(eps.eps_estimation.repeats, 11);
  auto aud = DefaultConfig(ExperimentKind::kAudit);
  ASSERT_TRUE(ApplyTrialsOverride(aud, 40).ok());
  EXPECT_EQ(aud.audit.trials_per_side, 40);
  EXPECT_FALSE(ApplyTrialsOverride(aud, 19).ok());
  auto em = DefaultConfig(ExperimentKind::kEmCheck);
  EXPECT_FALSE(ApplyTrialsOverride(em, 3).ok());
}

// ---------------------------------------------------------------------------
// Report

metrics::RocCurve ThreePointCurve() {
  return *metrics::ComputeRoc(std::vector<double>{1.0, 1.0, 0.0, 0.0},
                              {true, false, true, false});
}

TEST(ReportTest, RocWithThreePointsIsThreeLinesPlusHeader) {
  const auto curve = ThreePointCurve();
  ASSERT_EQ(curve.points.size(), 3u);
  std::ostringstream out;
  WriteTableCsv(RocTable("roc", curve), out);
  std::istringstream in(out.str());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "fpr,tpr,threshold");
  EXPECT_EQ(lines[1], "0,0,inf");
  EXPECT_EQ(lines[3], "1,1,0");
}

TEST(ReportTest, ValidationSeparatesEmpiricalFromGuarantees) {
  Report ok;
  ok.results = {{"x", {{"empirical_lower_bound",
                        {{"eps_lb", 0.5}, {"eps_naive", {{"value", 1.0}, {"diagnostic", true}}}}},
                       {"accountant_upper_bound", {{"epsilon", 1.0}, {"formal_guarantee", true}}}}}};
  EXPECT_TRUE(ValidateReport(ok).ok());

  Report loose;
  loose.results = {{"eps_lb", 0.5}};
  EXPECT_FALSE(ValidateReport(loose).ok());

  Report labelled;
  labelled.results = {{"empirical_lower_bound", {{"eps_lb", 0.5}, {"formal_guarantee", true}}}};
  EXPECT_FALSE(ValidateReport(labelled).ok());

  Report untagged;
  untagged.results = {{"empirical_lower_bound", {{"eps_naive", {{"value", 1.0}}}}}};
  EXPECT_FALSE(ValidateReport(untagged).ok());

  Report ragged;
  ragged.tables.push_back({"t", {"a", "b"}, {{1}}});
  EXPECT_FALSE(ValidateReport(ragged).ok());
}

TEST(ReportTest, EmittedJsonParsesBackToTheSameReport) {
  auto report = RunExperiment(SmallConfig(ExperimentKind::kEpsEstimation));
  ASSERT_TRUE(report.ok()) << report.status();
  const fs::path dir = TempDir("roundtrip");
  ASSERT_TRUE(EmitReport(*report, dir.string()).ok());
  std::ifstream in(dir / "report.json");
  auto parsed = ReportFromJson(Json::parse(in));
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_TRUE(*parsed == *report);
  for (const auto& t : report->tables) {
    EXPECT_TRUE(fs::exists(dir / (t.name + ".csv"))) << t.name;
  }
  EXPECT_EQ(ReportToJson(*report)["schema"], "privaudit-report/1");
  EXPECT_FALSE(ReportFromJson(Json{{"schema", "other/1"}}).ok());
}

TEST(ReportTest, EmitSurfacesUnwritablePaths) {
  const fs::path dir = TempDir("blocked");
  WriteFile(dir / "file", "x");
  Report r;
  auto s = EmitReport(r, (dir / "file" / "sub").string());
  ASSERT_FALSE(s.ok());
  EXPECT_NE(s.message().find("file"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Experiments

TEST(ExperimentTest, EveryKindRunsAndPassesItsInvariants) {
  for (ExperimentKind kind : kAllExperiments) {
    auto report = RunExperiment(SmallConfig(kind));
    ASSERT_TRUE(report.ok()) << ExperimentKindName(kind) << ": " << report.status();
    EXPECT_EQ(report->experiment, ExperimentKindName(kind));
    EXPECT_FALSE(report->invariants.empty());
    for (const auto& inv : report->invariants) {
      EXPECT_TRUE(inv.ok) << inv.name << ": " << inv.detail;
    }
    EXPECT_TRUE(ValidateReport(*report).ok());
    int naive = 0;
    ForEachObject(report->results, [&](const std::string& key, const Json& v) {
      if (key == "eps_naive") {
        ++naive;
        EXPECT_TRUE(v.at("diagnostic").get<bool>());
      }
    });
    if (kind == ExperimentKind::kEpsEstimation || kind == ExperimentKind::kAudit ||
        kind == ExperimentKind::kProtocolGap) {
      EXPECT_GT(naive, 0) << ExperimentKindName(kind);
    }
  }
}

TEST(ExperimentTest, IdenticalConfigsGiveIdenticalReportsModuloTimestamps) {
  for (ExperimentKind kind : kAllExperiments) {
    const auto config = SmallConfig(kind);
    auto a = RunExperiment(config);
    auto b = RunExperiment(config);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(WithoutProvenance(*a).dump(), WithoutProvenance(*b).dump())
        << ExperimentKindName(kind);
  }
}

TEST(ExperimentTest, JobsDoNotChangeResults) {
  for (ExperimentKind kind : {ExperimentKind::kProtocolGap, ExperimentKind::kDpSgdTable,
                              ExperimentKind::kAudit, ExperimentKind::kDmProperties}) {
    auto config = SmallConfig(kind);
    auto a = RunExperiment(config);
    config.jobs = 3;
    auto b = RunExperiment(config);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(a->results, b->results) << ExperimentKindName(kind);
    EXPECT_EQ(a->tables, b->tables) << ExperimentKindName(kind);
  }
}

TEST(ExperimentTest, EmbeddedConfigReproducesTheRun) {
  for (ExperimentKind kind : {ExperimentKind::kProtocolGap, ExperimentKind::kAudit}) {
    auto config = SmallConfig(kind);
    config.seed = 17;
    auto first = RunExperiment(config);
    ASSERT_TRUE(first.ok());
    auto embedded = ConfigFromJson(kind, first->config);
    ASSERT_TRUE(embedded.ok()) << embedded.status();
    EXPECT_EQ(embedded->seed, 17u);
    auto second = RunExperiment(*embedded);
    ASSERT_TRUE(second.ok());
    EXPECT_EQ(first->results, second->results);
    EXPECT_EQ(first->tables, second->tables);
  }
}

TEST(ExperimentTest, SeedChangesResults) {
  auto config = SmallConfig(ExperimentKind::kEpsEstimation);
  auto a = RunExperiment(config);
  config.seed = 1;
  auto b = RunExperiment(config);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_NE(a->tables, b->tables);
}

TEST(ExperimentTest, ProtocolGapReportsBothGamesSideBySide) {
  auto report = RunExperiment(SmallConfig(ExperimentKind::kProtocolGap));
  ASSERT_TRUE(report.ok()) << report.status();
  const Json& r = report->results;
  EXPECT_TRUE(r["subset_restricted"]["advantage"]["mean"].is_number());
  EXPECT_TRUE(r["full_universe"]["advantage"]["mean"].is_number());
  EXPECT_TRUE(r["full_universe"]["advantage"]["ci_half_width"].is_number());
  EXPECT_DOUBLE_EQ(r["cap"]["two_r_ipc"].get<double>(), 0.1);
  EXPECT_EQ(r["subset_restricted"]["per_seed"].size(), 3u);
}

TEST(ExperimentTest, ProtocolGapRejectsSynthesizedCondensedRows) {
  auto config = SmallConfig(ExperimentKind::kProtocolGap);
  config.pipeline.condense = attack::CondenseStep::kDmLinear;
  config.pipeline.dm_init = condense::InitKind::kGaussianCentered;
  auto report = RunExperiment(config);
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(report.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(report.status().message().rfind("protocol_gap: ", 0), 0u);
}

TEST(ExperimentTest, DpSgdTableHasTheTableColumns) {
  auto report = RunExperiment(SmallConfig(ExperimentKind::kDpSgdTable));
  ASSERT_TRUE(report.ok()) << report.status();
  const Table& t = report->tables.front();
  EXPECT_EQ(t.name, "dpsgd_table");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"technique", "test_accuracy", "epsilon",
                                                 "formal_guarantee", "attack_advantage",
                                                 "attack_auc"}));
  ASSERT_EQ(t.rows.size(), 3u);
  // memorizing, sgd: no guarantee; dpsgd_eps1: calibrated to epsilon 1.
  EXPECT_TRUE(t.rows[0][2].is_null());
  EXPECT_FALSE(t.rows[1][3].get<bool>());
  EXPECT_TRUE(t.rows[2][3].get<bool>());
  EXPECT_LE(t.rows[2][2].get<double>(), 1.0 + 1e-9);
  EXPECT_GT(t.rows[0][4].get<double>(), 0.9);
}

TEST(ExperimentTest, EmCheckCountsEveryNeighbouringPair) {
  auto config = DefaultConfig(ExperimentKind::kEmCheck);
  auto report = RunExperiment(config);
  ASSERT_TRUE(report.ok());
  // Multisets of size <= 3 over 3 values: 1 + 3 + 6 + 10 = 20; each has 3
  // one-larger neighbours.
  EXPECT_EQ(report->results["neighbouring_pairs"].get<int>(), 60);
  EXPECT_EQ(report->results["datasets"].get<int>(), 35);
}

// ---------------------------------------------------------------------------
// Binary

int RunTool(const std::string& args) {
  const std::string cmd =
      std::string(PRIVAUDIT_BINARY) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

TEST(BinaryTest, ExitCodes) {
  const fs::path dir = TempDir("exit");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(RunTool("em_check" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "em_check" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "em_check" / "em_pairs.csv"));

  const auto unknown = WriteFile(dir / "unknown.yaml", "em_check:\n  sizes: 3\n");
  EXPECT_EQ(RunTool("em_check --config " + unknown + out), 2);
  EXPECT_EQ(RunTool("em_check --trials 3" + out), 2);
  EXPECT_EQ(RunTool("no_such_experiment"), 2);

  // A tolerance below the rounding error of any nonzero mean trips the
  // exactness invariant.
  const auto strict = WriteFile(dir / "strict.yaml",
                                "dm_properties:\n  pairs: 4\n  tolerance: 1.0e-300\n");
  EXPECT_EQ(RunTool("dm_properties --config " + strict + out), 3);
  EXPECT_TRUE(fs::exists(dir / "dm_properties" / "report.json"));
}

TEST(BinaryTest, OutFlagBeatsEnvironmentBeatsConfig) {
  const fs::path dir = TempDir("precedence");
  const auto config = WriteFile(dir / "c.yaml", "out: " + (dir / "from_config").string() + "\n");
  ASSERT_EQ(setenv("PRIVAUDIT_OUT", (dir / "from_env").c_str(), 1), 0);
  EXPECT_EQ(RunTool("em_check --config " + config + " --out " + (dir / "from_flag").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "from_flag" / "em_check" / "report.json"));
  EXPECT_EQ(RunTool("em_check --config " + config), 0);
  EXPECT_TRUE(fs::exists(dir / "from_env" / "em_check" / "report.json"));
  ASSERT_EQ(unsetenv("PRIVAUDIT_OUT"), 0);
  EXPECT_EQ(RunTool("em_check --config " + config), 0);
  EXPECT_TRUE(fs::exists(dir / "from_config" / "em_check" / "report.json"));
}

TEST(BinaryTest, SchemaSubcommandPrintsThePublishedSchema) {
  const fs::path dir = TempDir("schema");
  const std::string cmd = std::string(PRIVAUDIT_BINARY) + " schema > " +
                          (dir / "schema.json").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream in(dir / "schema.json");
  EXPECT_EQ(Json::parse(in), SchemaJson());
}

}  // namespace
}  // namespace privaudit::cli
