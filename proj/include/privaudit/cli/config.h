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

// Experiment configuration.
//
// A config file is YAML. It is converted to JSON and checked against the
// schema of its experiment kind: the tree of default values returned by
// DefaultConfigJson. Every key must exist in that tree with the same value
// type; omitted keys keep their defaults. SchemaJson renders the trees of
// all kinds as a JSON-Schema style document.

#ifndef PRIVAUDIT_CLI_CONFIG_H_
#define PRIVAUDIT_CLI_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "privaudit/attack/pipeline.h"
#include "privaudit/data/universe.h"

namespace privaudit::cli {

enum class ExperimentKind {
  kProtocolGap,
  kDmProperties,
  kDpSgdTable,
  kEpsEstimation,
  kAudit,
  kEmCheck,
};

inline constexpr ExperimentKind kAllExperiments[] = {
    ExperimentKind::kProtocolGap,   ExperimentKind::kDmProperties,
    ExperimentKind::kDpSgdTable,    ExperimentKind::kEpsEstimation,
    ExperimentKind::kAudit,         ExperimentKind::kEmCheck,
};

std::string_view ExperimentKindName(ExperimentKind kind);
absl::StatusOr<ExperimentKind> ParseExperimentKind(std::string_view name);

// A pipeline with a display name. When target_epsilon > 0 and the learner
// is dpsgd, the noise multiplier is calibrated to reach it.
struct NamedPipeline {
  std::string name;
  attack::PipelineSpec pipeline;
  double target_epsilon = 0.0;
};

struct ProtocolGapParams {
  double sampling_rate = 0.5;
  int seeds = 20;
  // loss_threshold or lira.
  std::string scorer = "loss_threshold";
  int shadows = 16;
  double confidence = 0.95;
};

struct DmPropertiesParams {
  int pairs = 100;
  int t_size = 100;
  int condensed_size = 10;
  double tolerance = 1e-9;
};

struct DpSgdTableParams {
  double sampling_rate = 0.5;
  int seeds = 3;
  std::vector<NamedPipeline> rows;
};

struct EpsEstimationParams {
  double epsilon = 1.0986122886681098;  // ln 3
  int observations = 1000;
  int repeats = 100;
  double confidence = 0.95;
  int subgroup_n = 10000;
  double subgroup_fraction = 0.1;
};

struct AuditParams {
  int target_class = 0;
  double canary_distance = 6.0;
  int trials_per_side = 200;
  // 0 means half of trials_per_side.
  int calibration_per_side = 0;
  std::string distinguisher = "auto";
  double confidence = 0.95;
  std::vector<NamedPipeline> pipelines;
};

struct EmCheckParams {
  // One-dimensional example space; example i has label i % 2.
  std::vector<double> values = {-1.0, 0.0, 1.0};
  // Candidate logistic weights; candidate j scores class 0 with thetas[j] * x.
  std::vector<double> thetas = {-2.0, 0.0, 2.0};
  int max_size = 4;
  double loss_lo = 0.0;
  double loss_hi = 1.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kProtocolGap;
  uint64_t seed = 0;
  int jobs = 1;
  std::string out = "privaudit-out";
  // universe.seed is ignored; universe seeds are derived from `seed`.
  data::UniverseSpec universe;
  attack::PipelineSpec pipeline;
  ProtocolGapParams protocol_gap;
  DmPropertiesParams dm_properties;
  DpSgdTableParams dpsgd_table;
  EpsEstimationParams eps_estimation;
  AuditParams audit;
  EmCheckParams em_check;
};

ExperimentConfig DefaultConfig(ExperimentKind kind);

// Only the sections `kind` reads are emitted.
nlohmann::ordered_json ConfigToJson(const ExperimentConfig& config);
nlohmann::ordered_json DefaultConfigJson(ExperimentKind kind);

// `kind` selects the schema; a top-level `experiment` key, if present, must
// name the same kind. Errors are InvalidArgument with the offending path.
absl::StatusOr<ExperimentConfig> ConfigFromJson(ExperimentKind kind,
                                                const nlohmann::ordered_json& j);

// YAML text to JSON. Unquoted scalars become booleans, integers or floats
// when they parse as such; null and ~ become null.
absl::StatusOr<nlohmann::ordered_json> YamlToJson(std::string_view yaml);

absl::StatusOr<ExperimentConfig> LoadConfigFile(ExperimentKind kind,
                                                const std::string& path);

// Overrides for the experiment's repetition count: seeds, pairs, repeats,
// trials per side; em_check has none and rejects it.
absl::Status ApplyTrialsOverride(ExperimentConfig& config, int trials);

nlohmann::ordered_json SchemaJson();

}  // namespace privaudit::cli

#endif  // PRIVAUDIT_CLI_CONFIG_H_
