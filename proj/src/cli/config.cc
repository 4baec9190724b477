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

#include "privaudit/cli/config.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "privaudit/common/status_macros.h"
#include "yaml-cpp/yaml.h"

namespace privaudit::cli {
namespace {

using Json = nlohmann::ordered_json;

absl::Status ConfigError(const std::string& path, std::string_view message) {
  return absl::InvalidArgumentError(
      absl::StrCat("config ", path.empty() ? "root" : path, ": ",
                   std::string(message)));
}

std::string Child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : absl::StrCat(path, ".", std::string(key));
}

std::string_view TypeName(const Json& j) {
  if (j.is_object()) return "object";
  if (j.is_array()) return "array";
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  return "null";
}

bool SameType(const Json& schema, const Json& value) {
  if (schema.is_number_integer()) return value.is_number_integer();
  if (schema.is_number()) return value.is_number();
  return TypeName(schema) == TypeName(value);
}

// Every key of `value` must exist in `schema` with a compatible type. Arrays
// are checked element-wise against the first schema element.
absl::Status CheckAgainst(const Json& schema, const Json& value,
                          const std::string& path) {
  if (!SameType(schema, value)) {
    return ConfigError(path, absl::StrCat("expected ", std::string(TypeName(schema)),
                                          ", got ", std::string(TypeName(value))));
  }
  if (schema.is_object()) {
    for (const auto& [key, child] : value.items()) {
      if (!schema.contains(key)) {
        return ConfigError(Child(path, key), "unknown key");
      }
      RETURN_IF_ERROR(CheckAgainst(schema.at(key), child, Child(path, key)));
    }
  } else if (schema.is_array() && !schema.empty()) {
    for (size_t i = 0; i < value.size(); ++i) {
      RETURN_IF_ERROR(CheckAgainst(schema.front(), value[i],
                                   absl::StrCat(path, "[", i, "]")));
    }
  }
  return absl::OkStatus();
}

// Objects merge key by key; anything else in `patch` replaces `base`.
void Merge(Json& base, const Json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) Merge(base[key], value);
}

Json NamedPipelineToJson(const NamedPipeline& p) {
  return Json{{"name", p.name},
              {"target_epsilon", p.target_epsilon},
              {"pipeline", attack::PipelineToJson(p.pipeline)}};
}

absl::StatusOr<std::vector<NamedPipeline>> ReadPipelines(const Json& list,
                                                         const std::string& path) {
  std::vector<NamedPipeline> out;
  std::set<std::string> names;
  for (size_t i = 0; i < list.size(); ++i) {
    const std::string where = absl::StrCat(path, "[", i, "]");
    const Json& item = list[i];
    NamedPipeline p;
    p.name = item.value("name", "");
    if (p.name.empty()) return ConfigError(where, "every pipeline needs a name");
    if (!names.insert(p.name).second) {
      return ConfigError(where, absl::StrCat("duplicate name `", p.name, "`"));
    }
    p.target_epsilon = item.value("target_epsilon", 0.0);
    if (p.target_epsilon < 0.0) {
      return ConfigError(where, "target_epsilon must be non-negative");
    }
    auto spec = attack::PipelineFromJson(item.value("pipeline", Json::object()));
    if (!spec.ok()) return ConfigError(where, std::string(spec.status().message()));
    p.pipeline = *spec;
    if (p.target_epsilon > 0.0 && p.pipeline.learner != attack::LearnerStep::kDpSgd) {
      return ConfigError(where, "target_epsilon applies to dpsgd pipelines only");
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) return ConfigError(path, "at least one pipeline is required");
  return out;
}

NamedPipeline Named(std::string name, attack::PipelineSpec spec,
                    double target_epsilon = 0.0) {
  return {std::move(name), spec, target_epsilon};
}

std::vector<NamedPipeline> DefaultTableRows() {
  using attack::CondenseStep;
  using attack::LearnerStep;
  attack::PipelineSpec sgd;
  sgd.learner = LearnerStep::kSgd;
  sgd.sgd.epochs = 30;
  attack::PipelineSpec dp;
  dp.learner = LearnerStep::kDpSgd;
  dp.dpsgd.sample_rate = 0.05;
  dp.dpsgd.steps = 300;
  attack::PipelineSpec low_noise = dp;
  low_noise.dpsgd.noise_multiplier = 0.3;
  low_noise.dpsgd.steps = 1000;
  attack::PipelineSpec subset = sgd;
  subset.condense = CondenseStep::kRandomSubset;
  subset.r_ipc = 0.02;
  attack::PipelineSpec dm = subset;
  dm.condense = CondenseStep::kDmLinear;
  attack::PipelineSpec memorizing;
  memorizing.learner = LearnerStep::kMemorizing;
  return {Named("memorizing", memorizing),
          Named("sgd", sgd),
          Named("dpsgd_eps1", dp, 1.0),
          Named("dpsgd_eps8", dp, 8.0),
          Named("dpsgd_low_noise", low_noise),
          Named("random_subset_sgd", subset),
          Named("dm_linear_sgd", dm)};
}

std::vector<NamedPipeline> DefaultAuditPipelines() {
  attack::PipelineSpec dm;
  dm.condense = attack::CondenseStep::kDmLinear;
  dm.r_ipc = 0.05;
  dm.learner = attack::LearnerStep::kSgd;
  dm.sgd.epochs = 1;
  attack::PipelineSpec dp;
  dp.learner = attack::LearnerStep::kDpSgd;
  dp.dpsgd.sample_rate = 1.0;
  dp.dpsgd.steps = 10;
  return {Named("dm_linear_sgd", dm), Named("dpsgd_eps1", dp, 1.0)};
}

Json UniverseToJson(const data::UniverseSpec& u) {
  return Json{{"n", u.n},
              {"dim", u.dim},
              {"num_classes", u.num_classes},
              {"separation", u.separation},
              {"noise", u.noise}};
}

bool UsesUniverse(ExperimentKind kind) {
  return kind != ExperimentKind::kEpsEstimation && kind != ExperimentKind::kEmCheck;
}

bool InUnitInterval(double x) { return x > 0.0 && x < 1.0; }

absl::Status ValidateUniverse(const data::UniverseSpec& u) {
  if (u.n < 2) return ConfigError("universe.n", "must be at least 2");
  if (u.dim < 1) return ConfigError("universe.dim", "must be positive");
  if (u.num_classes < 2) return ConfigError("universe.num_classes", "must be at least 2");
  if (!(u.noise > 0.0)) return ConfigError("universe.noise", "must be positive");
  if (!(u.separation >= 0.0)) {
    return ConfigError("universe.separation", "must be non-negative");
  }
  return absl::OkStatus();
}

absl::Status ReadSection(const Json& j, ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::kProtocolGap: {
      const Json& s = j.at("protocol_gap");
      auto& p = c.protocol_gap;
      p.sampling_rate = s.at("sampling_rate").get<double>();
      p.seeds = s.at("seeds").get<int>();
      p.scorer = s.at("scorer").get<std::string>();
      p.shadows = s.at("shadows").get<int>();
      p.confidence = s.at("confidence").get<double>();
      if (!InUnitInterval(p.sampling_rate)) {
        return ConfigError("protocol_gap.sampling_rate", "must lie in (0, 1)");
      }
      if (p.seeds < 1) return ConfigError("protocol_gap.seeds", "must be positive");
      if (p.scorer != "loss_threshold" && p.scorer != "lira") {
        return ConfigError("protocol_gap.scorer", "must be loss_threshold or lira");
      }
      if (p.shadows < 2) return ConfigError("protocol_gap.shadows", "must be at least 2");
      if (!InUnitInterval(p.confidence)) {
        return ConfigError("protocol_gap.confidence", "must lie in (0, 1)");
      }
      auto spec = attack::PipelineFromJson(j.at("pipeline"));
      if (!spec.ok()) return ConfigError("pipeline", std::string(spec.status().message()));
      c.pipeline = *spec;
      break;
    }
    case ExperimentKind::kDmProperties: {
      const Json& s = j.at("dm_properties");
      auto& p = c.dm_properties;
      p.pairs = s.at("pairs").get<int>();
      p.t_size = s.at("t_size").get<int>();
      p.condensed_size = s.at("condensed_size").get<int>();
      p.tolerance = s.at("tolerance").get<double>();
      if (p.pairs < 1) return ConfigError("dm_properties.pairs", "must be positive");
      if (p.t_size < 2 || p.t_size > c.universe.n) {
        return ConfigError("dm_properties.t_size", "must lie in [2, universe.n]");
      }
      if (p.condensed_size < 2) {
        return ConfigError("dm_properties.condensed_size", "must be at least 2");
      }
      if (!(p.tolerance > 0.0)) {
        return ConfigError("dm_properties.tolerance", "must be positive");
      }
      break;
    }
    case ExperimentKind::kDpSgdTable: {
      const Json& s = j.at("dpsgd_table");
      auto& p = c.dpsgd_table;
      p.sampling_rate = s.at("sampling_rate").get<double>();
      p.seeds = s.at("seeds").get<int>();
      if (!InUnitInterval(p.sampling_rate)) {
        return ConfigError("dpsgd_table.sampling_rate", "must lie in (0, 1)");
      }
      if (p.seeds < 1) return ConfigError("dpsgd_table.seeds", "must be positive");
      ASSIGN_OR_RETURN(p.rows, ReadPipelines(s.at("rows"), "dpsgd_table.rows"));
      break;
    }
    case ExperimentKind::kEpsEstimation: {
      const Json& s = j.at("eps_estimation");
      auto& p = c.eps_estimation;
      p.epsilon = s.at("epsilon").get<double>();
      p.observations = s.at("observations").get<int>();
      p.repeats = s.at("repeats").get<int>();
      p.confidence = s.at("confidence").get<double>();
      p.subgroup_n = s.at("subgroup_n").get<int>();
      p.subgroup_fraction = s.at("subgroup_fraction").get<double>();
      if (!(p.epsilon > 0.0)) return ConfigError("eps_estimation.epsilon", "must be positive");
      if (p.observations < 2 || p.observations % 2 != 0) {
        return ConfigError("eps_estimation.observations", "must be a positive even number");
      }
      if (p.repeats < 1) return ConfigError("eps_estimation.repeats", "must be positive");
      if (!InUnitInterval(p.confidence)) {
        return ConfigError("eps_estimation.confidence", "must lie in (0, 1)");
      }
      if (p.subgroup_n < 20) {
        return ConfigError("eps_estimation.subgroup_n", "must be at least 20");
      }
      if (!InUnitInterval(p.subgroup_fraction)) {
        return ConfigError("eps_estimation.subgroup_fraction", "must lie in (0, 1)");
      }
      break;
    }
    case ExperimentKind::kAudit: {
      const Json& s = j.at("audit");
      auto& p = c.audit;
      p.target_class = s.at("target_class").get<int>();
      p.canary_distance = s.at("canary_distance").get<double>();
      p.trials_per_side = s.at("trials_per_side").get<int>();
      p.calibration_per_side = s.at("calibration_per_side").get<int>();
      p.distinguisher = s.at("distinguisher").get<std::string>();
      p.confidence = s.at("confidence").get<double>();
      if (p.target_class < 0 || p.target_class >= c.universe.num_classes) {
        return ConfigError("audit.target_class", "must name a class of the universe");
      }
      if (p.trials_per_side < 20) {
        return ConfigError("audit.trials_per_side", "must be at least 20");
      }
      if (p.calibration_per_side < 0 || p.calibration_per_side >= p.trials_per_side) {
        return ConfigError("audit.calibration_per_side",
                           "must lie in [0, trials_per_side)");
      }
      if (p.distinguisher != "auto" && p.distinguisher != "condensed_mean" &&
          p.distinguisher != "target_loss") {
        return ConfigError("audit.distinguisher",
                           "must be auto, condensed_mean or target_loss");
      }
      if (!InUnitInterval(p.confidence)) {
        return ConfigError("audit.confidence", "must lie in (0, 1)");
      }
      ASSIGN_OR_RETURN(p.pipelines, ReadPipelines(s.at("pipelines"), "audit.pipelines"));
      break;
    }
    case ExperimentKind::kEmCheck: {
      const Json& s = j.at("em_check");
      auto& p = c.em_check;
      p.values = s.at("values").get<std::vector<double>>();
      p.thetas = s.at("thetas").get<std::vector<double>>();
      p.max_size = s.at("max_size").get<int>();
      p.loss_lo = s.at("loss_lo").get<double>();
      p.loss_hi = s.at("loss_hi").get<double>();
      if (p.values.empty()) return ConfigError("em_check.values", "must not be empty");
      if (p.thetas.empty()) return ConfigError("em_check.thetas", "must not be empty");
      if (p.max_size < 1 || p.max_size > 8) {
        return ConfigError("em_check.max_size", "must lie in [1, 8]");
      }
      if (!(p.loss_lo < p.loss_hi)) {
        return ConfigError("em_check.loss_hi", "must exceed loss_lo");
      }
      break;
    }
  }
  return absl::OkStatus();
}

Json ScalarToJson(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;
  if (s == "true") return true;
  if (s == "false") return false;
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  int64_t i = 0;
  if (auto [p, ec] = std::from_chars(begin, end, i); ec == std::errc() && p == end) {
    return i;
  }
  uint64_t u = 0;
  if (auto [p, ec] = std::from_chars(begin, end, u); ec == std::errc() && p == end) {
    return u;
  }
  char* stop = nullptr;
  const double d = std::strtod(s.c_str(), &stop);
  if (stop == s.c_str() + s.size() && std::isfinite(d)) return d;
  return s;
}

Json NodeToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Scalar:
      return ScalarToJson(node);
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (const auto& item : node) out.push_back(NodeToJson(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = NodeToJson(kv.second);
      return out;
    }
    default:
      return nullptr;
  }
}

Json SchemaOf(const Json& value) {
  if (value.is_object()) {
    Json props = Json::object();
    for (const auto& [key, child] : value.items()) props[key] = SchemaOf(child);
    return Json{{"type", "object"}, {"additionalProperties", false},
                {"properties", props}};
  }
  if (value.is_array()) {
    Json s{{"type", "array"}};
    if (!value.empty()) s["items"] = SchemaOf(value.front());
    s["default"] = value;
    return s;
  }
  return Json{{"type", std::string(TypeName(value))}, {"default", value}};
}

}  // namespace

std::string_view ExperimentKindName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kProtocolGap:
      return "protocol_gap";
    case ExperimentKind::kDmProperties:
      return "dm_properties";
    case ExperimentKind::kDpSgdTable:
      return "dpsgd_table";
    case ExperimentKind::kEpsEstimation:
      return "eps_estimation";
    case ExperimentKind::kAudit:
      return "audit";
    case ExperimentKind::kEmCheck:
      return "em_check";
  }
  return "unknown";
}

absl::StatusOr<ExperimentKind> ParseExperimentKind(std::string_view name) {
  for (ExperimentKind kind : kAllExperiments) {
    if (ExperimentKindName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown experiment `", std::string(name), "`"));
}

ExperimentConfig DefaultConfig(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kProtocolGap:
      c.universe = {.n = 2000, .dim = 8};
      c.pipeline.condense = attack::CondenseStep::kRandomSubset;
      c.pipeline.r_ipc = 0.02;
      c.pipeline.learner = attack::LearnerStep::kMemorizing;
      break;
    case ExperimentKind::kDmProperties:
      c.universe = {.n = 200, .dim = 6, .num_classes = 3, .separation = 5.0};
      break;
    case ExperimentKind::kDpSgdTable:
      c.universe = {.n = 1000, .dim = 8, .separation = 2.0};
      c.dpsgd_table.rows = DefaultTableRows();
      break;
    case ExperimentKind::kEpsEstimation:
    case ExperimentKind::kEmCheck:
      break;
    case ExperimentKind::kAudit:
      c.universe = {.n = 200, .dim = 4};
      c.audit.pipelines = DefaultAuditPipelines();
      break;
  }
  return c;
}

nlohmann::ordered_json ConfigToJson(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = std::string(ExperimentKindName(c.kind));
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out"] = c.out;
  if (UsesUniverse(c.kind)) j["universe"] = UniverseToJson(c.universe);
  switch (c.kind) {
    case ExperimentKind::kProtocolGap: {
      const auto& p = c.protocol_gap;
      j["pipeline"] = attack::PipelineToJson(c.pipeline);
      j["protocol_gap"] = {{"sampling_rate", p.sampling_rate},
                           {"seeds", p.seeds},
                           {"scorer", p.scorer},
                           {"shadows", p.shadows},
                           {"confidence", p.confidence}};
      break;
    }
    case ExperimentKind::kDmProperties: {
      const auto& p = c.dm_properties;
      j["dm_properties"] = {{"pairs", p.pairs},
                            {"t_size", p.t_size},
                            {"condensed_size", p.condensed_size},
                            {"tolerance", p.tolerance}};
      break;
    }
    case ExperimentKind::kDpSgdTable: {
      const auto& p = c.dpsgd_table;
      Json rows = Json::array();
      for (const auto& r : p.rows) rows.push_back(NamedPipelineToJson(r));
      j["dpsgd_table"] = {{"sampling_rate", p.sampling_rate},
                          {"seeds", p.seeds},
                          {"rows", rows}};
      break;
    }
    case ExperimentKind::kEpsEstimation: {
      const auto& p = c.eps_estimation;
      j["eps_estimation"] = {{"epsilon", p.epsilon},
                             {"observations", p.observations},
                             {"repeats", p.repeats},
                             {"confidence", p.confidence},
                             {"subgroup_n", p.subgroup_n},
                             {"subgroup_fraction", p.subgroup_fraction}};
      break;
    }
    case ExperimentKind::kAudit: {
      const auto& p = c.audit;
      Json pipelines = Json::array();
      for (const auto& r : p.pipelines) pipelines.push_back(NamedPipelineToJson(r));
      j["audit"] = {{"target_class", p.target_class},
                    {"canary_distance", p.canary_distance},
                    {"trials_per_side", p.trials_per_side},
                    {"calibration_per_side", p.calibration_per_side},
                    {"distinguisher", p.distinguisher},
                    {"confidence", p.confidence},
                    {"pipelines", pipelines}};
      break;
    }
    case ExperimentKind::kEmCheck: {
      const auto& p = c.em_check;
      j["em_check"] = {{"values", p.values},
                       {"thetas", p.thetas},
                       {"max_size", p.max_size},
                       {"loss_lo", p.loss_lo},
                       {"loss_hi", p.loss_hi}};
      break;
    }
  }
  return j;
}

nlohmann::ordered_json DefaultConfigJson(ExperimentKind kind) {
  return ConfigToJson(DefaultConfig(kind));
}

absl::StatusOr<ExperimentConfig> ConfigFromJson(ExperimentKind kind,
                                                const nlohmann::ordered_json& j) {
  const Json schema = DefaultConfigJson(kind);
  if (j.is_null()) return DefaultConfig(kind);
  RETURN_IF_ERROR(CheckAgainst(schema, j, ""));
  if (j.contains("experiment") &&
      j.at("experiment").get<std::string>() != ExperimentKindName(kind)) {
    return ConfigError("experiment",
                       absl::StrCat("names `", j.at("experiment").get<std::string>(),
                                    "` but `", std::string(ExperimentKindName(kind)),
                                    "` was requested"));
  }
  Json merged = schema;
  Merge(merged, j);

  ExperimentConfig c = DefaultConfig(kind);
  if (merged.at("seed").is_number_integer() && !merged.at("seed").is_number_unsigned() &&
      merged.at("seed").get<int64_t>() < 0) {
    return ConfigError("seed", "must be non-negative");
  }
  c.seed = merged.at("seed").get<uint64_t>();
  c.jobs = merged.at("jobs").get<int>();
  c.out = merged.at("out").get<std::string>();
  if (c.jobs < 1) return ConfigError("jobs", "must be positive");
  if (UsesUniverse(kind)) {
    const Json& u = merged.at("universe");
    c.universe.n = u.at("n").get<int>();
    c.universe.dim = u.at("dim").get<int>();
    c.universe.num_classes = u.at("num_classes").get<int>();
    c.universe.separation = u.at("separation").get<double>();
    c.universe.noise = u.at("noise").get<double>();
    RETURN_IF_ERROR(ValidateUniverse(c.universe));
  }
  RETURN_IF_ERROR(ReadSection(merged, c));
  return c;
}

absl::StatusOr<nlohmann::ordered_json> YamlToJson(std::string_view yaml) {
  try {
    return NodeToJson(YAML::Load(std::string(yaml)));
  } catch (const YAML::Exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config is not valid YAML: ", e.what()));
  }
}

absl::StatusOr<ExperimentConfig> LoadConfigFile(ExperimentKind kind,
                                                const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::InvalidArgumentError(absl::StrCat("cannot read config ", path));
  std::stringstream text;
  text << in.rdbuf();
  ASSIGN_OR_RETURN(Json j, YamlToJson(text.str()));
  auto config = ConfigFromJson(kind, j);
  if (!config.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", config.status().message()));
  }
  return config;
}

absl::Status ApplyTrialsOverride(ExperimentConfig& config, int trials) {
  if (trials < 1) return absl::InvalidArgumentError("--trials must be positive");
  switch (config.kind) {
    case ExperimentKind::kProtocolGap:
      config.protocol_gap.seeds = trials;
      break;
    case ExperimentKind::kDmProperties:
      config.dm_properties.pairs = trials;
      break;
    case ExperimentKind::kDpSgdTable:
      config.dpsgd_table.seeds = trials;
      break;
    case ExperimentKind::kEpsEstimation:
      config.eps_estimation.repeats = trials;
      break;
    case ExperimentKind::kAudit:
      if (trials < 20) {
        return absl::InvalidArgumentError("audit needs --trials of at least 20");
      }
      config.audit.trials_per_side = trials;
      if (config.audit.calibration_per_side >= trials) {
        config.audit.calibration_per_side = 0;
      }
      break;
    case ExperimentKind::kEmCheck:
      return absl::InvalidArgumentError("em_check is exhaustive and takes no --trials");
  }
  return absl::OkStatus();
}

nlohmann::ordered_json SchemaJson() {
  Json out;
  out["title"] = "privaudit experiment configuration";
  out["version"] = "privaudit-config/1";
  Json kinds = Json::object();
  for (ExperimentKind kind : kAllExperiments) {
    kinds[std::string(ExperimentKindName(kind))] = SchemaOf(DefaultConfigJson(kind));
  }
  out["experiments"] = kinds;
  return out;
}

}  // namespace privaudit::cli
