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

#include "privaudit/attack/pipeline.h"

#include <algorithm>
#include <string>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::attack {
namespace {

enum Stream : uint64_t { kCondense = 41, kTrain = 42 };

using Json = nlohmann::ordered_json;

absl::StatusOr<CondenseStep> ParseCondenseStep(std::string_view name) {
  if (name == "none") return CondenseStep::kNone;
  if (name == "random_subset") return CondenseStep::kRandomSubset;
  if (name == "dm_linear") return CondenseStep::kDmLinear;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown condensation `", std::string(name), "`"));
}

absl::StatusOr<LearnerStep> ParseLearnerStep(std::string_view name) {
  if (name == "sgd") return LearnerStep::kSgd;
  if (name == "dpsgd") return LearnerStep::kDpSgd;
  if (name == "memorizing") return LearnerStep::kMemorizing;
  if (name == "fixed") return LearnerStep::kFixed;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown learner `", std::string(name), "`"));
}

absl::Status CheckKeys(const Json& j, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(where), " must be an object"));
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown key `", key, "` in ", std::string(where)));
    }
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status Read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return absl::OkStatus();
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad value for `", key, "`: ", e.what()));
  }
  return absl::OkStatus();
}

absl::Status ReadModelKind(const Json& j, learners::ModelKind& out) {
  std::string name(learners::ModelKindName(out));
  RETURN_IF_ERROR(Read(j, "model", name));
  ASSIGN_OR_RETURN(out, learners::ParseModelKind(name));
  return absl::OkStatus();
}

}  // namespace

std::string_view CondenseStepName(CondenseStep step) {
  switch (step) {
    case CondenseStep::kNone:
      return "none";
    case CondenseStep::kRandomSubset:
      return "random_subset";
    case CondenseStep::kDmLinear:
      return "dm_linear";
  }
  return "unknown";
}

std::string_view LearnerStepName(LearnerStep step) {
  switch (step) {
    case LearnerStep::kSgd:
      return "sgd";
    case LearnerStep::kDpSgd:
      return "dpsgd";
    case LearnerStep::kMemorizing:
      return "memorizing";
    case LearnerStep::kFixed:
      return "fixed";
  }
  return "unknown";
}

absl::Status PipelineSpec::Validate() const {
  if (condense != CondenseStep::kNone && !(r_ipc > 0.0 && r_ipc <= 1.0)) {
    return absl::InvalidArgumentError("r_ipc must lie in (0, 1]");
  }
  if (learner == LearnerStep::kDpSgd && condense != CondenseStep::kNone) {
    return absl::InvalidArgumentError(
        "dpsgd is audited directly on the training set; condensation before "
        "it would change what the accountant's budget refers to");
  }
  if ((learner == LearnerStep::kSgd || learner == LearnerStep::kFixed) &&
      sgd.model == learners::ModelKind::kMemorizing) {
    return absl::InvalidArgumentError("sgd model must be logistic or mlp");
  }
  if (learner == LearnerStep::kDpSgd &&
      dpsgd.model == learners::ModelKind::kMemorizing) {
    return absl::InvalidArgumentError("dpsgd model must be logistic or mlp");
  }
  return absl::OkStatus();
}

nlohmann::ordered_json PipelineToJson(const PipelineSpec& spec) {
  Json j;
  j["condense"] = std::string(CondenseStepName(spec.condense));
  j["r_ipc"] = spec.r_ipc;
  j["stratified"] = spec.stratified;
  j["dm_init"] = std::string(condense::InitKindName(spec.dm_init));
  j["learner"] = std::string(LearnerStepName(spec.learner));
  j["sgd"] = {{"model", std::string(learners::ModelKindName(spec.sgd.model))},
              {"hidden", spec.sgd.hidden},
              {"learning_rate", spec.sgd.learning_rate},
              {"epochs", spec.sgd.epochs},
              {"batch_size", spec.sgd.batch_size}};
  j["dpsgd"] = {
      {"model", std::string(learners::ModelKindName(spec.dpsgd.model))},
      {"hidden", spec.dpsgd.hidden},
      {"learning_rate", spec.dpsgd.learning_rate},
      {"clip", spec.dpsgd.clip},
      {"clip_norm", spec.dpsgd.clip_norm},
      {"noise_multiplier", spec.dpsgd.noise_multiplier},
      {"sample_rate", spec.dpsgd.sample_rate},
      {"steps", spec.dpsgd.steps},
      {"delta", spec.dpsgd.delta},
      {"vacuous_threshold", spec.dpsgd.vacuous_threshold}};
  j["memorizing"] = {{"bandwidth", spec.memorizing.bandwidth}};
  return j;
}

absl::StatusOr<PipelineSpec> PipelineFromJson(const nlohmann::ordered_json& j) {
  RETURN_IF_ERROR(CheckKeys(j, "pipeline",
                            {"condense", "r_ipc", "stratified", "dm_init",
                             "learner", "sgd", "dpsgd", "memorizing"}));
  PipelineSpec spec;
  std::string name(CondenseStepName(spec.condense));
  RETURN_IF_ERROR(Read(j, "condense", name));
  ASSIGN_OR_RETURN(spec.condense, ParseCondenseStep(name));
  RETURN_IF_ERROR(Read(j, "r_ipc", spec.r_ipc));
  RETURN_IF_ERROR(Read(j, "stratified", spec.stratified));
  name = std::string(condense::InitKindName(spec.dm_init));
  RETURN_IF_ERROR(Read(j, "dm_init", name));
  ASSIGN_OR_RETURN(spec.dm_init, condense::ParseInitKind(name));
  name = std::string(LearnerStepName(spec.learner));
  RETURN_IF_ERROR(Read(j, "learner", name));
  ASSIGN_OR_RETURN(spec.learner, ParseLearnerStep(name));

  if (j.contains("sgd")) {
    const Json& s = j.at("sgd");
    RETURN_IF_ERROR(CheckKeys(s, "pipeline.sgd",
                              {"model", "hidden", "learning_rate", "epochs",
                               "batch_size"}));
    RETURN_IF_ERROR(ReadModelKind(s, spec.sgd.model));
    RETURN_IF_ERROR(Read(s, "hidden", spec.sgd.hidden));
    RETURN_IF_ERROR(Read(s, "learning_rate", spec.sgd.learning_rate));
    RETURN_IF_ERROR(Read(s, "epochs", spec.sgd.epochs));
    RETURN_IF_ERROR(Read(s, "batch_size", spec.sgd.batch_size));
  }
  if (j.contains("dpsgd")) {
    const Json& s = j.at("dpsgd");
    RETURN_IF_ERROR(CheckKeys(
        s, "pipeline.dpsgd",
        {"model", "hidden", "learning_rate", "clip", "clip_norm",
         "noise_multiplier", "sample_rate", "steps", "delta",
         "vacuous_threshold"}));
    RETURN_IF_ERROR(ReadModelKind(s, spec.dpsgd.model));
    RETURN_IF_ERROR(Read(s, "hidden", spec.dpsgd.hidden));
    RETURN_IF_ERROR(Read(s, "learning_rate", spec.dpsgd.learning_rate));
    RETURN_IF_ERROR(Read(s, "clip", spec.dpsgd.clip));
    RETURN_IF_ERROR(Read(s, "clip_norm", spec.dpsgd.clip_norm));
    RETURN_IF_ERROR(Read(s, "noise_multiplier", spec.dpsgd.noise_multiplier));
    RETURN_IF_ERROR(Read(s, "sample_rate", spec.dpsgd.sample_rate));
    RETURN_IF_ERROR(Read(s, "steps", spec.dpsgd.steps));
    RETURN_IF_ERROR(Read(s, "delta", spec.dpsgd.delta));
    RETURN_IF_ERROR(Read(s, "vacuous_threshold", spec.dpsgd.vacuous_threshold));
  }
  if (j.contains("memorizing")) {
    const Json& s = j.at("memorizing");
    RETURN_IF_ERROR(CheckKeys(s, "pipeline.memorizing", {"bandwidth"}));
    RETURN_IF_ERROR(Read(s, "bandwidth", spec.memorizing.bandwidth));
  }
  RETURN_IF_ERROR(spec.Validate());
  return spec;
}

absl::StatusOr<PipelineRun> RunPipeline(const PipelineSpec& spec,
                                        const data::Dataset& t, uint64_t seed) {
  RETURN_IF_ERROR(spec.Validate());
  if (t.empty()) return absl::InvalidArgumentError("empty training set");
  PipelineRun run;
  const uint64_t condense_seed = DeriveSeed(seed, kCondense);
  switch (spec.condense) {
    case CondenseStep::kNone:
      break;
    case CondenseStep::kRandomSubset: {
      ASSIGN_OR_RETURN(run.condensed,
                       condense::CondenseRandomSubset(t, spec.r_ipc,
                                                      spec.stratified,
                                                      condense_seed));
      break;
    }
    case CondenseStep::kDmLinear: {
      const int m = std::max(2, condense::CondensedSize(spec.r_ipc, t.size()));
      condense::DmInit init;
      if (spec.dm_init == condense::InitKind::kGaussianCentered) {
        ASSIGN_OR_RETURN(init, condense::InitGaussianCentered(
                                   m, t.dim(), condense_seed, t.num_classes()));
      } else {
        ASSIGN_OR_RETURN(init, condense::InitSubsetOfT(t, m, condense_seed));
      }
      ASSIGN_OR_RETURN(run.condensed, condense::CondenseDmLinear(init, t));
      break;
    }
  }
  const data::Dataset& train = run.condensed ? run.condensed->examples : t;
  const uint64_t train_seed = DeriveSeed(seed, kTrain);
  switch (spec.learner) {
    case LearnerStep::kSgd: {
      ASSIGN_OR_RETURN(run.model, learners::TrainSgd(train, spec.sgd, train_seed));
      break;
    }
    case LearnerStep::kDpSgd: {
      ASSIGN_OR_RETURN(run.model,
                       learners::TrainDpSgd(train, spec.dpsgd, train_seed));
      break;
    }
    case LearnerStep::kMemorizing: {
      ASSIGN_OR_RETURN(run.model, learners::TrainMemorizing(
                                      train, spec.memorizing, train_seed));
      break;
    }
    case LearnerStep::kFixed: {
      learners::SgdHyper fixed = spec.sgd;
      fixed.epochs = 0;
      ASSIGN_OR_RETURN(run.model, learners::TrainSgd(train, fixed, train_seed));
      run.model.provenance.trainer = "fixed";
      break;
    }
  }
  return run;
}

}  // namespace privaudit::attack
