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

#ifndef PRIVAUDIT_ATTACK_PIPELINE_H_
#define PRIVAUDIT_ATTACK_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "privaudit/condense/condense.h"
#include "privaudit/data/dataset.h"
#include "privaudit/learners/model.h"
#include "privaudit/learners/trainers.h"

namespace privaudit::attack {

enum class CondenseStep { kNone, kRandomSubset, kDmLinear };

enum class LearnerStep {
  kSgd,
  kDpSgd,
  kMemorizing,
  // Returns the untrained initialization: the released model does not
  // depend on the data at all.
  kFixed,
};

std::string_view CondenseStepName(CondenseStep step);
std::string_view LearnerStepName(LearnerStep step);

// Everything the defender does to a training set T: optional condensation
// into S followed by a learner trained on S (or on T directly).
struct PipelineSpec {
  CondenseStep condense = CondenseStep::kNone;
  double r_ipc = 0.01;
  bool stratified = false;
  condense::InitKind dm_init = condense::InitKind::kGaussianCentered;

  LearnerStep learner = LearnerStep::kMemorizing;
  learners::SgdHyper sgd;
  learners::DpSgdHyper dpsgd;
  learners::MemorizingHyper memorizing;

  absl::Status Validate() const;
};

nlohmann::ordered_json PipelineToJson(const PipelineSpec& spec);
// Rejects unknown keys; missing keys keep their defaults.
absl::StatusOr<PipelineSpec> PipelineFromJson(const nlohmann::ordered_json& j);

struct PipelineRun {
  // Set when the pipeline condenses; the learner was trained on it.
  std::optional<condense::CondensedDataset> condensed;
  learners::ModelArtifact model;
};

// Deterministic in (spec, t, seed).
absl::StatusOr<PipelineRun> RunPipeline(const PipelineSpec& spec,
                                        const data::Dataset& t, uint64_t seed);

}  // namespace privaudit::attack

#endif  // PRIVAUDIT_ATTACK_PIPELINE_H_
