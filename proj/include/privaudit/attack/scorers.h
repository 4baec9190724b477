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

#ifndef PRIVAUDIT_ATTACK_SCORERS_H_
#define PRIVAUDIT_ATTACK_SCORERS_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "privaudit/attack/pipeline.h"
#include "privaudit/data/membership.h"
#include "privaudit/data/universe.h"
#include "privaudit/learners/model.h"

namespace privaudit::attack {

// One score per universe example, in universe order. Higher means more
// member-like.
struct ScoreSet {
  std::vector<data::ExampleId> ids;
  std::vector<double> scores;
  std::string scorer;
  learners::TrainingProvenance target;
};

// score = -loss(x).
absl::StatusOr<ScoreSet> ScoreLossThreshold(const learners::ModelArtifact& model,
                                            const data::Universe& universe);

struct ShadowModel {
  data::MembershipChallenge challenge;
  learners::ModelArtifact model;
};

struct ShadowEnsemble {
  std::vector<ShadowModel> shadows;
};

struct ShadowOptions {
  int count = 8;
  double sampling_rate = 0.5;
  // Fresh challenge draws allowed until every example is IN for at least one
  // shadow and OUT for at least one.
  int max_retries = 100;
  int jobs = 1;
};

// Shadow j draws its challenge and pipeline seed from (seed, j). The result
// does not depend on `jobs`.
absl::StatusOr<ShadowEnsemble> TrainShadows(const data::Universe& universe,
                                            const PipelineSpec& pipeline,
                                            const ShadowOptions& options,
                                            uint64_t seed);

// Trains one shadow per given challenge; fails if coverage does not hold.
absl::StatusOr<ShadowEnsemble> TrainShadowsOnChallenges(
    const data::Universe& universe, const PipelineSpec& pipeline,
    std::vector<data::MembershipChallenge> challenges, uint64_t seed,
    int jobs = 1);

bool CoversEveryExample(const std::vector<data::MembershipChallenge>& challenges,
                        size_t universe_size);

struct LiraOptions {
  double variance_floor = 1e-6;
  double confidence_clamp = 1e-9;
};

// log(p / (1 - p)) of the true-class confidence, p clamped to
// [clamp, 1 - clamp].
double LogitConfidence(double p, double clamp);

// Per example, Gaussians are fit to the shadow logit confidences with the
// example IN and OUT; the score is the log-likelihood ratio of the target's
// value under the IN fit versus the OUT fit.
absl::StatusOr<ScoreSet> ScoreLira(const learners::ModelArtifact& target,
                                   const data::Universe& universe,
                                   const ShadowEnsemble& shadows,
                                   const LiraOptions& options = {});

// Header "id,score,member_bit".
absl::Status WriteScoresCsv(const ScoreSet& scores,
                            const std::vector<bool>& member_bits,
                            std::ostream& out);

}  // namespace privaudit::attack

#endif  // PRIVAUDIT_ATTACK_SCORERS_H_
