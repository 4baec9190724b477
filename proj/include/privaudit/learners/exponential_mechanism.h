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

// Exponential mechanism over a finite set of candidate models: candidate j is
// released with probability proportional to exp(-sum_i loss(theta_j, x_i)).
// With per-example losses confined to [lo, hi] this is
// 2 * (hi - lo)-differentially private under add/remove-one neighbours.

#ifndef PRIVAUDIT_LEARNERS_EXPONENTIAL_MECHANISM_H_
#define PRIVAUDIT_LEARNERS_EXPONENTIAL_MECHANISM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"
#include "privaudit/learners/model.h"

namespace privaudit::learners {

struct LossSpec {
  // Unclamped losses have unbounded sensitivity; the mechanism still runs
  // but carries no guarantee.
  bool clamp = true;
  double lo = 0.0;
  double hi = 1.0;
};

absl::StatusOr<double> BoundedLoss(const ModelArtifact& model,
                                   std::span<const double> x, int label,
                                   const LossSpec& loss);

// Normalized log-probabilities of each candidate.
absl::StatusOr<std::vector<double>> ExponentialMechanismLogProbabilities(
    std::span<const ModelArtifact> candidates, const LossSpec& loss,
    const data::Dataset& dataset);

// Index of the released candidate; deterministic in seed.
absl::StatusOr<size_t> SampleExponentialMechanism(
    std::span<const ModelArtifact> candidates, const LossSpec& loss,
    const data::Dataset& dataset, uint64_t seed);

// Candidates with i.i.d. N(0, scale^2) parameters for `arch`.
std::vector<ModelArtifact> RandomParameterGrid(const Architecture& arch,
                                               int count, double scale,
                                               uint64_t seed);

}  // namespace privaudit::learners

#endif  // PRIVAUDIT_LEARNERS_EXPONENTIAL_MECHANISM_H_
