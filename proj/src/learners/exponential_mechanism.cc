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

#include "privaudit/learners/exponential_mechanism.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "privaudit/common/numeric.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::learners {
namespace {

constexpr uint64_t kSampleStream = 31;
constexpr uint64_t kGridStream = 32;

}  // namespace

absl::StatusOr<double> BoundedLoss(const ModelArtifact& model,
                                   std::span<const double> x, int label,
                                   const LossSpec& loss) {
  if (loss.clamp && !(loss.lo <= loss.hi)) {
    return absl::InvalidArgumentError("loss bounds need lo <= hi");
  }
  ASSIGN_OR_RETURN(Prediction p, EvaluateOne(model, x, label));
  return loss.clamp ? std::clamp(p.loss, loss.lo, loss.hi) : p.loss;
}

absl::StatusOr<std::vector<double>> ExponentialMechanismLogProbabilities(
    std::span<const ModelArtifact> candidates, const LossSpec& loss,
    const data::Dataset& dataset) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("no candidate models");
  }
  std::vector<double> log_weight(candidates.size());
  for (size_t j = 0; j < candidates.size(); ++j) {
    ExactAccumulator total;
    for (size_t i = 0; i < dataset.size(); ++i) {
      ASSIGN_OR_RETURN(double l, BoundedLoss(candidates[j], dataset.features(i),
                                             dataset.label(i), loss));
      total.Add(l);
    }
    log_weight[j] = -total.Sum();
  }
  const double normalizer = LogSumExp(log_weight);
  for (double& w : log_weight) w -= normalizer;
  return log_weight;
}

absl::StatusOr<size_t> SampleExponentialMechanism(
    std::span<const ModelArtifact> candidates, const LossSpec& loss,
    const data::Dataset& dataset, uint64_t seed) {
  ASSIGN_OR_RETURN(auto log_p,
                   ExponentialMechanismLogProbabilities(candidates, loss, dataset));
  const double u = UnitInterval(DeriveSeed(seed, kSampleStream));
  double cumulative = 0.0;
  for (size_t j = 0; j < log_p.size(); ++j) {
    cumulative += std::exp(log_p[j]);
    if (u < cumulative) return j;
  }
  return log_p.size() - 1;
}

std::vector<ModelArtifact> RandomParameterGrid(const Architecture& arch,
                                               int count, double scale,
                                               uint64_t seed) {
  std::vector<ModelArtifact> grid(std::max(count, 0));
  std::normal_distribution<double> normal(0.0, scale);
  for (int j = 0; j < count; ++j) {
    Rng rng(DeriveSeed(seed, kGridStream, j));
    normal.reset();
    grid[j].arch = arch;
    grid[j].params.resize(arch.ParameterCount());
    for (double& v : grid[j].params) v = normal(rng);
    grid[j].provenance.trainer = "grid";
    grid[j].provenance.seed = seed;
  }
  return grid;
}

}  // namespace privaudit::learners
