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

#ifndef PRIVAUDIT_LEARNERS_TRAINERS_H_
#define PRIVAUDIT_LEARNERS_TRAINERS_H_

#include <cstdint>
#include <optional>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"
#include "privaudit/learners/model.h"

namespace privaudit::learners {

// Training failures are kInternal statuses carrying the 0-based step at
// which the loss or a gradient became non-finite under this payload key.
inline constexpr char kStepPayloadKey[] = "privaudit/step";
std::optional<int64_t> FailedStep(const absl::Status& status);

struct SgdHyper {
  ModelKind model = ModelKind::kLogistic;  // kLogistic or kMlp
  int hidden = 32;
  double learning_rate = 0.5;
  int epochs = 50;
  // Examples per step. A batch at least as large as the dataset means
  // full-batch gradient descent over the examples in their stored order.
  int batch_size = 32;
};

// Mini-batch SGD on mean cross-entropy. epochs == 0 returns the
// initialization. Deterministic in (dataset, hyper, seed).
absl::StatusOr<ModelArtifact> TrainSgd(const data::Dataset& train,
                                       const SgdHyper& hyper, uint64_t seed);

struct DpSgdHyper {
  ModelKind model = ModelKind::kLogistic;
  int hidden = 32;
  double learning_rate = 0.5;
  // Per-example gradients are scaled to L2 norm at most clip_norm when
  // `clip` is set.
  bool clip = true;
  double clip_norm = 1.0;
  double noise_multiplier = 1.0;
  double sample_rate = 0.01;  // Poisson sampling probability q
  int64_t steps = 100;
  double delta = 1e-5;
  double vacuous_threshold = accountant::kDefaultVacuousEpsilon;
};

// DP-SGD: Poisson batches, per-example clipping, Gaussian noise of standard
// deviation noise_multiplier * clip_norm on the summed gradient, divided by
// the expected batch size. The returned artifact carries the accountant's
// budget for (sample_rate, noise_multiplier, steps, delta).
//
// With noise_multiplier = 0, clip = false and sample_rate = 1 the update
// sequence is exactly TrainSgd's full-batch sequence with epochs = steps.
absl::StatusOr<ModelArtifact> TrainDpSgd(const data::Dataset& train,
                                         const DpSgdHyper& hyper,
                                         uint64_t seed);

struct MemorizingHyper {
  // Softmax temperature for confidences; <= 0 selects the data dimension.
  double bandwidth = 0.0;
};

absl::StatusOr<ModelArtifact> TrainMemorizing(const data::Dataset& train,
                                              const MemorizingHyper& hyper,
                                              uint64_t seed);

}  // namespace privaudit::learners

#endif  // PRIVAUDIT_LEARNERS_TRAINERS_H_
