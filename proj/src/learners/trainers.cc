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

#include "privaudit/learners/trainers.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::learners {
namespace {

enum Stream : uint64_t { kInit = 21, kBatches = 22, kNoise = 23 };

absl::Status StepFailure(int64_t step, std::string_view what) {
  absl::Status status = absl::InternalError(
      absl::StrCat("training diverged at step ", step, ": ", std::string(what)));
  status.SetPayload(kStepPayloadKey, absl::Cord(std::to_string(step)));
  return status;
}

absl::Status CheckTrainable(const data::Dataset& train, ModelKind kind,
                            int hidden) {
  if (train.empty()) return absl::InvalidArgumentError("empty training set");
  if (kind == ModelKind::kMemorizing) {
    return absl::InvalidArgumentError(
        "gradient trainers need a parametric model (logistic or mlp)");
  }
  if (kind == ModelKind::kMlp && hidden < 1) {
    return absl::InvalidArgumentError("mlp needs at least one hidden unit");
  }
  return absl::OkStatus();
}

Architecture MakeArchitecture(const data::Dataset& train, ModelKind kind,
                              int hidden) {
  Architecture arch;
  arch.kind = kind;
  arch.dim = static_cast<int>(train.dim());
  arch.num_classes = train.num_classes();
  arch.hidden = kind == ModelKind::kMlp ? hidden : 0;
  return arch;
}

bool AllFinite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

// theta -= lr * (sum / denominator), shared by both gradient trainers so
// that their update arithmetic is identical.
void ApplyUpdate(std::vector<double>& theta, const std::vector<double>& sum,
                 double learning_rate, double denominator) {
  for (size_t k = 0; k < theta.size(); ++k) {
    theta[k] -= learning_rate * (sum[k] / denominator);
  }
}

TrainingProvenance Provenance(std::string trainer, const data::Dataset& train,
                              uint64_t seed) {
  TrainingProvenance p;
  p.trainer = std::move(trainer);
  p.seed = seed;
  p.dataset_fingerprint = train.Fingerprint();
  p.dataset_size = train.size();
  return p;
}

}  // namespace

std::optional<int64_t> FailedStep(const absl::Status& status) {
  auto payload = status.GetPayload(kStepPayloadKey);
  if (!payload.has_value()) return std::nullopt;
  return std::stoll(std::string(*payload));
}

absl::StatusOr<ModelArtifact> TrainSgd(const data::Dataset& train,
                                       const SgdHyper& hyper, uint64_t seed) {
  RETURN_IF_ERROR(CheckTrainable(train, hyper.model, hyper.hidden));
  if (hyper.epochs < 0 || hyper.batch_size < 1 ||
      !(hyper.learning_rate > 0.0)) {
    return absl::InvalidArgumentError(
        "sgd needs epochs >= 0, batch_size >= 1 and learning_rate > 0");
  }
  ModelArtifact model;
  model.arch = MakeArchitecture(train, hyper.model, hyper.hidden);
  model.params = InitialParameters(model.arch, DeriveSeed(seed, kInit));
  model.provenance = Provenance("sgd", train, seed);
  model.provenance.hyperparameters = {
      {"model", std::string(ModelKindName(hyper.model))},
      {"hidden", model.arch.hidden},
      {"learning_rate", hyper.learning_rate},
      {"epochs", hyper.epochs},
      {"batch_size", hyper.batch_size}};

  const size_t n = train.size();
  const size_t batch = std::min<size_t>(hyper.batch_size, n);
  Rng rng(DeriveSeed(seed, kBatches));
  std::vector<size_t> order(n);
  std::vector<double> sum(model.params.size());
  std::vector<double> grad;
  int64_t step = 0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < n; start += batch, ++step) {
      const size_t end = std::min(n, start + batch);
      std::fill(sum.begin(), sum.end(), 0.0);
      double loss = 0.0;
      for (size_t b = start; b < end; ++b) {
        const size_t i = order[b];
        loss += LossAndGradient(model.arch, model.params, train.features(i),
                                train.label(i), grad);
        for (size_t k = 0; k < sum.size(); ++k) sum[k] += grad[k];
      }
      if (!std::isfinite(loss) || !AllFinite(sum)) {
        return StepFailure(step, "non-finite loss or gradient");
      }
      const double count = static_cast<double>(end - start);
      ApplyUpdate(model.params, sum, hyper.learning_rate, count);
      model.stats.final_loss = loss / count;
    }
  }
  model.stats.steps = step;
  return model;
}

absl::StatusOr<ModelArtifact> TrainDpSgd(const data::Dataset& train,
                                         const DpSgdHyper& hyper,
                                         uint64_t seed) {
  RETURN_IF_ERROR(CheckTrainable(train, hyper.model, hyper.hidden));
  if (!(hyper.sample_rate > 0.0 && hyper.sample_rate <= 1.0)) {
    return absl::InvalidArgumentError("sample_rate must lie in (0, 1]");
  }
  if (hyper.steps < 0 || !(hyper.noise_multiplier >= 0.0) ||
      !(hyper.learning_rate > 0.0)) {
    return absl::InvalidArgumentError(
        "dp-sgd needs steps >= 0, noise_multiplier >= 0, learning_rate > 0");
  }
  if (hyper.clip && !(hyper.clip_norm > 0.0)) {
    return absl::InvalidArgumentError("clip_norm must be positive");
  }
  if (!(hyper.delta > 0.0 && hyper.delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }

  ModelArtifact model;
  model.arch = MakeArchitecture(train, hyper.model, hyper.hidden);
  model.params = InitialParameters(model.arch, DeriveSeed(seed, kInit));
  model.provenance = Provenance("dpsgd", train, seed);
  model.provenance.hyperparameters = {
      {"model", std::string(ModelKindName(hyper.model))},
      {"hidden", model.arch.hidden},
      {"learning_rate", hyper.learning_rate},
      {"clip", hyper.clip},
      {"clip_norm", hyper.clip_norm},
      {"noise_multiplier", hyper.noise_multiplier},
      {"sample_rate", hyper.sample_rate},
      {"steps", hyper.steps},
      {"delta", hyper.delta}};

  const size_t n = train.size();
  const double denominator = hyper.sample_rate * static_cast<double>(n);
  const double noise_sd = hyper.noise_multiplier * hyper.clip_norm;
  Rng batch_rng(DeriveSeed(seed, kBatches));
  Rng noise_rng(DeriveSeed(seed, kNoise));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> sum(model.params.size());
  std::vector<double> grad;
  double max_norm = 0.0;
  for (int64_t step = 0; step < hyper.steps; ++step) {
    std::fill(sum.begin(), sum.end(), 0.0);
    double loss = 0.0;
    size_t batch = 0;
    for (size_t i = 0; i < n; ++i) {
      if (hyper.sample_rate < 1.0 && !(UnitInterval(batch_rng()) < hyper.sample_rate)) {
        continue;
      }
      ++batch;
      loss += LossAndGradient(model.arch, model.params, train.features(i),
                              train.label(i), grad);
      if (hyper.clip) {
        const double norm = L2Norm(grad);
        if (norm > hyper.clip_norm) {
          const double scale = hyper.clip_norm / norm;
          for (double& g : grad) g *= scale;
        }
        const double clipped = L2Norm(grad);
        if (clipped > hyper.clip_norm * (1.0 + 1e-12)) {
          return absl::InternalError(absl::StrCat(
              "clipped gradient norm ", clipped, " exceeds clip_norm ",
              hyper.clip_norm, " at step ", step));
        }
        max_norm = std::max(max_norm, clipped);
      } else {
        max_norm = std::max(max_norm, L2Norm(grad));
      }
      for (size_t k = 0; k < sum.size(); ++k) sum[k] += grad[k];
    }
    if (noise_sd > 0.0) {
      for (double& s : sum) s += noise_sd * normal(noise_rng);
    }
    if (!std::isfinite(loss) || !AllFinite(sum)) {
      return StepFailure(step, "non-finite loss or gradient");
    }
    ApplyUpdate(model.params, sum, hyper.learning_rate, denominator);
    if (batch > 0) model.stats.final_loss = loss / static_cast<double>(batch);
  }
  model.stats.steps = hyper.steps;
  model.stats.max_clipped_norm = max_norm;

  // Without clipping the per-example sensitivity is unbounded, so the run
  // has no finite guarantee whatever the noise level.
  const double accounted_sigma = hyper.clip ? hyper.noise_multiplier : 0.0;
  if (hyper.steps > 0) {
    ASSIGN_OR_RETURN(model.budget,
                     accountant::DpSgdBudget(hyper.sample_rate, accounted_sigma,
                                             hyper.steps, hyper.delta,
                                             hyper.vacuous_threshold));
  }
  return model;
}

absl::StatusOr<ModelArtifact> TrainMemorizing(const data::Dataset& train,
                                              const MemorizingHyper& hyper,
                                              uint64_t seed) {
  if (train.empty()) return absl::InvalidArgumentError("empty training set");
  ModelArtifact model;
  model.arch.kind = ModelKind::kMemorizing;
  model.arch.dim = static_cast<int>(train.dim());
  model.arch.num_classes = train.num_classes();
  model.arch.hidden = 0;
  model.arch.memory = static_cast<int>(train.size());
  model.arch.bandwidth =
      hyper.bandwidth > 0.0 ? hyper.bandwidth : static_cast<double>(train.dim());
  const auto matrix = train.feature_matrix();
  model.params.assign(matrix.begin(), matrix.end());
  for (size_t i = 0; i < train.size(); ++i) {
    model.params.push_back(static_cast<double>(train.label(i)));
  }
  model.provenance = Provenance("memorizing", train, seed);
  model.provenance.hyperparameters = {{"bandwidth", model.arch.bandwidth}};
  return model;
}

}  // namespace privaudit::learners
