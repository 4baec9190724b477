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

#ifndef PRIVAUDIT_LEARNERS_MODEL_H_
#define PRIVAUDIT_LEARNERS_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "privaudit/accountant/rdp.h"
#include "privaudit/data/dataset.h"

namespace privaudit::learners {

enum class ModelKind {
  // Multinomial logistic regression: softmax(W x + b).
  kLogistic,
  // One tanh hidden layer: softmax(W2 tanh(W1 x + b1) + b2).
  kMlp,
  // Stores its training set. Loss is the squared distance to the nearest
  // stored example of the same label, so it is exactly 0 on every training
  // example. A query equal to a stored row gets its stored label with
  // probability 1. Otherwise confidences are softmax(-d_k / bandwidth) over
  // the per-class nearest squared distances d_k.
  kMemorizing,
};

std::string_view ModelKindName(ModelKind kind);
absl::StatusOr<ModelKind> ParseModelKind(std::string_view name);

struct Architecture {
  ModelKind kind = ModelKind::kLogistic;
  int dim = 1;
  int num_classes = 2;
  int hidden = 32;          // kMlp only
  int memory = 0;           // kMemorizing only: stored examples
  double bandwidth = 1.0;   // kMemorizing only

  size_t ParameterCount() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct TrainingProvenance {
  std::string trainer;
  uint64_t seed = 0;
  uint64_t dataset_fingerprint = 0;
  size_t dataset_size = 0;
  nlohmann::ordered_json hyperparameters = nlohmann::ordered_json::object();
};

struct TrainingStats {
  int64_t steps = 0;
  double final_loss = 0.0;
  // DP-SGD only: the largest per-example gradient norm after clipping.
  double max_clipped_norm = 0.0;
};

// Trained parameters plus everything needed to retrain them bit-identically.
struct ModelArtifact {
  Architecture arch;
  std::vector<double> params;
  TrainingProvenance provenance;
  TrainingStats stats;
  std::optional<accountant::PrivacyBudget> budget;
};

struct Prediction {
  double loss = 0.0;
  std::vector<double> confidence;  // sums to 1
};

// Per-example cross-entropy (memorizing models: nearest-neighbour distance)
// and class probabilities. Pure in (params, example).
absl::StatusOr<std::vector<Prediction>> Evaluate(const ModelArtifact& model,
                                                 const data::Dataset& examples);
absl::StatusOr<Prediction> EvaluateOne(const ModelArtifact& model,
                                       std::span<const double> x, int label);

// Fraction of examples whose arg-max confidence equals the label.
absl::StatusOr<double> Accuracy(const ModelArtifact& model,
                                const data::Dataset& examples);

// Initial parameters for parametric models: zeros for logistic regression,
// scaled Gaussian weights and zero biases for the MLP.
std::vector<double> InitialParameters(const Architecture& arch, uint64_t seed);

// Cross-entropy of one example; writes d loss / d params into `grad`
// (resized to ParameterCount()). Parametric models only.
double LossAndGradient(const Architecture& arch, std::span<const double> params,
                       std::span<const double> x, int label,
                       std::vector<double>& grad);

}  // namespace privaudit::learners

#endif  // PRIVAUDIT_LEARNERS_MODEL_H_
