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

#include "privaudit/learners/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::learners {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Softmax of logits in place; returns log-sum-exp.
double SoftmaxInPlace(std::vector<double>& z) {
  const double lse = LogSumExp(z);
  for (double& v : z) v = std::exp(v - lse);
  return lse;
}

// Logits of a parametric model; fills `hidden` for the MLP.
void Forward(const Architecture& arch, std::span<const double> p,
             std::span<const double> x, std::vector<double>& hidden,
             std::vector<double>& logits) {
  const int d = arch.dim;
  const int k = arch.num_classes;
  logits.assign(k, 0.0);
  if (arch.kind == ModelKind::kLogistic) {
    const double* w = p.data();
    const double* b = p.data() + k * d;
    for (int c = 0; c < k; ++c) {
      logits[c] = b[c] + Dot({w + c * d, static_cast<size_t>(d)}, x);
    }
    return;
  }
  const int h = arch.hidden;
  const double* w1 = p.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + k * h;
  hidden.assign(h, 0.0);
  for (int u = 0; u < h; ++u) {
    hidden[u] = std::tanh(b1[u] + Dot({w1 + u * d, static_cast<size_t>(d)}, x));
  }
  for (int c = 0; c < k; ++c) {
    logits[c] = b2[c] + Dot({w2 + c * h, static_cast<size_t>(h)}, hidden);
  }
}

Prediction EvaluateMemorizing(const Architecture& arch,
                              std::span<const double> p,
                              std::span<const double> x, int label) {
  const int d = arch.dim;
  const int k = arch.num_classes;
  const double* rows = p.data();
  const double* labels = p.data() + static_cast<size_t>(arch.memory) * d;
  std::vector<double> nearest(k, kInf);
  double nearest_any = kInf;
  for (int i = 0; i < arch.memory; ++i) {
    const double dist = SquaredDistance({rows + i * d, static_cast<size_t>(d)}, x);
    const int y = static_cast<int>(labels[i]);
    nearest[y] = std::min(nearest[y], dist);
    nearest_any = std::min(nearest_any, dist);
  }
  Prediction out;
  out.loss = std::isinf(nearest[label]) ? nearest_any : nearest[label];
  out.confidence.resize(k);
  if (nearest_any == 0.0) {
    // A stored row is recalled with its stored label.
    const double hits = static_cast<double>(
        std::count(nearest.begin(), nearest.end(), 0.0));
    for (int c = 0; c < k; ++c) out.confidence[c] = nearest[c] == 0.0 ? 1.0 / hits : 0.0;
    return out;
  }
  for (int c = 0; c < k; ++c) out.confidence[c] = -nearest[c] / arch.bandwidth;
  SoftmaxInPlace(out.confidence);
  return out;
}

absl::Status CheckExample(const Architecture& arch, size_t dim, int label) {
  if (static_cast<int>(dim) != arch.dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "example has dimension ", dim, ", model expects ", arch.dim));
  }
  if (label < 0 || label >= arch.num_classes) {
    return absl::InvalidArgumentError(absl::StrCat(
        "label ", label, " outside the model's ", arch.num_classes, " classes"));
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kMlp:
      return "mlp";
    case ModelKind::kMemorizing:
      return "memorizing";
  }
  return "unknown";
}

absl::StatusOr<ModelKind> ParseModelKind(std::string_view name) {
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "memorizing") return ModelKind::kMemorizing;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown model kind `", std::string(name), "`"));
}

size_t Architecture::ParameterCount() const {
  switch (kind) {
    case ModelKind::kLogistic:
      return static_cast<size_t>(num_classes) * (dim + 1);
    case ModelKind::kMlp:
      return static_cast<size_t>(hidden) * (dim + 1) +
             static_cast<size_t>(num_classes) * (hidden + 1);
    case ModelKind::kMemorizing:
      return static_cast<size_t>(memory) * (dim + 1);
  }
  return 0;
}

std::vector<double> InitialParameters(const Architecture& arch, uint64_t seed) {
  std::vector<double> p(arch.ParameterCount(), 0.0);
  if (arch.kind != ModelKind::kMlp) return p;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = arch.dim;
  const int h = arch.hidden;
  const int k = arch.num_classes;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (int i = 0; i < h * d; ++i) p[i] = s1 * normal(rng);
  double* w2 = p.data() + h * d + h;
  for (int i = 0; i < k * h; ++i) w2[i] = s2 * normal(rng);
  return p;
}

double LossAndGradient(const Architecture& arch, std::span<const double> params,
                       std::span<const double> x, int label,
                       std::vector<double>& grad) {
  const int d = arch.dim;
  const int k = arch.num_classes;
  grad.assign(arch.ParameterCount(), 0.0);
  std::vector<double> hidden;
  std::vector<double> probs;
  Forward(arch, params, x, hidden, probs);
  const double z_y = probs[label];
  const double loss = SoftmaxInPlace(probs) - z_y;

  std::vector<double> dz = probs;
  dz[label] -= 1.0;
  if (arch.kind == ModelKind::kLogistic) {
    for (int c = 0; c < k; ++c) {
      for (int j = 0; j < d; ++j) grad[c * d + j] = dz[c] * x[j];
      grad[k * d + c] = dz[c];
    }
    return loss;
  }
  const int h = arch.hidden;
  const double* w2 = params.data() + h * d + h;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + h * d;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + k * h;
  for (int c = 0; c < k; ++c) {
    for (int u = 0; u < h; ++u) g_w2[c * h + u] = dz[c] * hidden[u];
    g_b2[c] = dz[c];
  }
  for (int u = 0; u < h; ++u) {
    double dh = 0.0;
    for (int c = 0; c < k; ++c) dh += w2[c * h + u] * dz[c];
    const double da = dh * (1.0 - hidden[u] * hidden[u]);
    for (int j = 0; j < d; ++j) g_w1[u * d + j] = da * x[j];
    g_b1[u] = da;
  }
  return loss;
}

absl::StatusOr<Prediction> EvaluateOne(const ModelArtifact& model,
                                       std::span<const double> x, int label) {
  RETURN_IF_ERROR(CheckExample(model.arch, x.size(), label));
  if (model.params.size() != model.arch.ParameterCount()) {
    return absl::InvalidArgumentError(
        absl::StrCat("model holds ", model.params.size(),
                     " parameters, architecture expects ",
                     model.arch.ParameterCount()));
  }
  if (model.arch.kind == ModelKind::kMemorizing) {
    return EvaluateMemorizing(model.arch, model.params, x, label);
  }
  Prediction out;
  std::vector<double> hidden;
  Forward(model.arch, model.params, x, hidden, out.confidence);
  const double z_y = out.confidence[label];
  out.loss = SoftmaxInPlace(out.confidence) - z_y;
  return out;
}

absl::StatusOr<std::vector<Prediction>> Evaluate(const ModelArtifact& model,
                                                 const data::Dataset& examples) {
  if (examples.dim() != model.arch.dim && !examples.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dataset has dimension ", examples.dim(), ", model expects ",
        model.arch.dim));
  }
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    ASSIGN_OR_RETURN(Prediction p, EvaluateOne(model, examples.features(i),
                                               examples.label(i)));
    out.push_back(std::move(p));
  }
  return out;
}

absl::StatusOr<double> Accuracy(const ModelArtifact& model,
                                const data::Dataset& examples) {
  if (examples.empty()) {
    return absl::InvalidArgumentError("accuracy of an empty dataset");
  }
  ASSIGN_OR_RETURN(auto predictions, Evaluate(model, examples));
  size_t correct = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& c = predictions[i].confidence;
    const int guess =
        static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
    correct += guess == examples.label(i);
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace privaudit::learners
