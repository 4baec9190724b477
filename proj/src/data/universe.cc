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

#include "privaudit/data/universe.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"

namespace privaudit::data {
namespace {

enum Stream : uint64_t { kMeans = 1, kLabels = 2, kNoise = 3 };

}  // namespace

std::vector<std::vector<double>> ClassMeans(const UniverseSpec& spec) {
  const int k = spec.num_classes;
  const int d = spec.dim;
  // Points on scaled basis vectors are pairwise `separation` apart.
  const double scale = spec.separation / std::sqrt(2.0);
  std::vector<std::vector<double>> means(k, std::vector<double>(d, 0.0));
  if (k <= d) {
    for (int c = 0; c < k; ++c) means[c][c] = scale;
  } else {
    Rng rng(DeriveSeed(spec.seed, kMeans));
    std::normal_distribution<double> normal;
    for (auto& mean : means) {
      for (double& v : mean) v = normal(rng);
      const double norm = L2Norm(mean);
      for (double& v : mean) v *= scale / norm;
    }
  }
  std::vector<double> centroid(d, 0.0);
  for (const auto& mean : means) {
    for (int j = 0; j < d; ++j) centroid[j] += mean[j] / k;
  }
  for (auto& mean : means) {
    for (int j = 0; j < d; ++j) mean[j] -= centroid[j];
  }
  return means;
}

absl::StatusOr<Universe> GenerateUniverse(const UniverseSpec& spec) {
  if (spec.num_classes < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 2 classes, got ", spec.num_classes));
  }
  if (spec.n < spec.num_classes) {
    return absl::InvalidArgumentError(absl::StrCat(
        "n = ", spec.n, " is smaller than K = ", spec.num_classes));
  }
  if (spec.dim < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension must be >= 1, got ", spec.dim));
  }
  if (!(spec.separation >= 0.0) || !(spec.noise >= 0.0)) {
    return absl::InvalidArgumentError(
        "separation and noise scale must be non-negative");
  }

  const auto means = ClassMeans(spec);
  std::vector<int> labels(spec.n);
  for (int i = 0; i < spec.n; ++i) labels[i] = i % spec.num_classes;
  Rng label_rng(DeriveSeed(spec.seed, kLabels));
  std::shuffle(labels.begin(), labels.end(), label_rng);

  Rng noise_rng(DeriveSeed(spec.seed, kNoise));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> features(static_cast<size_t>(spec.n) * spec.dim);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.dim; ++j) {
      features[static_cast<size_t>(i) * spec.dim + j] =
          means[labels[i]][j] + spec.noise * normal(noise_rng);
    }
  }
  std::vector<ExampleId> ids(spec.n);
  std::iota(ids.begin(), ids.end(), ExampleId{0});
  return Dataset::Create(spec.dim, spec.num_classes, std::move(ids),
                         std::move(labels), std::move(features));
}

absl::StatusOr<Universe> AppendExample(const Universe& universe,
                                       std::span<const double> features,
                                       int label) {
  if (static_cast<int>(features.size()) != universe.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("appended example has dimension ", features.size(),
                     ", universe has ", universe.dim()));
  }
  ExampleId next = 0;
  for (ExampleId id : universe.ids()) next = std::max(next, id + 1);
  auto extra = Dataset::Create(
      universe.dim(), universe.num_classes(), {next}, {label},
      std::vector<double>(features.begin(), features.end()));
  if (!extra.ok()) return extra.status();
  return universe.Concat(*extra);
}

}  // namespace privaudit::data
