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

#include "privaudit/condense/condense.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "privaudit/common/numeric.h"
#include "privaudit/common/status_macros.h"
#include "privaudit/data/csv.h"

namespace privaudit::condense {
namespace {

using data::Dataset;
using data::ExampleId;

enum Stream : uint64_t { kSubset = 11, kGaussian = 12, kInitSubset = 13 };

// First k entries of a seeded Fisher-Yates shuffle of `pool`, sorted back
// into pool order.
std::vector<size_t> SampleWithoutReplacement(std::vector<size_t> pool,
                                             size_t k, Rng& rng) {
  for (size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::string_view SchemeName(Scheme scheme) {
  return scheme == Scheme::kRandomSubset ? "random_subset" : "dm_linear";
}

std::string_view InitKindName(InitKind kind) {
  return kind == InitKind::kSubsetOfT ? "subset_of_T" : "gaussian_centered";
}

absl::StatusOr<Scheme> ParseScheme(std::string_view name) {
  if (name == "random_subset") return Scheme::kRandomSubset;
  if (name == "dm_linear") return Scheme::kDmLinear;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown condensation scheme `", std::string(name), "`"));
}

absl::StatusOr<InitKind> ParseInitKind(std::string_view name) {
  if (name == "subset_of_T") return InitKind::kSubsetOfT;
  if (name == "gaussian_centered") return InitKind::kGaussianCentered;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown DM initialization `", std::string(name), "`"));
}

int CondensedSize(double r_ipc, size_t n) {
  return static_cast<int>(std::floor(r_ipc * static_cast<double>(n) + 0.5));
}

absl::StatusOr<CondensedDataset> CondenseRandomSubset(const Dataset& t,
                                                      double r_ipc,
                                                      bool stratified,
                                                      uint64_t seed) {
  if (!(r_ipc > 0.0 && r_ipc <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("r_ipc must lie in (0, 1], got ", r_ipc));
  }
  Rng rng(DeriveSeed(seed, kSubset));
  std::vector<size_t> chosen;
  if (!stratified) {
    const int m = CondensedSize(r_ipc, t.size());
    if (m < 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "r_ipc = ", r_ipc, " of ", t.size(), " examples rounds to zero"));
    }
    std::vector<size_t> pool(t.size());
    std::iota(pool.begin(), pool.end(), 0);
    chosen = SampleWithoutReplacement(std::move(pool), m, rng);
  } else {
    std::vector<std::vector<size_t>> by_class(t.num_classes());
    for (size_t i = 0; i < t.size(); ++i) by_class[t.label(i)].push_back(i);
    for (auto& pool : by_class) {
      if (pool.empty()) continue;
      const size_t m = std::min<size_t>(
          pool.size(), std::max(1, CondensedSize(r_ipc, pool.size())));
      auto picked = SampleWithoutReplacement(std::move(pool), m, rng);
      chosen.insert(chosen.end(), picked.begin(), picked.end());
    }
    if (chosen.empty()) {
      return absl::InvalidArgumentError("cannot condense an empty dataset");
    }
    std::sort(chosen.begin(), chosen.end());
  }
  CondensedDataset out;
  out.examples = t.Select(chosen);
  out.r_ipc = r_ipc;
  out.scheme = Scheme::kRandomSubset;
  out.stratified = stratified;
  out.seed = seed;
  return out;
}

absl::StatusOr<DmInit> InitGaussianCentered(int m, int dim, uint64_t seed,
                                            int num_classes) {
  if (m < 2) {
    return absl::FailedPreconditionError(absl::StrCat(
        "centred Gaussian init needs m >= 2 (m = ", m,
        " degenerates to the origin)"));
  }
  if (dim < 1 || num_classes < 1) {
    return absl::InvalidArgumentError("dimension and class count must be >= 1");
  }
  Rng rng(DeriveSeed(seed, kGaussian));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> features(static_cast<size_t>(m) * dim);
  for (double& v : features) v = normal(rng);
  for (int j = 0; j < dim; ++j) {
    ExactAccumulator acc;
    for (int i = 0; i < m; ++i) acc.Add(features[i * dim + j]);
    const double mean = acc.Sum() / m;
    for (int i = 0; i < m; ++i) features[i * dim + j] -= mean;
  }
  std::vector<ExampleId> ids(m);
  std::iota(ids.begin(), ids.end(), ExampleId{0});
  std::vector<int> labels(m);
  for (int i = 0; i < m; ++i) labels[i] = i % num_classes;
  ASSIGN_OR_RETURN(Dataset examples,
                   Dataset::Create(dim, num_classes, std::move(ids),
                                   std::move(labels), std::move(features)));
  return DmInit{std::move(examples), InitKind::kGaussianCentered, seed};
}

absl::StatusOr<DmInit> InitSubsetOfT(const Dataset& t, int m, uint64_t seed) {
  if (m < 1 || static_cast<size_t>(m) > t.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "subset init size ", m, " outside [1, ", t.size(), "]"));
  }
  Rng rng(DeriveSeed(seed, kInitSubset));
  std::vector<size_t> pool(t.size());
  std::iota(pool.begin(), pool.end(), 0);
  auto chosen = SampleWithoutReplacement(std::move(pool), m, rng);
  return DmInit{t.Select(chosen), InitKind::kSubsetOfT, seed};
}

absl::StatusOr<CondensedDataset> CondenseDmLinearToMean(
    const DmInit& init, std::span<const double> target_mean, size_t t_size) {
  const Dataset& s = init.examples;
  if (s.empty()) {
    return absl::InvalidArgumentError("DM initialization is empty");
  }
  if (static_cast<int>(target_mean.size()) != s.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("DM init has dimension ", s.dim(), ", T has ",
                     target_mean.size()));
  }
  const std::vector<double> init_mean = s.Mean();
  const int d = s.dim();
  std::vector<double> features(s.feature_matrix().begin(),
                               s.feature_matrix().end());
  for (size_t i = 0; i < s.size(); ++i) {
    for (int j = 0; j < d; ++j) {
      double& v = features[i * d + j];
      v = v - init_mean[j] + target_mean[j];
    }
  }
  ASSIGN_OR_RETURN(
      Dataset examples,
      Dataset::Create(d, s.num_classes(),
                      std::vector<ExampleId>(s.ids().begin(), s.ids().end()),
                      std::vector<int>(s.labels().begin(), s.labels().end()),
                      std::move(features)));
  CondensedDataset out;
  out.examples = std::move(examples);
  out.r_ipc = t_size == 0 ? 0.0
                          : static_cast<double>(s.size()) /
                                static_cast<double>(t_size);
  out.scheme = Scheme::kDmLinear;
  out.init = init.kind;
  out.seed = init.seed;
  return out;
}

absl::StatusOr<CondensedDataset> CondenseDmLinear(const DmInit& init,
                                                  const Dataset& t) {
  if (t.empty()) {
    return absl::InvalidArgumentError("training set T is empty");
  }
  if (t.dim() != init.examples.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("DM init has dimension ", init.examples.dim(),
                     ", T has ", t.dim()));
  }
  return CondenseDmLinearToMean(init, t.Mean(), t.size());
}

double MeanGap(const Dataset& s_init, const Dataset& t) {
  return std::sqrt(SquaredDistance(s_init.Mean(), t.Mean()));
}

std::string ProvenanceJson(const CondensedDataset& condensed) {
  nlohmann::ordered_json j;
  j["scheme"] = SchemeName(condensed.scheme);
  j["init"] = condensed.init ? nlohmann::ordered_json(InitKindName(*condensed.init))
                             : nlohmann::ordered_json(nullptr);
  j["r_ipc"] = condensed.r_ipc;
  j["stratified"] = condensed.stratified;
  j["seed"] = condensed.seed;
  j["size"] = condensed.examples.size();
  j["fingerprint"] = condensed.examples.Fingerprint();
  return j.dump(2);
}

absl::Status WriteCondensed(const CondensedDataset& condensed,
                            const std::string& prefix) {
  RETURN_IF_ERROR(data::WriteCsvFile(condensed.examples, prefix + ".csv"));
  const std::string sidecar = prefix + ".provenance.json";
  std::ofstream out(sidecar);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open ", sidecar, " for writing"));
  }
  out << ProvenanceJson(condensed) << '\n';
  return absl::OkStatus();
}

}  // namespace privaudit::condense
