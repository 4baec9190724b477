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

#ifndef PRIVAUDIT_CONDENSE_CONDENSE_H_
#define PRIVAUDIT_CONDENSE_CONDENSE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"

namespace privaudit::condense {

enum class Scheme { kRandomSubset, kDmLinear };
enum class InitKind { kSubsetOfT, kGaussianCentered };

std::string_view SchemeName(Scheme scheme);
std::string_view InitKindName(InitKind kind);
absl::StatusOr<Scheme> ParseScheme(std::string_view name);
absl::StatusOr<InitKind> ParseInitKind(std::string_view name);

// Starting point S_init for distribution matching.
struct DmInit {
  data::Dataset examples;
  InitKind kind = InitKind::kGaussianCentered;
  uint64_t seed = 0;
};

struct CondensedDataset {
  data::Dataset examples;
  // |S| / |T|.
  double r_ipc = 0.0;
  Scheme scheme = Scheme::kRandomSubset;
  std::optional<InitKind> init;
  bool stratified = false;
  uint64_t seed = 0;
};

// round-half-up(r_ipc * n).
int CondensedSize(double r_ipc, size_t n);

// Uniform subset of T without replacement of size round(r_ipc * |T|), or a
// per-class subset of size max(1, round(r_ipc * |T_c|)) when stratified.
// Chosen rows keep their ids and their order in T.
absl::StatusOr<CondensedDataset> CondenseRandomSubset(const data::Dataset& t,
                                                      double r_ipc,
                                                      bool stratified,
                                                      uint64_t seed);

// m standard-normal draws in R^d with their sample mean subtracted. Labels
// cycle through [0, num_classes). m = 1 would collapse to the origin and is
// rejected.
absl::StatusOr<DmInit> InitGaussianCentered(int m, int dim, uint64_t seed,
                                            int num_classes = 1);

// A uniform m-subset of T used as the initial condensed set.
absl::StatusOr<DmInit> InitSubsetOfT(const data::Dataset& t, int m,
                                     uint64_t seed);

// Linear-extractor distribution matching in closed form: every initial
// example is shifted by mean(T) - mean(S_init), i.e.
//
//   s_i = s'_i - (1/m) sum_j s'_j + (1/n) sum_j x_j.
//
// Labels and ids are copied from S_init.
absl::StatusOr<CondensedDataset> CondenseDmLinear(const DmInit& init,
                                                  const data::Dataset& t);

// Same transform given mean(T) directly. The T overload forwards here, which
// makes the output depend on T only through its mean.
absl::StatusOr<CondensedDataset> CondenseDmLinearToMean(
    const DmInit& init, std::span<const double> target_mean, size_t t_size);

// ||mean(S_init) - mean(T)||_2.
double MeanGap(const data::Dataset& s_init, const data::Dataset& t);

// Writes <prefix>.csv (same schema as data::WriteCsv) and
// <prefix>.provenance.json holding scheme, init, r_ipc and seed.
absl::Status WriteCondensed(const CondensedDataset& condensed,
                            const std::string& prefix);
std::string ProvenanceJson(const CondensedDataset& condensed);

}  // namespace privaudit::condense

#endif  // PRIVAUDIT_CONDENSE_CONDENSE_H_
