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

#ifndef PRIVAUDIT_DATA_UNIVERSE_H_
#define PRIVAUDIT_DATA_UNIVERSE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"

namespace privaudit::data {

// The pool of candidate examples the attacker and defender agree on. Ids are
// dense integers 0..n-1.
using Universe = Dataset;

struct UniverseSpec {
  int n = 1000;
  int dim = 8;
  int num_classes = 2;
  // Distance between any two class means.
  double separation = 4.0;
  // Per-coordinate standard deviation around the class mean.
  double noise = 1.0;
  uint64_t seed = 0;
};

// Samples a K-component isotropic Gaussian mixture. Labels are assigned
// round-robin and then shuffled, so class sizes differ by at most one. The
// class means are centred on the origin.
absl::StatusOr<Universe> GenerateUniverse(const UniverseSpec& spec);

// The class means GenerateUniverse places for this spec.
std::vector<std::vector<double>> ClassMeans(const UniverseSpec& spec);

// Returns a copy of `universe` with one more example appended under the next
// free dense id. Used to plant an audit canary at a chosen location.
absl::StatusOr<Universe> AppendExample(const Universe& universe,
                                       std::span<const double> features,
                                       int label);

}  // namespace privaudit::data

#endif  // PRIVAUDIT_DATA_UNIVERSE_H_
