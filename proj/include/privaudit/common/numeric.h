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

#ifndef PRIVAUDIT_COMMON_NUMERIC_H_
#define PRIVAUDIT_COMMON_NUMERIC_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace privaudit {

// All randomness in the library flows through this engine type so that a
// (seed, stream) pair fully determines every draw.
using Rng = std::mt19937_64;

// Compensated summation that keeps a list of non-overlapping partial sums
// (Shewchuk's algorithm). The result is the correctly rounded sum of the
// inputs, so it does not depend on the order in which values are added.
class ExactAccumulator {
 public:
  void Add(double x);
  double Sum() const;

 private:
  std::vector<double> partials_;
};

double ExactSum(std::span<const double> values);

// log(sum(exp(values))) without overflow. Returns -inf for empty input.
double LogSumExp(std::span<const double> values);

// log(exp(a) + exp(b)).
double LogAddExp(double a, double b);

uint64_t SplitMix64(uint64_t x);

// Derives an independent child seed. Streams name the consumer (e.g. model
// initialization vs. batch sampling) so that adding a consumer never shifts
// the draws of another.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream, uint64_t index = 0);

// Maps 64 random bits to a double in [0, 1) with 53 bits of precision.
double UnitInterval(uint64_t bits);

double Dot(std::span<const double> a, std::span<const double> b);
double SquaredDistance(std::span<const double> a, std::span<const double> b);
double L2Norm(std::span<const double> v);

}  // namespace privaudit

#endif  // PRIVAUDIT_COMMON_NUMERIC_H_
