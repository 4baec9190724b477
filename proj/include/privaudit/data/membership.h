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

#ifndef PRIVAUDIT_DATA_MEMBERSHIP_H_
#define PRIVAUDIT_DATA_MEMBERSHIP_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"
#include "privaudit/data/universe.h"

namespace privaudit::data {

// The defender's secret: which universe examples went into the training set
// T. Bits are indexed by universe position and keyed by example id.
struct MembershipChallenge {
  std::vector<bool> member_bits;
  double sampling_rate = 0.5;
  uint64_t seed = 0;

  size_t member_count() const;
};

// Includes each example independently with probability p. The bit of an
// example depends only on (its id, p, seed), so reordering the universe
// permutes the bits without changing any of them.
absl::StatusOr<MembershipChallenge> SampleMembership(const Universe& universe,
                                                     double p, uint64_t seed);

// Wraps explicit bits (e.g. complementary shadow splits).
absl::StatusOr<MembershipChallenge> ChallengeFromBits(
    const Universe& universe, std::vector<bool> member_bits, double p,
    uint64_t seed);

// T: the universe rows flagged as members, in universe order.
Dataset TrainingSet(const Universe& universe,
                    const MembershipChallenge& challenge);

}  // namespace privaudit::data

#endif  // PRIVAUDIT_DATA_MEMBERSHIP_H_
