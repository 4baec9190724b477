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

#include "privaudit/data/membership.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"

namespace privaudit::data {
namespace {

constexpr uint64_t kMembershipStream = 0x6d656d62;  // "memb"

}  // namespace

size_t MembershipChallenge::member_count() const {
  return static_cast<size_t>(
      std::count(member_bits.begin(), member_bits.end(), true));
}

absl::StatusOr<MembershipChallenge> SampleMembership(const Universe& universe,
                                                     double p, uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling rate must lie in [0, 1], got ", p));
  }
  MembershipChallenge challenge;
  challenge.sampling_rate = p;
  challenge.seed = seed;
  challenge.member_bits.resize(universe.size());
  for (size_t i = 0; i < universe.size(); ++i) {
    const uint64_t bits = DeriveSeed(seed, kMembershipStream,
                                     static_cast<uint64_t>(universe.id(i)));
    challenge.member_bits[i] = UnitInterval(bits) < p;
  }
  return challenge;
}

absl::StatusOr<MembershipChallenge> ChallengeFromBits(
    const Universe& universe, std::vector<bool> member_bits, double p,
    uint64_t seed) {
  if (member_bits.size() != universe.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("challenge has ", member_bits.size(),
                     " bits for a universe of ", universe.size()));
  }
  return MembershipChallenge{std::move(member_bits), p, seed};
}

Dataset TrainingSet(const Universe& universe,
                    const MembershipChallenge& challenge) {
  return universe.Filter(challenge.member_bits);
}

}  // namespace privaudit::data
