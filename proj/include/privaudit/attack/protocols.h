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

// The two ways of scoring a membership-inference attack.
//
// Full universe: membership means "in T", and the attacker is graded on every
// example of U. This is the game the defence has to win.
//
// Subset restricted: the attacker is graded only on S (the condensed
// training set, labelled members) plus an equal number S' of examples drawn
// from T \ S (labelled non-members). Because S' is really part of T, this
// grades detection of S rather than of T and overstates what the attack
// learns about T. It is implemented so the two numbers can be compared.

#ifndef PRIVAUDIT_ATTACK_PROTOCOLS_H_
#define PRIVAUDIT_ATTACK_PROTOCOLS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "privaudit/attack/scorers.h"
#include "privaudit/data/dataset.h"
#include "privaudit/data/membership.h"

namespace privaudit::attack {

struct GameResult {
  double success_rate = 0.0;
  double advantage = 0.0;
  // Guess per graded example (member iff score > threshold), in the order
  // the examples were graded.
  std::vector<bool> guesses;
  std::vector<bool> truth;
  size_t graded = 0;
};

absl::StatusOr<GameResult> EvaluateFullUniverse(
    const ScoreSet& scores, const data::MembershipChallenge& challenge,
    double threshold);

// Grades S (members) then S' (non-members).
absl::StatusOr<GameResult> EvaluateSubsetRestricted(
    const ScoreSet& scores, std::span<const data::ExampleId> s,
    std::span<const data::ExampleId> s_prime, double threshold);

// `count` ids drawn uniformly without replacement from T \ S.
absl::StatusOr<std::vector<data::ExampleId>> SampleNonMemberSubset(
    const data::Dataset& t, std::span<const data::ExampleId> s, size_t count,
    uint64_t seed);

// Threshold maximizing accuracy of "member iff score > threshold" on the
// given labelled scores. Candidates are midpoints between consecutive
// distinct scores plus one below the minimum; ties go to the lowest.
double BestThreshold(std::span<const double> scores,
                     const std::vector<bool>& labels);

}  // namespace privaudit::attack

#endif  // PRIVAUDIT_ATTACK_PROTOCOLS_H_
