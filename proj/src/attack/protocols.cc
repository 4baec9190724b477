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

#include "privaudit/attack/protocols.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"
#include "privaudit/metrics/metrics.h"

namespace privaudit::attack {
namespace {

constexpr uint64_t kNonMemberStream = 61;

GameResult Grade(std::vector<bool> guesses, std::vector<bool> truth) {
  GameResult r;
  size_t correct = 0;
  for (size_t i = 0; i < guesses.size(); ++i) correct += guesses[i] == truth[i];
  r.graded = guesses.size();
  r.success_rate = static_cast<double>(correct) / static_cast<double>(r.graded);
  r.advantage = metrics::AttackAdvantage(r.success_rate);
  r.guesses = std::move(guesses);
  r.truth = std::move(truth);
  return r;
}

}  // namespace

absl::StatusOr<GameResult> EvaluateFullUniverse(
    const ScoreSet& scores, const data::MembershipChallenge& challenge,
    double threshold) {
  if (scores.scores.empty() ||
      scores.scores.size() != challenge.member_bits.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "scores cover ", scores.scores.size(), " examples, universe has ",
        challenge.member_bits.size()));
  }
  std::vector<bool> guesses(scores.scores.size());
  for (size_t i = 0; i < guesses.size(); ++i) {
    guesses[i] = scores.scores[i] > threshold;
  }
  return Grade(std::move(guesses), challenge.member_bits);
}

absl::StatusOr<GameResult> EvaluateSubsetRestricted(
    const ScoreSet& scores, std::span<const data::ExampleId> s,
    std::span<const data::ExampleId> s_prime, double threshold) {
  if (s.size() != s_prime.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "|S| = ", s.size(), " but |S'| = ", s_prime.size(), "; sizes must match"));
  }
  if (s.empty()) return absl::InvalidArgumentError("S is empty");
  std::unordered_map<data::ExampleId, size_t> position;
  for (size_t i = 0; i < scores.ids.size(); ++i) position[scores.ids[i]] = i;
  std::unordered_set<data::ExampleId> in_s(s.begin(), s.end());
  std::vector<bool> guesses;
  std::vector<bool> truth;
  for (auto [ids, member] : {std::pair{s, true}, std::pair{s_prime, false}}) {
    for (data::ExampleId id : ids) {
      auto it = position.find(id);
      if (it == position.end()) {
        return absl::InvalidArgumentError(
            absl::StrCat("example ", id, " has no score"));
      }
      if (!member && in_s.contains(id)) {
        return absl::InvalidArgumentError(
            absl::StrCat("example ", id, " is in both S and S'"));
      }
      guesses.push_back(scores.scores[it->second] > threshold);
      truth.push_back(member);
    }
  }
  return Grade(std::move(guesses), std::move(truth));
}

absl::StatusOr<std::vector<data::ExampleId>> SampleNonMemberSubset(
    const data::Dataset& t, std::span<const data::ExampleId> s, size_t count,
    uint64_t seed) {
  std::unordered_set<data::ExampleId> in_s(s.begin(), s.end());
  std::vector<data::ExampleId> pool;
  for (data::ExampleId id : t.ids()) {
    if (!in_s.contains(id)) pool.push_back(id);
  }
  if (pool.size() < count) {
    return absl::FailedPreconditionError(absl::StrCat(
        "T \\ S has ", pool.size(), " examples, need ", count));
  }
  Rng rng(DeriveSeed(seed, kNonMemberStream));
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double BestThreshold(std::span<const double> scores,
                     const std::vector<bool>& labels) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Start with everyone guessed a member (threshold below the minimum), then
  // move the threshold up past one distinct score at a time.
  int64_t correct = std::count(labels.begin(), labels.end(), true);
  int64_t best_correct = correct;
  double best = scores.empty() ? 0.0
                               : std::nextafter(scores[order[0]],
                                                -std::numeric_limits<double>::infinity());
  for (size_t start = 0; start < order.size();) {
    const double value = scores[order[start]];
    size_t end = start;
    while (end < order.size() && scores[order[end]] == value) {
      correct += labels[order[end]] ? -1 : 1;
      ++end;
    }
    if (correct > best_correct) {
      best_correct = correct;
      best = value;
      if (end < order.size()) {
        const double mid = value + (scores[order[end]] - value) / 2;
        if (mid < scores[order[end]]) best = mid;
      }
    }
    start = end;
  }
  return best;
}

}  // namespace privaudit::attack
