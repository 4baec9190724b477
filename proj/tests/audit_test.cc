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

#include "privaudit/audit/audit.h"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "privaudit/accountant/rdp.h"
#include "privaudit/common/numeric.h"
#include "test_oracles.h"

namespace privaudit::audit {
namespace {

using attack::CondenseStep;
using attack::LearnerStep;
using attack::PipelineSpec;

data::AuditPair Canary(uint64_t seed = 1) {
  return *CanaryAuditPair({.n = 200, .dim = 4, .seed = seed}, 0, 6.0);
}

TEST(DpRegionTest, Examples) {
  for (double eps : {0.0, 0.5, 3.0}) {
    EXPECT_EQ(DpRegionCheck(0.5, 0.5, eps, 0.0), DpRegion::kConsistent);
  }
  EXPECT_EQ(DpRegionCheck(0.0, 0.0, 1.0, 0.0), DpRegion::kViolated);
  EXPECT_EQ(DpRegionCheck(0.25, 0.25, std::log(3.0), 0.0), DpRegion::kConsistent);
}

TEST(DpRegionTest, BoundaryIsSharp) {
  // Just past the randomized-response boundary on either constraint.
  EXPECT_EQ(DpRegionCheck(0.24, 0.25, std::log(3.0), 0.0), DpRegion::kViolated);
  EXPECT_EQ(DpRegionCheck(0.25, 0.24, std::log(3.0), 0.0), DpRegion::kViolated);
  // delta absorbs the gap: 1 - 0.24 = 0.76 <= 3 * 0.24 + 0.04.
  EXPECT_EQ(DpRegionCheck(0.24, 0.24, std::log(3.0), 0.04), DpRegion::kConsistent);
}

TEST(CanaryPairTest, IsNeighbouringAndFarFromClassMean) {
  data::UniverseSpec spec{.n = 200, .dim = 4, .seed = 3};
  auto pair = CanaryAuditPair(spec, 0, 6.0);
  ASSERT_TRUE(pair.ok());
  EXPECT_TRUE(data::IsNeighboringPair(*pair));
  const auto mean = data::ClassMeans(spec)[0];
  const auto x = pair->d_prime.features(pair->d_prime.size() - 1);
  EXPECT_NEAR(std::sqrt(SquaredDistance(x, mean)), 6.0, 1e-12);
  EXPECT_FALSE(CanaryAuditPair(spec, 2, 6.0).ok());
}

TEST(SummarizeTest, CountsAndBoundsFromHandBuiltScores) {
  // Calibration: D at 0, D' at 1, so the threshold lies in (0, 1).
  // Evaluation: 30 runs per side; 27 D' runs above, 3 D runs above.
  std::vector<double> d(40, 0.0);
  std::vector<double> dp(40, 1.0);
  for (int i = 10; i < 13; ++i) d[i] = 1.0;
  for (int i = 10; i < 13; ++i) dp[i] = 0.0;
  auto out = SummarizeAudit(d, dp, 10, 0.95);
  ASSERT_TRUE(out.ok());
  EXPECT_GT(out->threshold, 0.0);
  EXPECT_LT(out->threshold, 1.0);
  EXPECT_EQ(out->evaluation_per_side, 30);
  EXPECT_EQ(out->true_positives, 27);
  EXPECT_EQ(out->false_positives, 3);
  EXPECT_DOUBLE_EQ(out->detection_rate, 54.0 / 60.0);
  EXPECT_DOUBLE_EQ(out->fpr, 0.1);
  EXPECT_DOUBLE_EQ(out->fnr, 0.1);
  EXPECT_NEAR(out->fpr_interval.hi,
              testing_oracles::ClopperPearsonUpperByBisection(3, 30, 0.975), 1e-9);
  EXPECT_NEAR(out->fnr_interval.lo,
              testing_oracles::ClopperPearsonLowerByBisection(3, 30, 0.975), 1e-9);
  const double lb =
      std::log(testing_oracles::ClopperPearsonLowerByBisection(27, 30, 0.95) /
               testing_oracles::ClopperPearsonUpperByBisection(3, 30, 0.95));
  EXPECT_NEAR(out->eps.eps_lb, lb, 1e-9);
}

TEST(SummarizeTest, RejectsBadSplits) {
  std::vector<double> s(20, 0.0);
  EXPECT_FALSE(SummarizeAudit(s, s, 0, 0.95).ok());
  EXPECT_FALSE(SummarizeAudit(s, s, 20, 0.95).ok());
  EXPECT_FALSE(SummarizeAudit(s, std::vector<double>(19), 10, 0.95).ok());
}

TEST(RunAuditTest, FixedModelIsAtChance) {
  PipelineSpec fixed;
  fixed.learner = LearnerStep::kFixed;
  auto out = RunAudit(fixed, Canary(), {.trials_per_side = 200}, 1);
  ASSERT_TRUE(out.ok()) << out.status();
  // 200 graded runs; 3 binomial standard errors.
  EXPECT_NEAR(out->detection_rate, 0.5, 3 * std::sqrt(0.25 / 200));
  EXPECT_EQ(out->distinguisher, Distinguisher::kTargetLoss);
  EXPECT_FALSE(out->budget.has_value());
}

TEST(RunAuditTest, DmLinearDetectsTheCanary) {
  PipelineSpec dm;
  dm.condense = CondenseStep::kDmLinear;
  dm.r_ipc = 0.05;
  dm.learner = LearnerStep::kSgd;
  dm.sgd.epochs = 1;
  auto out = RunAudit(dm, Canary(), {.trials_per_side = 200}, 2);
  ASSERT_TRUE(out.ok()) << out.status();
  EXPECT_EQ(out->distinguisher, Distinguisher::kCondensedMean);
  EXPECT_EQ(out->evaluation_per_side, 100);
  EXPECT_GE(out->detection_rate, 0.99);
  EXPECT_GT(out->eps.eps_lb, 0.0);
}

TEST(RunAuditTest, DpSgdAtEpsilonOneStaysInTheDpRegion) {
  const double delta = 1e-5;
  const int steps = 10;
  PipelineSpec dp;
  dp.learner = LearnerStep::kDpSgd;
  dp.dpsgd.sample_rate = 1.0;
  dp.dpsgd.steps = steps;
  dp.dpsgd.delta = delta;
  dp.dpsgd.noise_multiplier =
      *accountant::CalibrateNoiseMultiplier(1.0, 1.0, steps, delta);
  auto out = RunAudit(dp, Canary(), {.trials_per_side = 200}, 3);
  ASSERT_TRUE(out.ok()) << out.status();
  ASSERT_TRUE(out->budget.has_value());
  EXPECT_LE(out->budget->epsilon, 1.0 + 1e-9);
  EXPECT_EQ(DpRegionCheckCorrected(*out, out->budget->epsilon, delta),
            DpRegion::kConsistent);
}

TEST(RunAuditTest, ReproducibleAndIndependentOfJobs) {
  PipelineSpec sgd;
  sgd.learner = LearnerStep::kSgd;
  sgd.sgd.epochs = 2;
  auto a = RunAudit(sgd, Canary(), {.trials_per_side = 20, .jobs = 1}, 4);
  auto b = RunAudit(sgd, Canary(), {.trials_per_side = 20, .jobs = 3}, 4);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->scores_d, b->scores_d);
  EXPECT_EQ(a->scores_d_prime, b->scores_d_prime);
  EXPECT_EQ(a->threshold, b->threshold);
}

TEST(RunAuditTest, RejectsInvalidConfigurations) {
  PipelineSpec sgd;
  sgd.learner = LearnerStep::kSgd;
  EXPECT_FALSE(RunAudit(sgd, Canary(), {.trials_per_side = 19}, 1).ok());
  EXPECT_FALSE(RunAudit(sgd, Canary(),
                        {.trials_per_side = 20,
                         .distinguisher = Distinguisher::kCondensedMean},
                        1)
                   .ok());
  PipelineSpec bad = sgd;
  bad.condense = CondenseStep::kRandomSubset;
  bad.r_ipc = 2.0;
  EXPECT_FALSE(RunAudit(bad, Canary(), {.trials_per_side = 20}, 1).ok());
  data::AuditPair broken = Canary();
  broken.d = broken.d_prime;
  EXPECT_FALSE(RunAudit(sgd, broken, {.trials_per_side = 20}, 1).ok());
}

TEST(RandomizedResponseTest, TruthRateMatchesEpsilon) {
  std::vector<bool> bits(20000);
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = i % 3 == 0;
  auto out = RandomizedResponse(bits, std::log(3.0), 5);
  int truthful = 0;
  for (size_t i = 0; i < bits.size(); ++i) truthful += (out[i] == 1.0) == bits[i];
  const double se = std::sqrt(0.75 * 0.25 / bits.size());
  EXPECT_NEAR(truthful / 20000.0, 0.75, 3 * se);
}

// Oracle: for an eps-DP mechanism the true (FPR, FNR) of any test lies in
// the DP region, and the two upper ends of two-sided 95% intervals cover
// their true rates jointly with probability at least 0.95. Over 100
// repeats, 10 or fewer failures has probability above 0.98 at 5%.
TEST(RandomizedResponseTest, CorrectedRatesStayInsideTheDpRegion) {
  const double eps = std::log(3.0);
  int consistent = 0;
  for (uint64_t r = 0; r < 100; ++r) {
    std::vector<bool> bits(400);
    for (size_t i = 0; i < bits.size(); ++i) bits[i] = i >= 200;
    auto scores = RandomizedResponse(bits, eps, 1000 + r);
    std::vector<double> d(scores.begin(), scores.begin() + 200);
    std::vector<double> dp(scores.begin() + 200, scores.end());
    auto out = SummarizeAudit(d, dp, 100, 0.95);
    ASSERT_TRUE(out.ok());
    consistent += DpRegionCheckCorrected(*out, eps, 0.0) == DpRegion::kConsistent;
  }
  EXPECT_GE(consistent, 90);
}

TEST(OutputTest, JsonSeparatesEmpiricalAndAccountantBounds) {
  std::vector<double> d(40, 0.0);
  std::vector<double> dp(40, 1.0);
  d[30] = 1.0;
  auto out = *SummarizeAudit(d, dp, 20, 0.95);
  auto j = AuditOutcomeToJson(out);
  EXPECT_TRUE(j["empirical_lower_bound"]["eps_naive"]["diagnostic"].get<bool>());
  EXPECT_TRUE(j["accountant_upper_bound"].is_null());
  EXPECT_EQ(j["true_positives"].get<int>(), 20);
  EXPECT_EQ(j["false_positives"].get<int>(), 1);
}

TEST(OutputTest, CsvHasOneRowPerRun) {
  std::vector<double> d(20, 0.0);
  std::vector<double> dp(20, 1.0);
  auto out = *SummarizeAudit(d, dp, 10, 0.95);
  std::ostringstream csv;
  WriteAuditScoresCsv(out, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 41u);
  EXPECT_EQ(lines[0], "trial,side,split,score");
  EXPECT_EQ(lines[1], "0,d,calibration,0");
  EXPECT_EQ(lines[40], "19,d_prime,evaluation,1");
}

}  // namespace
}  // namespace privaudit::audit
