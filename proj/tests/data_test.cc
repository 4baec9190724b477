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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "privaudit/common/numeric.h"
#include "privaudit/data/audit_pair.h"
#include "privaudit/data/csv.h"
#include "privaudit/data/dataset.h"
#include "privaudit/data/membership.h"
#include "privaudit/data/universe.h"

namespace privaudit::data {
namespace {

TEST(GenerateUniverseTest, BalancedLabelsAndDenseIds) {
  auto u = GenerateUniverse({.n = 100, .dim = 2, .num_classes = 2,
                             .separation = 0, .noise = 1, .seed = 7});
  ASSERT_TRUE(u.ok()) << u.status();
  EXPECT_EQ(u->size(), 100u);
  EXPECT_EQ(u->ClassCounts(), (std::vector<int>{50, 50}));
  for (size_t i = 0; i < u->size(); ++i) EXPECT_EQ(u->id(i), int64_t(i));
}

TEST(GenerateUniverseTest, UnevenClassesDifferByAtMostOne) {
  auto u = GenerateUniverse({.n = 103, .dim = 3, .num_classes = 5, .seed = 1});
  ASSERT_TRUE(u.ok());
  auto counts = u->ClassCounts();
  auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  EXPECT_LE(*hi - *lo, 1);
}

TEST(GenerateUniverseTest, SameSeedIsBitwiseIdentical) {
  UniverseSpec spec{.n = 100, .dim = 2, .num_classes = 2, .separation = 0,
                    .noise = 1, .seed = 7};
  auto a = GenerateUniverse(spec);
  auto b = GenerateUniverse(spec);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_TRUE(*a == *b);
  EXPECT_EQ(a->Fingerprint(), b->Fingerprint());
  spec.seed = 8;
  auto c = GenerateUniverse(spec);
  EXPECT_FALSE(*a == *c);
}

TEST(GenerateUniverseTest, RejectsInvalidSpecs) {
  EXPECT_EQ(GenerateUniverse({.n = 1, .dim = 2, .num_classes = 2}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(GenerateUniverse({.n = 10, .dim = 0, .num_classes = 2}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(GenerateUniverse({.n = 10, .dim = 2, .num_classes = 2,
                                 .separation = -1}).ok());
}

TEST(GenerateUniverseTest, ClassMeansArePairwiseSeparated) {
  for (int k : {2, 4, 12}) {
    UniverseSpec spec{.n = 100, .dim = 8, .num_classes = k, .separation = 6};
    auto means = ClassMeans(spec);
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        if (k <= spec.dim) {
          EXPECT_NEAR(std::sqrt(SquaredDistance(means[a], means[b])), 6.0,
                      1e-12);
        }
      }
    }
  }
}

// Oracle: nearest class-mean rule fitted on a train split. For two classes
// six noise units apart the Bayes error is Phi(-3) ~ 0.13%.
TEST(GenerateUniverseTest, SeparatedUniverseIsLearnableOnHeldOutSplit) {
  auto u = GenerateUniverse({.n = 2000, .dim = 8, .num_classes = 2,
                             .separation = 6, .noise = 1, .seed = 3});
  ASSERT_TRUE(u.ok());
  std::vector<std::vector<double>> mean(2, std::vector<double>(8, 0.0));
  std::vector<int> count(2, 0);
  for (size_t i = 0; i < 1000; ++i) {
    ++count[u->label(i)];
    for (int j = 0; j < 8; ++j) mean[u->label(i)][j] += u->features(i)[j];
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : mean[c]) v /= count[c];
  int correct = 0;
  for (size_t i = 1000; i < 2000; ++i) {
    const int guess = SquaredDistance(u->features(i), mean[0]) <
                              SquaredDistance(u->features(i), mean[1])
                          ? 0
                          : 1;
    correct += guess == u->label(i);
  }
  EXPECT_GE(correct / 1000.0, 0.99);
}

TEST(AppendExampleTest, AddsNextDenseId) {
  auto u = GenerateUniverse({.n = 10, .dim = 2, .num_classes = 2});
  ASSERT_TRUE(u.ok());
  const std::vector<double> x = {5.0, -5.0};
  auto v = AppendExample(*u, x, 1);
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(v->size(), 11u);
  EXPECT_EQ(v->id(10), 10);
  EXPECT_EQ(v->label(10), 1);
  EXPECT_FALSE(AppendExample(*u, std::vector<double>{1.0}, 0).ok());
}

class MembershipTest : public ::testing::Test {
 protected:
  void SetUp() override {
    universe_ = *GenerateUniverse({.n = 10000, .dim = 1, .num_classes = 2});
  }
  Universe universe_;
};

TEST_F(MembershipTest, ExtremeRates) {
  auto all = SampleMembership(universe_, 1.0, 3);
  auto none = SampleMembership(universe_, 0.0, 3);
  ASSERT_TRUE(all.ok() && none.ok());
  EXPECT_EQ(all->member_count(), universe_.size());
  EXPECT_EQ(none->member_count(), 0u);
  EXPECT_FALSE(SampleMembership(universe_, 1.5, 3).ok());
  EXPECT_FALSE(SampleMembership(universe_, -0.1, 3).ok());
}

// 99.9% two-sided interval of Binomial(10000, 0.5) from the exact CDF.
TEST_F(MembershipTest, HalfRateCountWithinBinomialInterval) {
  for (uint64_t seed : {1, 2, 3}) {
    auto c = SampleMembership(universe_, 0.5, seed);
    ASSERT_TRUE(c.ok());
    EXPECT_GE(c->member_count(), 4836u);
    EXPECT_LE(c->member_count(), 5164u);
  }
}

TEST_F(MembershipTest, BitsAreKeyedByIdNotPosition) {
  std::vector<size_t> order(universe_.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(11);
  std::shuffle(order.begin(), order.end(), rng);
  const Universe shuffled = universe_.Select(order);
  auto a = SampleMembership(universe_, 0.3, 42);
  auto b = SampleMembership(shuffled, 0.3, 42);
  for (size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(b->member_bits[i], a->member_bits[order[i]]);
  }
  auto again = SampleMembership(universe_, 0.3, 42);
  EXPECT_EQ(a->member_bits, again->member_bits);
}

TEST(MembershipProperty, MeanSizeMatchesRateOverSeeds) {
  auto u = *GenerateUniverse({.n = 200, .dim = 1, .num_classes = 2});
  for (double p : {0.1, 0.5, 0.9}) {
    double sum = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
      sum += SampleMembership(u, p, s)->member_count();
    }
    const double mean = sum / seeds;
    const double se = std::sqrt(200 * p * (1 - p) / seeds);
    EXPECT_NEAR(mean, 200 * p, 3 * se) << "p=" << p;
  }
}

TEST_F(MembershipTest, TrainingSetHoldsMembersInOrder) {
  auto c = SampleMembership(universe_, 0.5, 9);
  Dataset t = TrainingSet(universe_, *c);
  EXPECT_EQ(t.size(), c->member_count());
  for (size_t i = 0; i < t.size(); ++i) {
    EXPECT_TRUE(c->member_bits[*universe_.IndexOf(t.id(i))]);
  }
}

class AuditPairTest : public ::testing::Test {
 protected:
  void SetUp() override {
    universe_ = *GenerateUniverse({.n = 20, .dim = 3, .num_classes = 2});
    for (size_t i = 0; i < universe_.size(); ++i) {
      if (universe_.label(i) == 0) class0_.push_back(universe_.id(i));
    }
  }
  Universe universe_;
  std::vector<ExampleId> class0_;
};

TEST_F(AuditPairTest, KeepsOneAndTwoTargetClassExamples) {
  ASSERT_EQ(class0_.size(), 10u);
  auto pair = BuildAuditPair(universe_, 0, class0_[0], class0_[1]);
  ASSERT_TRUE(pair.ok()) << pair.status();
  EXPECT_EQ(pair->d.ClassCounts()[0], 1);
  EXPECT_EQ(pair->d_prime.ClassCounts()[0], 2);
  EXPECT_EQ(pair->d.ClassCounts()[1], 10);
  EXPECT_EQ(pair->d_prime.size(), pair->d.size() + 1);
  EXPECT_TRUE(IsNeighboringPair(*pair));
}

TEST_F(AuditPairTest, SymmetricDifferenceIsTheExtraExample) {
  auto pair = *BuildAuditPair(universe_, 0, class0_[2], class0_[5]);
  std::set<ExampleId> d(pair.d.ids().begin(), pair.d.ids().end());
  std::set<ExampleId> dp(pair.d_prime.ids().begin(), pair.d_prime.ids().end());
  std::vector<ExampleId> diff;
  std::set_symmetric_difference(d.begin(), d.end(), dp.begin(), dp.end(),
                                std::back_inserter(diff));
  EXPECT_EQ(diff, std::vector<ExampleId>{class0_[5]});
}

TEST_F(AuditPairTest, RejectsBadIds) {
  ExampleId other_class = -1;
  for (size_t i = 0; i < universe_.size(); ++i) {
    if (universe_.label(i) == 1) other_class = universe_.id(i);
  }
  EXPECT_FALSE(BuildAuditPair(universe_, 0, class0_[0], class0_[0]).ok());
  EXPECT_FALSE(BuildAuditPair(universe_, 0, class0_[0], 999).ok());
  EXPECT_FALSE(BuildAuditPair(universe_, 0, class0_[0], other_class).ok());
}

TEST(CsvTest, ReadsLabelColumnAnywhereAndNormalizes) {
  std::istringstream in("a,label,b\n1,0,10\n3,1,10\n5,1,10\n");
  auto ds = ReadCsv(in, {.normalize = true});
  ASSERT_TRUE(ds.ok()) << ds.status();
  EXPECT_EQ(ds->dim(), 2);
  EXPECT_EQ(ds->num_classes(), 2);
  EXPECT_EQ(ds->id(2), 2);
  auto mean = ds->Mean();
  EXPECT_NEAR(mean[0], 0.0, 1e-15);
  EXPECT_NEAR(mean[1], 0.0, 1e-15);
  double ss = 0.0;
  for (size_t i = 0; i < 3; ++i) ss += ds->features(i)[0] * ds->features(i)[0];
  EXPECT_NEAR(ss / 3, 1.0, 1e-12);
  // Constant column is centred but not scaled.
  EXPECT_EQ(ds->features(0)[1], 0.0);
}

TEST(CsvTest, RawModeKeepsValuesAndRoundTrips) {
  auto u = *GenerateUniverse({.n = 30, .dim = 4, .num_classes = 3, .seed = 5});
  std::stringstream buffer;
  WriteCsv(u, buffer);
  auto back = ReadCsv(buffer, {.normalize = false});
  ASSERT_TRUE(back.ok());
  EXPECT_TRUE(*back == u);
}

TEST(CsvTest, RejectsMalformedInput) {
  std::istringstream no_label("a,b\n1,2\n");
  EXPECT_FALSE(ReadCsv(no_label, {}).ok());
  std::istringstream ragged("a,label\n1,0\n2\n");
  EXPECT_FALSE(ReadCsv(ragged, {}).ok());
  std::istringstream bad_number("a,label\nx,0\n");
  EXPECT_FALSE(ReadCsv(bad_number, {}).ok());
  std::istringstream bad_label("a,label\n1,-1\n");
  EXPECT_FALSE(ReadCsv(bad_label, {}).ok());
}

TEST(DatasetTest, CreateValidatesInvariants) {
  EXPECT_FALSE(Dataset::Create(2, 2, {0, 0}, {0, 1}, {1, 2, 3, 4}).ok());
  EXPECT_FALSE(Dataset::Create(2, 2, {0, 1}, {0, 2}, {1, 2, 3, 4}).ok());
  EXPECT_FALSE(Dataset::Create(2, 2, {0, 1}, {0, 1}, {1, 2, 3}).ok());
  EXPECT_FALSE(
      Dataset::Create(1, 2, {0}, {0}, {std::nan("")}).ok());
  EXPECT_TRUE(Dataset::Create(2, 2, {4, 9}, {0, 1}, {1, 2, 3, 4}).ok());
}

TEST(ExactSumTest, OrderIndependent) {
  std::vector<double> v = {1e16, 1.0, -1e16, 3.0, 1e-3, -2.5, 7e15};
  const double reference = ExactSum(v);
  std::sort(v.begin(), v.end());
  do {
    ASSERT_EQ(ExactSum(v), reference);
  } while (std::next_permutation(v.begin(), v.end()));
  EXPECT_EQ(ExactSum(std::vector<double>{0.1, 0.2, 0.3}), 0.6);
}

}  // namespace
}  // namespace privaudit::data
