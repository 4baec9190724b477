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
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "privaudit/accountant/rdp.h"
#include "privaudit/data/dataset.h"
#include "privaudit/data/universe.h"
#include "privaudit/learners/exponential_mechanism.h"
#include "privaudit/learners/model.h"
#include "privaudit/learners/serialize.h"
#include "privaudit/learners/trainers.h"

namespace privaudit::learners {
namespace {

using data::Dataset;

// Cross-entropy of a linear softmax model written out longhand.
double OracleLogisticLoss(const std::vector<double>& w, const std::vector<double>& b,
                          const std::vector<double>& x, int y) {
  const size_t k = b.size();
  const size_t d = x.size();
  std::vector<double> z(k);
  for (size_t c = 0; c < k; ++c) {
    z[c] = b[c];
    for (size_t j = 0; j < d; ++j) z[c] += w[c * d + j] * x[j];
  }
  double denom = 0.0;
  for (double v : z) denom += std::exp(v);
  return std::log(denom) - z[y];
}

Dataset Universe(int n, int dim, double separation, uint64_t seed) {
  return *data::GenerateUniverse({.n = n,
                                  .dim = dim,
                                  .num_classes = 2,
                                  .separation = separation,
                                  .seed = seed});
}

ModelArtifact LogisticModel(std::vector<double> params, int dim, int k) {
  ModelArtifact m;
  m.arch = {.kind = ModelKind::kLogistic, .dim = dim, .num_classes = k};
  m.params = std::move(params);
  return m;
}

TEST(ModelTest, LogisticCrossEntropyMatchesHandComputation) {
  // W = [[0.5, -0.25], [-0.3, 0.8]], b = [0.1, -0.2], x = [1, 2]:
  // logits [0.1, 1.1], loss(y = 1) = log(e^0.1 + e^1.1) - 1.1.
  auto model = LogisticModel({0.5, -0.25, -0.3, 0.8, 0.1, -0.2}, 2, 2);
  std::vector<double> x = {1.0, 2.0};
  auto p = EvaluateOne(model, x, 1);
  ASSERT_TRUE(p.ok()) << p.status();
  EXPECT_NEAR(p->loss, 0.3132616875182228, 1e-12);
  EXPECT_NEAR(p->confidence[1], std::exp(-0.3132616875182228), 1e-12);
  EXPECT_NEAR(p->confidence[0] + p->confidence[1], 1.0, 1e-15);
}

TEST(ModelTest, EvaluateRejectsMismatchedShapes) {
  auto model = LogisticModel(std::vector<double>(6, 0.0), 2, 2);
  std::vector<double> x3 = {1.0, 2.0, 3.0};
  std::vector<double> x2 = {1.0, 2.0};
  EXPECT_FALSE(EvaluateOne(model, x3, 0).ok());
  EXPECT_FALSE(EvaluateOne(model, x2, 2).ok());
  model.params.pop_back();
  EXPECT_FALSE(EvaluateOne(model, x2, 0).ok());
}

void CheckGradientsByFiniteDifferences(const Architecture& arch, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.7);
  std::uniform_int_distribution<int> label(0, arch.num_classes - 1);
  std::uniform_int_distribution<size_t> coord(0, arch.ParameterCount() - 1);
  ModelArtifact model;
  model.arch = arch;
  const double h = 1e-6;
  int probes = 0;
  for (int trial = 0; trial < 10; ++trial) {
    model.params.resize(arch.ParameterCount());
    for (double& v : model.params) v = normal(rng);
    std::vector<double> x(arch.dim);
    for (double& v : x) v = normal(rng);
    const int y = label(rng);
    std::vector<double> grad;
    const double loss = LossAndGradient(arch, model.params, x, y, grad);
    EXPECT_NEAR(loss, EvaluateOne(model, x, y)->loss, 1e-12);
    for (int probe = 0; probe < 10; ++probe, ++probes) {
      const size_t k = coord(rng);
      const double saved = model.params[k];
      model.params[k] = saved + h;
      const double up = EvaluateOne(model, x, y)->loss;
      model.params[k] = saved - h;
      const double down = EvaluateOne(model, x, y)->loss;
      model.params[k] = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(grad[k]), 1e-4});
      EXPECT_LE(std::abs(numeric - grad[k]) / scale, 1e-4)
          << "param " << k << " analytic " << grad[k] << " numeric " << numeric;
    }
  }
  EXPECT_EQ(probes, 100);
}

TEST(ModelTest, LogisticGradientMatchesFiniteDifferences) {
  CheckGradientsByFiniteDifferences(
      {.kind = ModelKind::kLogistic, .dim = 5, .num_classes = 3}, 1);
}

TEST(ModelTest, MlpGradientMatchesFiniteDifferences) {
  CheckGradientsByFiniteDifferences(
      {.kind = ModelKind::kMlp, .dim = 4, .num_classes = 3, .hidden = 7}, 2);
}

TEST(SgdTest, SeparableDataIsLearnedToHighHeldOutAccuracy) {
  Dataset all = Universe(2000, 8, 6.0, 3);
  std::vector<bool> first(all.size());
  for (size_t i = 0; i < all.size(); ++i) first[i] = i < 1000;
  Dataset train = all.Filter(first);
  for (auto&& b : first) b = !b;
  Dataset test = all.Filter(first);
  auto model = TrainSgd(train, {.model = ModelKind::kLogistic, .epochs = 20}, 7);
  ASSERT_TRUE(model.ok()) << model.status();
  EXPECT_GE(*Accuracy(*model, test), 0.99);
}

TEST(SgdTest, MlpLearnsSeparableData) {
  Dataset all = Universe(1000, 4, 6.0, 4);
  auto model = TrainSgd(
      all, {.model = ModelKind::kMlp, .hidden = 8, .learning_rate = 0.1, .epochs = 20},
      1);
  ASSERT_TRUE(model.ok());
  EXPECT_GE(*Accuracy(*model, all), 0.99);
}

TEST(SgdTest, DeterministicInSeedAndSeedSensitive) {
  Dataset train = Universe(200, 3, 2.0, 5);
  SgdHyper hyper{.model = ModelKind::kMlp, .hidden = 4, .epochs = 3, .batch_size = 16};
  auto a = TrainSgd(train, hyper, 11);
  auto b = TrainSgd(train, hyper, 11);
  auto c = TrainSgd(train, hyper, 12);
  EXPECT_EQ(a->params, b->params);
  EXPECT_NE(a->params, c->params);
  EXPECT_EQ(a->stats.steps, 3 * 13);
}

TEST(SgdTest, ZeroEpochsReturnsInitialization) {
  Dataset train = Universe(50, 3, 2.0, 6);
  auto logistic = TrainSgd(train, {.epochs = 0}, 1);
  EXPECT_EQ(logistic->params, std::vector<double>(8, 0.0));
  auto mlp = TrainSgd(train, {.model = ModelKind::kMlp, .hidden = 5, .epochs = 0}, 1);
  auto again = TrainSgd(train, {.model = ModelKind::kMlp, .hidden = 5, .epochs = 3}, 1);
  EXPECT_EQ(mlp->params.size(), mlp->arch.ParameterCount());
  EXPECT_NE(mlp->params, again->params);
  EXPECT_EQ(mlp->stats.steps, 0);
}

TEST(SgdTest, DivergenceReportsFailingStep) {
  // Overlapping classes keep the gradient away from zero; cross-entropy
  // gradients are bounded, so only a near-overflow step size diverges.
  Dataset train = Universe(20, 3, 0.0, 7);
  auto model = TrainSgd(train,
                        {.learning_rate = std::numeric_limits<double>::max(),
                         .epochs = 10,
                         .batch_size = 100},
                        1);
  ASSERT_FALSE(model.ok());
  EXPECT_EQ(model.status().code(), absl::StatusCode::kInternal);
  auto step = FailedStep(model.status());
  ASSERT_TRUE(step.has_value());
  EXPECT_GE(*step, 1);
  EXPECT_LT(*step, 10);
}

TEST(SgdTest, RejectsBadInputs) {
  Dataset train = Universe(20, 3, 2.0, 7);
  EXPECT_FALSE(TrainSgd(train, {.model = ModelKind::kMemorizing}, 1).ok());
  EXPECT_FALSE(TrainSgd(train, {.learning_rate = 0.0}, 1).ok());
  EXPECT_FALSE(TrainSgd(train, {.batch_size = 0}, 1).ok());
  EXPECT_FALSE(TrainSgd(Dataset(), {}, 1).ok());
}

TEST(DpSgdTest, NoNoiseNoClipFullBatchEqualsSgd) {
  Dataset train = Universe(120, 4, 2.0, 8);
  for (ModelKind kind : {ModelKind::kLogistic, ModelKind::kMlp}) {
    auto sgd = TrainSgd(train,
                        {.model = kind, .hidden = 6, .learning_rate = 0.3,
                         .epochs = 15, .batch_size = 1000},
                        21);
    auto dp = TrainDpSgd(train,
                         {.model = kind, .hidden = 6, .learning_rate = 0.3,
                          .clip = false, .noise_multiplier = 0.0,
                          .sample_rate = 1.0, .steps = 15},
                         21);
    ASSERT_TRUE(sgd.ok() && dp.ok());
    EXPECT_EQ(sgd->params, dp->params) << ModelKindName(kind);
    ASSERT_TRUE(dp->budget.has_value());
    EXPECT_TRUE(dp->budget->non_private);
  }
}

TEST(DpSgdTest, ClippedNormsNeverExceedBound) {
  Dataset train = Universe(200, 4, 2.0, 9);
  auto model = TrainDpSgd(train,
                          {.model = ModelKind::kMlp, .hidden = 6, .clip_norm = 0.05,
                           .noise_multiplier = 1.0, .sample_rate = 0.1, .steps = 30},
                          3);
  ASSERT_TRUE(model.ok()) << model.status();
  EXPECT_LE(model->stats.max_clipped_norm, 0.05 * (1 + 1e-12));
  EXPECT_GT(model->stats.max_clipped_norm, 0.0);
}

TEST(DpSgdTest, AttachedBudgetIsTheAccountantsBudget) {
  Dataset train = Universe(100, 3, 2.0, 10);
  auto model = TrainDpSgd(
      train, {.noise_multiplier = 1.1, .sample_rate = 0.05, .steps = 200}, 4);
  ASSERT_TRUE(model.ok());
  ASSERT_TRUE(model->budget.has_value());
  auto direct = accountant::DpSgdBudget(0.05, 1.1, 200, 1e-5);
  EXPECT_EQ(model->budget->epsilon, direct->epsilon);
  EXPECT_EQ(*accountant::RecomputeEpsilon(*model->budget), model->budget->epsilon);
  EXPECT_TRUE(model->budget->formal_guarantee());
}

TEST(DpSgdTest, ZeroNoiseIsNonPrivate) {
  Dataset train = Universe(100, 3, 2.0, 10);
  auto model = TrainDpSgd(train, {.noise_multiplier = 0.0, .steps = 5}, 4);
  ASSERT_TRUE(model.ok());
  EXPECT_TRUE(model->budget->non_private);
  EXPECT_TRUE(std::isinf(model->budget->epsilon));
}

TEST(DpSgdTest, DeterministicInSeed) {
  Dataset train = Universe(100, 3, 2.0, 11);
  DpSgdHyper hyper{.sample_rate = 0.2, .steps = 20};
  EXPECT_EQ(TrainDpSgd(train, hyper, 5)->params, TrainDpSgd(train, hyper, 5)->params);
  EXPECT_NE(TrainDpSgd(train, hyper, 5)->params, TrainDpSgd(train, hyper, 6)->params);
}

TEST(DpSgdTest, RejectsBadInputs) {
  Dataset train = Universe(20, 3, 2.0, 7);
  EXPECT_FALSE(TrainDpSgd(train, {.sample_rate = 0.0}, 1).ok());
  EXPECT_FALSE(TrainDpSgd(train, {.sample_rate = 1.5}, 1).ok());
  EXPECT_FALSE(TrainDpSgd(train, {.clip_norm = 0.0}, 1).ok());
  EXPECT_FALSE(TrainDpSgd(train, {.noise_multiplier = -1.0}, 1).ok());
  EXPECT_FALSE(TrainDpSgd(train, {.delta = 0.0}, 1).ok());
}

TEST(MemorizingTest, ZeroLossOnMembersPositiveOffMembers) {
  Dataset all = Universe(200, 4, 2.0, 12);
  std::vector<bool> keep(all.size());
  for (size_t i = 0; i < all.size(); ++i) keep[i] = i % 2 == 0;
  Dataset train = all.Filter(keep);
  auto model = TrainMemorizing(train, {}, 0);
  ASSERT_TRUE(model.ok());
  EXPECT_EQ(model->arch.bandwidth, 4.0);
  auto predictions = Evaluate(*model, all);
  ASSERT_TRUE(predictions.ok());
  for (size_t i = 0; i < all.size(); ++i) {
    const auto& p = (*predictions)[i];
    if (keep[i]) {
      EXPECT_EQ(p.loss, 0.0);
      EXPECT_EQ(p.confidence[all.label(i)], 1.0);
    } else {
      EXPECT_GT(p.loss, 0.0);
      EXPECT_LT(p.confidence[all.label(i)], 1.0);
    }
    EXPECT_NEAR(p.confidence[0] + p.confidence[1], 1.0, 1e-12);
  }
}

TEST(SerializeTest, RoundTripIsBitExact) {
  Dataset train = Universe(60, 3, 2.0, 13);
  for (auto model : {*TrainSgd(train, {.model = ModelKind::kMlp, .hidden = 3,
                                       .epochs = 2},
                                1),
                     *TrainMemorizing(train, {.bandwidth = 0.3}, 0)}) {
    auto parsed = ParseModel(SerializeModel(model));
    ASSERT_TRUE(parsed.ok()) << parsed.status();
    EXPECT_EQ(parsed->arch, model.arch);
    EXPECT_EQ(parsed->params, model.params);
  }
}

TEST(SerializeTest, RejectsCorruptFiles) {
  EXPECT_FALSE(ParseModel("").ok());
  EXPECT_FALSE(ParseModel("hello\n1\n").ok());
  EXPECT_FALSE(ParseModel("privaudit-model/1 logistic dim=1 classes=2 hidden=0 "
                          "memory=0 bandwidth=1\n1\n2\n3\n")
                   .ok());
  EXPECT_FALSE(ParseModel("privaudit-model/1 logistic dim=1 classes=2 hidden=0 "
                          "memory=0 bandwidth=1\n1\n2\n3\nx\n")
                   .ok());
  EXPECT_TRUE(ParseModel("privaudit-model/1 logistic dim=1 classes=2 hidden=0 "
                         "memory=0 bandwidth=1\n1\n2\n3\n4\n")
                  .ok());
}

TEST(SerializeTest, BudgetJsonUsesNullForInfiniteEpsilon) {
  auto budget = *accountant::DpSgdBudget(0.1, 0.0, 10, 1e-5);
  auto j = BudgetJson(budget);
  EXPECT_TRUE(j["epsilon"].is_null());
  EXPECT_EQ(j["formal_guarantee"], false);
}

// Exponential mechanism.

Dataset SmallDataset(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels) {
  std::vector<data::ExampleId> ids(rows.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<double> features;
  for (const auto& r : rows) features.insert(features.end(), r.begin(), r.end());
  return *Dataset::Create(rows.empty() ? 2 : rows[0].size(), 2, ids, labels,
                          features);
}

TEST(ExponentialMechanismTest, IdenticalCandidatesAreUniform) {
  Architecture arch{.kind = ModelKind::kLogistic, .dim = 2, .num_classes = 2};
  auto one = RandomParameterGrid(arch, 1, 1.0, 3);
  std::vector<ModelArtifact> grid(5, one[0]);
  Dataset d = SmallDataset({{1, 2}, {-1, 0.5}}, {0, 1});
  auto log_p = ExponentialMechanismLogProbabilities(grid, {}, d);
  ASSERT_TRUE(log_p.ok());
  for (double lp : *log_p) EXPECT_NEAR(lp, -std::log(5.0), 1e-14);
}

TEST(ExponentialMechanismTest, OddsAreExpOfLossDifference) {
  // Two candidates, one example, losses inside [0, 5] so clamping is inert.
  auto a = LogisticModel({0.2, 0.0, -0.1, 0.3, 0.0, 0.1}, 2, 2);
  auto b = LogisticModel({-0.4, 0.1, 0.2, 0.0, 0.3, 0.0}, 2, 2);
  std::vector<ModelArtifact> grid = {a, b};
  Dataset d = SmallDataset({{1.0, -1.0}}, {1});
  const double la = OracleLogisticLoss({0.2, 0.0, -0.1, 0.3}, {0.0, 0.1}, {1, -1}, 1);
  const double lb = OracleLogisticLoss({-0.4, 0.1, 0.2, 0.0}, {0.3, 0.0}, {1, -1}, 1);
  auto log_p = ExponentialMechanismLogProbabilities(grid, {.lo = 0, .hi = 5}, d);
  ASSERT_TRUE(log_p.ok());
  EXPECT_NEAR((*log_p)[0] - (*log_p)[1], lb - la, 1e-12);
}

TEST(ExponentialMechanismTest, NeighbouringLogRatiosBoundedByTwiceLossRange) {
  Architecture arch{.kind = ModelKind::kLogistic, .dim = 2, .num_classes = 2};
  auto grid = RandomParameterGrid(arch, 16, 3.0, 9);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      rows.push_back({normal(rng), normal(rng)});
      labels.push_back(i % 2);
    }
    Dataset d = SmallDataset(rows, labels);
    rows.push_back({normal(rng) * 3, normal(rng) * 3});
    labels.push_back(trial % 2);
    Dataset d_prime = SmallDataset(rows, labels);
    auto p = *ExponentialMechanismLogProbabilities(grid, {}, d);
    auto q = *ExponentialMechanismLogProbabilities(grid, {}, d_prime);
    for (size_t j = 0; j < grid.size(); ++j) {
      worst = std::max(worst, std::abs(p[j] - q[j]));
    }
  }
  EXPECT_LE(worst, 2.0 + 1e-9);
  EXPECT_GT(worst, 0.5);  // the grid actually exercises the bound
}

TEST(ExponentialMechanismTest, SamplingFrequenciesMatchProbabilities) {
  Architecture arch{.kind = ModelKind::kLogistic, .dim = 2, .num_classes = 2};
  auto grid = RandomParameterGrid(arch, 4, 1.0, 17);
  Dataset d = SmallDataset({{1, 0}, {0, 1}, {-1, -1}}, {0, 1, 1});
  auto log_p = *ExponentialMechanismLogProbabilities(grid, {}, d);
  const int draws = 100000;
  std::vector<int> counts(grid.size(), 0);
  for (int s = 0; s < draws; ++s) {
    ++counts[*SampleExponentialMechanism(grid, {}, d, s)];
  }
  for (size_t j = 0; j < grid.size(); ++j) {
    const double p = std::exp(log_p[j]);
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(static_cast<double>(counts[j]) / draws, p, 3 * se) << j;
  }
}

TEST(ExponentialMechanismTest, RejectsEmptyGridAndBadBounds) {
  Dataset d = SmallDataset({{1, 0}}, {0});
  std::vector<ModelArtifact> none;
  EXPECT_FALSE(ExponentialMechanismLogProbabilities(none, {}, d).ok());
  Architecture arch{.kind = ModelKind::kLogistic, .dim = 2, .num_classes = 2};
  auto grid = RandomParameterGrid(arch, 2, 1.0, 1);
  EXPECT_FALSE(
      ExponentialMechanismLogProbabilities(grid, {.lo = 1, .hi = 0}, d).ok());
}

}  // namespace
}  // namespace privaudit::learners
