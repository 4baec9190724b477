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

#include "privaudit/cli/experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "absl/strings/str_cat.h"
#include "privaudit/accountant/rdp.h"
#include "privaudit/attack/pipeline.h"
#include "privaudit/attack/protocols.h"
#include "privaudit/attack/scorers.h"
#include "privaudit/audit/audit.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/parallel.h"
#include "privaudit/common/status_macros.h"
#include "privaudit/condense/condense.h"
#include "privaudit/data/membership.h"
#include "privaudit/data/universe.h"
#include "privaudit/learners/exponential_mechanism.h"
#include "privaudit/learners/serialize.h"
#include "privaudit/metrics/metrics.h"

#ifndef PRIVAUDIT_VERSION
#define PRIVAUDIT_VERSION "unknown"
#endif

namespace privaudit::cli {
namespace {

using Json = nlohmann::ordered_json;

// Seed streams owned by the experiments.
constexpr uint64_t kUniverseStream = 81;
constexpr uint64_t kChallengeStream = 82;
constexpr uint64_t kTargetStream = 83;
constexpr uint64_t kCalibrationChallengeStream = 85;
constexpr uint64_t kCalibrationTargetStream = 86;
constexpr uint64_t kShadowStream = 87;
constexpr uint64_t kNonMemberStream = 88;
constexpr uint64_t kCalibrationNonMemberStream = 89;
constexpr uint64_t kResponseStream = 90;
constexpr uint64_t kMixtureStream = 91;
constexpr uint64_t kPairUniverseStream = 92;
constexpr uint64_t kPairSubsetStream = 93;
constexpr uint64_t kPairInitStream = 94;
constexpr uint64_t kCanaryStream = 95;
constexpr uint64_t kAuditStream = 96;

absl::Status InContext(const absl::Status& status, std::string_view context) {
  if (status.ok()) return status;
  return absl::Status(status.code(), absl::StrCat(std::string(context), ": ",
                                                  std::string(status.message())));
}

Json Finite(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};

// Normal-approximation interval for the mean of `xs`.
MeanCi Summarize(const std::vector<double>& xs, double confidence) {
  MeanCi out;
  if (xs.empty()) return out;
  out.mean = ExactSum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  std::vector<double> sq(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - out.mean) * (xs[i] - out.mean);
  const double sd = std::sqrt(ExactSum(sq) / static_cast<double>(xs.size() - 1));
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
  out.half_width = z * sd / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

Json MeanCiJson(const MeanCi& m, double confidence) {
  return Json{{"mean", m.mean}, {"ci_half_width", m.half_width}, {"confidence", confidence}};
}

Json EstimateJson(const metrics::EpsEstimate& e,
                  const std::optional<metrics::NaiveEstimate>& naive) {
  Json j;
  j["eps_lb"] = Finite(e.eps_lb);
  j["no_evidence"] = e.no_evidence;
  j["confidence"] = e.confidence;
  j["tpr_lower"] = e.tpr_lower;
  j["fpr_upper"] = e.fpr_upper;
  j["tp"] = e.tp;
  j["fp"] = e.fp;
  j["n_pos"] = e.n_pos;
  j["n_neg"] = e.n_neg;
  j["eps_naive"] = {{"value", naive ? Finite(naive->epsilon) : Json(nullptr)},
                    {"diagnostic", true}};
  return j;
}

// Best bound and naive read-off of one ROC curve, wrapped for a report.
absl::StatusOr<Json> EmpiricalBoundJson(const metrics::RocCurve& curve,
                                        double confidence) {
  ASSIGN_OR_RETURN(auto lb, metrics::BestEpsLowerBound(curve, confidence));
  std::optional<metrics::NaiveEstimate> naive;
  if (auto n = metrics::EpsPointEstimateNaive(curve); n.ok()) naive = *n;
  return Json{{"empirical_lower_bound", EstimateJson(lb, naive)}};
}

void AddInvariant(Report& report, std::string name, bool ok, std::string detail) {
  report.invariants.push_back({std::move(name), ok, std::move(detail)});
}

absl::StatusOr<data::Universe> SeededUniverse(data::UniverseSpec spec, uint64_t seed) {
  spec.seed = seed;
  return data::GenerateUniverse(spec);
}

std::vector<data::ExampleId> SubsetIds(const attack::PipelineRun& run,
                                       const data::Dataset& t) {
  const auto ids = run.condensed ? run.condensed->examples.ids() : t.ids();
  return {ids.begin(), ids.end()};
}

// Noise multiplier reaching `target_epsilon` for the pipeline's schedule.
absl::StatusOr<NamedPipeline> Calibrated(NamedPipeline p) {
  if (p.target_epsilon > 0.0) {
    const auto& h = p.pipeline.dpsgd;
    ASSIGN_OR_RETURN(p.pipeline.dpsgd.noise_multiplier,
                     accountant::CalibrateNoiseMultiplier(p.target_epsilon, h.sample_rate,
                                                          h.steps, h.delta));
  }
  return p;
}

// ---------------------------------------------------------------------------
// protocol_gap

struct GapSeed {
  size_t t_size = 0;
  size_t s_size = 0;
  double threshold_full = 0.0;
  double threshold_subset = 0.0;
  double subset_advantage = 0.0;
  double full_advantage = 0.0;
  double oracle_advantage = 0.0;
  size_t subset_graded = 0;
  size_t full_graded = 0;
  std::optional<metrics::RocCurve> roc;
};

absl::StatusOr<GapSeed> RunGapSeed(const ExperimentConfig& config, uint64_t s) {
  const auto& p = config.protocol_gap;
  const auto& spec = config.pipeline;
  ASSIGN_OR_RETURN(auto u, SeededUniverse(config.universe,
                                          DeriveSeed(config.seed, kUniverseStream, s)));
  std::optional<attack::ShadowEnsemble> shadows;
  if (p.scorer == "lira") {
    ASSIGN_OR_RETURN(shadows,
                     attack::TrainShadows(u, spec,
                                          {.count = p.shadows, .sampling_rate = p.sampling_rate},
                                          DeriveSeed(config.seed, kShadowStream, s)));
  }
  auto score = [&](const learners::ModelArtifact& model) {
    return shadows ? attack::ScoreLira(model, u, *shadows)
                   : attack::ScoreLossThreshold(model, u);
  };
  if (spec.condense == attack::CondenseStep::kDmLinear &&
      spec.dm_init == condense::InitKind::kGaussianCentered) {
    return absl::InvalidArgumentError(
        "the subset-restricted game needs S initialized from T; "
        "gaussian_centered initialization synthesizes new rows");
  }

  // Thresholds come from a calibration run on a fresh challenge.
  ASSIGN_OR_RETURN(auto cal_c,
                   data::SampleMembership(u, p.sampling_rate,
                                          DeriveSeed(config.seed, kCalibrationChallengeStream, s)));
  const data::Dataset cal_t = data::TrainingSet(u, cal_c);
  ASSIGN_OR_RETURN(auto cal_run,
                   attack::RunPipeline(spec, cal_t,
                                       DeriveSeed(config.seed, kCalibrationTargetStream, s)));
  ASSIGN_OR_RETURN(auto cal_scores, score(cal_run.model));
  auto cal_s = SubsetIds(cal_run, cal_t);
  ASSIGN_OR_RETURN(auto cal_s_prime,
                   attack::SampleNonMemberSubset(
                       cal_t, cal_s, cal_s.size(),
                       DeriveSeed(config.seed, kCalibrationNonMemberStream, s)));
  std::vector<double> cal_sub_scores;
  std::vector<bool> cal_sub_labels;
  for (auto [ids, member] : {std::pair{&cal_s, true}, std::pair{&cal_s_prime, false}}) {
    for (auto id : *ids) {
      cal_sub_scores.push_back(cal_scores.scores[*u.IndexOf(id)]);
      cal_sub_labels.push_back(member);
    }
  }

  GapSeed out;
  out.threshold_full = attack::BestThreshold(cal_scores.scores, cal_c.member_bits);
  out.threshold_subset = attack::BestThreshold(cal_sub_scores, cal_sub_labels);

  ASSIGN_OR_RETURN(auto c, data::SampleMembership(
                               u, p.sampling_rate,
                               DeriveSeed(config.seed, kChallengeStream, s)));
  const data::Dataset t = data::TrainingSet(u, c);
  ASSIGN_OR_RETURN(auto run, attack::RunPipeline(spec, t,
                                                 DeriveSeed(config.seed, kTargetStream, s)));
  ASSIGN_OR_RETURN(auto scores, score(run.model));
  const auto subset = SubsetIds(run, t);
  ASSIGN_OR_RETURN(auto s_prime,
                   attack::SampleNonMemberSubset(t, subset, subset.size(),
                                                 DeriveSeed(config.seed, kNonMemberStream, s)));
  ASSIGN_OR_RETURN(auto full, attack::EvaluateFullUniverse(scores, c, out.threshold_full));
  ASSIGN_OR_RETURN(auto sub, attack::EvaluateSubsetRestricted(scores, subset, s_prime,
                                                              out.threshold_subset));
  ASSIGN_OR_RETURN(auto roc, metrics::ComputeRoc(scores.scores, c.member_bits));

  const double n = static_cast<double>(u.size());
  out.t_size = t.size();
  out.s_size = subset.size();
  out.subset_advantage = sub.advantage;
  out.full_advantage = full.advantage;
  out.oracle_advantage = 1.0 - 2.0 * out.t_size / n + 2.0 * out.s_size / n;
  out.subset_graded = sub.graded;
  out.full_graded = full.graded;
  out.roc = std::move(roc);
  return out;
}

absl::Status RunProtocolGap(const ExperimentConfig& config, Report& report) {
  const auto& p = config.protocol_gap;
  const auto seeds = static_cast<size_t>(p.seeds);
  std::vector<absl::StatusOr<GapSeed>> per(seeds, absl::UnknownError("not run"));
  ParallelFor(seeds, config.jobs, [&](size_t s) { per[s] = RunGapSeed(config, s); });

  std::vector<double> subset_adv, full_adv, oracle_adv, auc;
  Table seeds_table{"protocol_gap_seeds",
                    {"seed", "t_size", "s_size", "threshold_full", "threshold_subset",
                     "subset_advantage", "full_advantage", "subset_oracle_advantage",
                     "full_auc"},
                    {}};
  bool graded_ok = true;
  for (size_t s = 0; s < seeds; ++s) {
    RETURN_IF_ERROR(InContext(per[s].status(), absl::StrCat("seed ", s)));
    const GapSeed& g = *per[s];
    subset_adv.push_back(g.subset_advantage);
    full_adv.push_back(g.full_advantage);
    oracle_adv.push_back(g.oracle_advantage);
    auc.push_back(g.roc->auc);
    graded_ok = graded_ok && g.subset_graded == 2 * g.s_size &&
                g.full_graded == static_cast<size_t>(config.universe.n);
    seeds_table.rows.push_back({s, g.t_size, g.s_size, Finite(g.threshold_full),
                                Finite(g.threshold_subset), g.subset_advantage,
                                g.full_advantage, g.oracle_advantage, g.roc->auc});
  }
  const MeanCi sub = Summarize(subset_adv, p.confidence);
  const MeanCi full = Summarize(full_adv, p.confidence);
  const MeanCi oracle = Summarize(oracle_adv, p.confidence);

  Json& r = report.results;
  r["seeds"] = p.seeds;
  r["scorer"] = p.scorer;
  r["subset_restricted"] = {{"advantage", MeanCiJson(sub, p.confidence)},
                            {"per_seed", subset_adv}};
  r["full_universe"] = {{"advantage", MeanCiJson(full, p.confidence)},
                        {"mean_auc", Summarize(auc, p.confidence).mean},
                        {"per_seed", full_adv}};
  r["subset_oracle_advantage"] = MeanCiJson(oracle, p.confidence);
  if (config.pipeline.condense != attack::CondenseStep::kNone) {
    const double cap = 2.0 * config.pipeline.r_ipc;
    r["cap"] = {{"r_ipc", config.pipeline.r_ipc},
                {"two_r_ipc", cap},
                {"full_universe_within_cap", full.mean <= cap + full.half_width}};
  } else {
    r["cap"] = nullptr;
  }
  ASSIGN_OR_RETURN(r["seed0_full_universe"], EmpiricalBoundJson(*per[0]->roc, p.confidence));
  report.tables.push_back(std::move(seeds_table));
  report.tables.push_back(RocTable("roc_full_universe_seed0", *per[0]->roc));
  AddInvariant(report, "every_example_graded", graded_ok,
               "the full game grades all of U and the subset game grades S and S'");
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// dm_properties

bool BitwiseEqual(const data::Dataset& a, const data::Dataset& b) {
  auto x = a.feature_matrix();
  auto y = b.feature_matrix();
  return x.size() == y.size() &&
         std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

struct DmPair {
  std::string init;
  double mean_error = 0.0;
  double identity_error = 0.0;
  bool replacement_bitwise = false;
};

absl::StatusOr<DmPair> RunDmPair(const ExperimentConfig& config, uint64_t i) {
  const auto& p = config.dm_properties;
  const int dim = config.universe.dim;
  ASSIGN_OR_RETURN(auto u, SeededUniverse(config.universe,
                                          DeriveSeed(config.seed, kPairUniverseStream, i)));
  std::vector<size_t> order(u.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(DeriveSeed(config.seed, kPairSubsetStream, i));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<size_t>(p.t_size));
  const data::Dataset t = u.Select(order);

  const uint64_t init_seed = DeriveSeed(config.seed, kPairInitStream, i);
  ASSIGN_OR_RETURN(auto gaussian, condense::InitGaussianCentered(
                                      p.condensed_size, dim, init_seed,
                                      config.universe.num_classes));
  condense::DmInit init = gaussian;
  if (i % 2 == 1) {
    ASSIGN_OR_RETURN(init, condense::InitSubsetOfT(t, p.condensed_size, init_seed));
  }

  DmPair out;
  out.init = std::string(condense::InitKindName(init.kind));
  ASSIGN_OR_RETURN(auto s, condense::CondenseDmLinear(init, t));
  const auto mean_t = t.Mean();
  double scale = 1.0;
  for (double v : mean_t) scale = std::max(scale, std::abs(v));
  out.mean_error = MaxAbsDiff(s.examples.Mean(), mean_t) / scale;

  // T' of equal mean: four copies of the mean row.
  std::vector<double> copies;
  for (int c = 0; c < 4; ++c) copies.insert(copies.end(), mean_t.begin(), mean_t.end());
  ASSIGN_OR_RETURN(auto replaced_t,
                   data::Dataset::Create(dim, config.universe.num_classes, {0, 1, 2, 3},
                                         {0, 0, 0, 0}, copies));
  ASSIGN_OR_RETURN(auto replaced, condense::CondenseDmLinear(init, replaced_t));
  out.replacement_bitwise = BitwiseEqual(s.examples, replaced.examples);

  // A centred T: every row of T together with its negation.
  std::vector<data::ExampleId> ids;
  std::vector<int> labels;
  std::vector<double> features;
  for (size_t r = 0; r < t.size(); ++r) {
    for (double sign : {1.0, -1.0}) {
      ids.push_back(static_cast<data::ExampleId>(ids.size()));
      labels.push_back(t.label(r));
      for (double v : t.features(r)) features.push_back(sign * v);
    }
  }
  ASSIGN_OR_RETURN(auto centred_t,
                   data::Dataset::Create(dim, config.universe.num_classes, ids, labels,
                                         features));
  ASSIGN_OR_RETURN(auto centred, condense::CondenseDmLinear(gaussian, centred_t));
  out.identity_error = MaxAbsDiff(centred.examples.feature_matrix(),
                                  gaussian.examples.feature_matrix());
  return out;
}

absl::Status RunDmProperties(const ExperimentConfig& config, Report& report) {
  const auto& p = config.dm_properties;
  const auto pairs = static_cast<size_t>(p.pairs);
  std::vector<absl::StatusOr<DmPair>> per(pairs, absl::UnknownError("not run"));
  ParallelFor(pairs, config.jobs, [&](size_t i) { per[i] = RunDmPair(config, i); });

  Table table{"dm_pairs",
              {"pair", "init", "mean_error", "identity_error", "replacement_bitwise"},
              {}};
  double worst_mean = 0.0;
  double worst_identity = 0.0;
  int bitwise = 0;
  for (size_t i = 0; i < pairs; ++i) {
    RETURN_IF_ERROR(InContext(per[i].status(), absl::StrCat("pair ", i)));
    const DmPair& d = *per[i];
    worst_mean = std::max(worst_mean, d.mean_error);
    worst_identity = std::max(worst_identity, d.identity_error);
    bitwise += d.replacement_bitwise;
    table.rows.push_back({i, d.init, d.mean_error, d.identity_error, d.replacement_bitwise});
  }
  report.results = {{"pairs", p.pairs},
                    {"tolerance", p.tolerance},
                    {"max_relative_mean_error", worst_mean},
                    {"max_centred_identity_error", worst_identity},
                    {"replacement_bitwise_identical", bitwise}};
  report.tables.push_back(std::move(table));
  AddInvariant(report, "condensed_mean_equals_training_mean", worst_mean <= p.tolerance,
               absl::StrCat("max relative error ", worst_mean));
  AddInvariant(report, "centred_init_and_centred_t_is_identity",
               worst_identity <= p.tolerance,
               absl::StrCat("max elementwise error ", worst_identity));
  AddInvariant(report, "equal_mean_replacement_is_bitwise_identical", bitwise == p.pairs,
               absl::StrCat(bitwise, " of ", p.pairs, " pairs identical"));
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// dpsgd_table

struct TableCell {
  double test_accuracy = 0.0;
  double advantage = 0.0;
  double auc = 0.0;
  std::optional<accountant::PrivacyBudget> budget;
};

absl::StatusOr<TableCell> RunTableCell(const ExperimentConfig& config,
                                       const attack::PipelineSpec& spec, uint64_t s) {
  const double p = config.dpsgd_table.sampling_rate;
  ASSIGN_OR_RETURN(auto u, SeededUniverse(config.universe,
                                          DeriveSeed(config.seed, kUniverseStream, s)));
  ASSIGN_OR_RETURN(auto cal_c,
                   data::SampleMembership(u, p, DeriveSeed(config.seed,
                                                           kCalibrationChallengeStream, s)));
  ASSIGN_OR_RETURN(auto cal_run,
                   attack::RunPipeline(spec, data::TrainingSet(u, cal_c),
                                       DeriveSeed(config.seed, kCalibrationTargetStream, s)));
  ASSIGN_OR_RETURN(auto cal_scores, attack::ScoreLossThreshold(cal_run.model, u));
  const double threshold = attack::BestThreshold(cal_scores.scores, cal_c.member_bits);

  ASSIGN_OR_RETURN(auto c, data::SampleMembership(
                               u, p, DeriveSeed(config.seed, kChallengeStream, s)));
  ASSIGN_OR_RETURN(auto run, attack::RunPipeline(spec, data::TrainingSet(u, c),
                                                 DeriveSeed(config.seed, kTargetStream, s)));
  std::vector<bool> held_out(c.member_bits.size());
  for (size_t i = 0; i < held_out.size(); ++i) held_out[i] = !c.member_bits[i];
  TableCell out;
  ASSIGN_OR_RETURN(out.test_accuracy, learners::Accuracy(run.model, u.Filter(held_out)));
  ASSIGN_OR_RETURN(auto scores, attack::ScoreLossThreshold(run.model, u));
  ASSIGN_OR_RETURN(auto game, attack::EvaluateFullUniverse(scores, c, threshold));
  ASSIGN_OR_RETURN(auto roc, metrics::ComputeRoc(scores.scores, c.member_bits));
  out.advantage = game.advantage;
  out.auc = roc.auc;
  out.budget = run.model.budget;
  return out;
}

absl::Status RunDpSgdTable(const ExperimentConfig& config, Report& report) {
  const auto& p = config.dpsgd_table;
  std::vector<NamedPipeline> rows;
  for (const auto& row : p.rows) {
    ASSIGN_OR_RETURN(auto calibrated, Calibrated(row));
    rows.push_back(std::move(calibrated));
  }
  const size_t seeds = static_cast<size_t>(p.seeds);
  std::vector<absl::StatusOr<TableCell>> cells(rows.size() * seeds,
                                               absl::UnknownError("not run"));
  ParallelFor(cells.size(), config.jobs, [&](size_t k) {
    cells[k] = RunTableCell(config, rows[k / seeds].pipeline, k % seeds);
  });

  Table table{"dpsgd_table",
              {"technique", "test_accuracy", "epsilon", "formal_guarantee",
               "attack_advantage", "attack_auc"},
              {}};
  Json results = Json::array();
  for (size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> acc, adv, auc;
    for (size_t s = 0; s < seeds; ++s) {
      const auto& cell = cells[r * seeds + s];
      RETURN_IF_ERROR(InContext(cell.status(), absl::StrCat(rows[r].name, " seed ", s)));
      acc.push_back(cell->test_accuracy);
      adv.push_back(cell->advantage);
      auc.push_back(cell->auc);
    }
    const auto& budget = cells[r * seeds]->budget;
    const double conf = metrics::kDefaultConfidence;
    const MeanCi acc_ci = Summarize(acc, conf);
    const MeanCi adv_ci = Summarize(adv, conf);
    const double mean_auc = Summarize(auc, conf).mean;
    Json row;
    row["technique"] = rows[r].name;
    row["pipeline"] = attack::PipelineToJson(rows[r].pipeline);
    row["test_accuracy"] = MeanCiJson(acc_ci, conf);
    row["attack_advantage"] = MeanCiJson(adv_ci, conf);
    row["attack_auc"] = mean_auc;
    row["accountant_upper_bound"] = budget ? learners::BudgetJson(*budget) : Json(nullptr);
    results.push_back(std::move(row));
    table.rows.push_back({rows[r].name, acc_ci.mean,
                          budget ? Finite(budget->epsilon) : Json(nullptr),
                          budget ? budget->formal_guarantee() : false, adv_ci.mean,
                          mean_auc});
    if (budget) {
      auto again = accountant::RecomputeEpsilon(*budget);
      AddInvariant(report, absl::StrCat("accountant_roundtrip_", rows[r].name),
                   again.ok() && *again == budget->epsilon,
                   absl::StrCat("reported ", budget->epsilon, ", recomputed ",
                                again.ok() ? absl::StrCat(*again)
                                           : std::string(again.status().message())));
    }
    if (rows[r].target_epsilon > 0.0) {
      const bool within = budget && budget->epsilon <= rows[r].target_epsilon + 1e-9;
      AddInvariant(report, absl::StrCat("calibrated_epsilon_", rows[r].name), within,
                   absl::StrCat("target ", rows[r].target_epsilon));
    }
  }
  report.results = {{"seeds", p.seeds}, {"rows", std::move(results)}};
  report.tables.push_back(std::move(table));
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// eps_estimation

struct Repeat {
  metrics::RocCurve roc;
  metrics::EpsEstimate lb;
  std::optional<metrics::NaiveEstimate> naive;
};

absl::StatusOr<Repeat> RunRepeat(const ExperimentConfig& config, uint64_t r) {
  const auto& p = config.eps_estimation;
  std::vector<bool> bits(static_cast<size_t>(p.observations));
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = i >= bits.size() / 2;
  const auto scores = audit::RandomizedResponse(
      bits, p.epsilon, DeriveSeed(config.seed, kResponseStream, r));
  Repeat out;
  ASSIGN_OR_RETURN(out.roc, metrics::ComputeRoc(scores, bits));
  ASSIGN_OR_RETURN(out.lb, metrics::BestEpsLowerBound(out.roc, p.confidence));
  if (auto n = metrics::EpsPointEstimateNaive(out.roc); n.ok()) out.naive = *n;
  return out;
}

// Members and non-members alternate. The first `fraction` of the examples
// form group 1, whose scores separate perfectly; the rest are uniform noise.
absl::Status AddSubgroup(const ExperimentConfig& config, Report& report) {
  const auto& p = config.eps_estimation;
  const int n = p.subgroup_n;
  const int special = static_cast<int>(std::lround(p.subgroup_fraction * n));
  Rng rng(DeriveSeed(config.seed, kMixtureStream));
  std::vector<double> scores;
  std::vector<bool> bits;
  std::vector<int> group;
  for (int i = 0; i < n; ++i) {
    const bool member = i % 2 == 0;
    const bool in_group = i < special;
    double s = UnitInterval(rng());
    if (in_group) s = member ? 0.5 + 0.5 * s : 0.5 * s;
    scores.push_back(s);
    bits.push_back(member);
    group.push_back(in_group ? 1 : 0);
  }
  ASSIGN_OR_RETURN(auto global_roc, metrics::ComputeRoc(scores, bits));
  ASSIGN_OR_RETURN(auto global, metrics::BestEpsLowerBound(global_roc, p.confidence));
  ASSIGN_OR_RETURN(auto groups, metrics::SubgroupMetrics(scores, bits, group, p.confidence));
  auto group_json = [&](int g) -> absl::StatusOr<Json> {
    auto it = groups.find(g);
    if (it == groups.end() || !it->second.eps) {
      return absl::InvalidArgumentError(
          absl::StrCat("subgroup ", g, " has no estimate: ",
                       it == groups.end() ? "empty" : it->second.error));
    }
    return Json{{"size", it->second.size},
                {"auc", it->second.roc->auc},
                {"empirical_lower_bound", EstimateJson(*it->second.eps, it->second.naive)}};
  };
  std::optional<metrics::NaiveEstimate> global_naive;
  if (auto g = metrics::EpsPointEstimateNaive(global_roc); g.ok()) global_naive = *g;
  Json sub;
  sub["n"] = n;
  sub["global"] = {{"size", n},
                   {"auc", global_roc.auc},
                   {"empirical_lower_bound", EstimateJson(global, global_naive)}};
  ASSIGN_OR_RETURN(sub["subgroup"], group_json(1));
  ASSIGN_OR_RETURN(sub["complement"], group_json(0));
  sub["disparity_nats"] =
      Finite(groups.at(1).eps->eps_lb - global.eps_lb);
  report.results["subgroup"] = std::move(sub);
  return absl::OkStatus();
}

absl::Status RunEpsEstimation(const ExperimentConfig& config, Report& report) {
  const auto& p = config.eps_estimation;
  const size_t repeats = static_cast<size_t>(p.repeats);
  std::vector<absl::StatusOr<Repeat>> per(repeats, absl::UnknownError("not run"));
  ParallelFor(repeats, config.jobs, [&](size_t r) { per[r] = RunRepeat(config, r); });

  Table table{"eps_repeats", {"repeat", "eps_lb", "eps_naive_diagnostic"}, {}};
  int lb_over = 0;
  int naive_over = 0;
  bool balanced = true;
  for (size_t r = 0; r < repeats; ++r) {
    RETURN_IF_ERROR(InContext(per[r].status(), absl::StrCat("repeat ", r)));
    const Repeat& x = *per[r];
    lb_over += x.lb.eps_lb > p.epsilon;
    naive_over += x.naive && x.naive->epsilon > p.epsilon;
    balanced = balanced && x.roc.n_pos == p.observations / 2 &&
               x.roc.n_neg == p.observations / 2;
    table.rows.push_back({r, Finite(x.lb.eps_lb),
                          x.naive ? Finite(x.naive->epsilon) : Json(nullptr)});
  }
  Json& results = report.results;
  results["true_epsilon"] = p.epsilon;
  results["truth_probability"] = accountant::RandomizedResponseTruthProbability(p.epsilon);
  results["observations"] = p.observations;
  results["repeats"] = p.repeats;
  results["confidence"] = p.confidence;
  results["lower_bound_exceeds_true"] = lb_over;
  results["naive_exceeds_true"] = naive_over;
  results["repeat0"] = {{"empirical_lower_bound", EstimateJson(per[0]->lb, per[0]->naive)}};
  RETURN_IF_ERROR(AddSubgroup(config, report));
  report.tables.push_back(std::move(table));
  report.tables.push_back(RocTable("roc_repeat0", per[0]->roc));
  AddInvariant(report, "balanced_observations", balanced,
               "every repeat has equal member and non-member counts");
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// audit

Table AuditScoresTable(const std::string& name, const audit::AuditOutcome& outcome) {
  Table t{absl::StrCat("audit_scores_", name), {"trial", "side", "split", "score"}, {}};
  for (auto [scores, side] : {std::pair{&outcome.scores_d, "d"},
                              std::pair{&outcome.scores_d_prime, "d_prime"}}) {
    for (size_t i = 0; i < scores->size(); ++i) {
      const bool calibration = static_cast<int>(i) < outcome.calibration_per_side;
      t.rows.push_back({i, side, calibration ? "calibration" : "evaluation",
                        Finite((*scores)[i])});
    }
  }
  return t;
}

absl::Status RunAuditExperiment(const ExperimentConfig& config, Report& report) {
  const auto& p = config.audit;
  data::UniverseSpec spec = config.universe;
  spec.seed = DeriveSeed(config.seed, kCanaryStream);
  ASSIGN_OR_RETURN(auto pair, audit::CanaryAuditPair(spec, p.target_class,
                                                     p.canary_distance));
  ASSIGN_OR_RETURN(auto distinguisher, audit::ParseDistinguisher(p.distinguisher));
  audit::AuditOptions options{.trials_per_side = p.trials_per_side,
                              .distinguisher = distinguisher,
                              .confidence = p.confidence,
                              .jobs = config.jobs};
  if (p.calibration_per_side > 0) options.calibration_per_side = p.calibration_per_side;

  Json results = Json::array();
  for (size_t k = 0; k < p.pipelines.size(); ++k) {
    ASSIGN_OR_RETURN(auto named, Calibrated(p.pipelines[k]));
    auto outcome = audit::RunAudit(named.pipeline, pair, options,
                                   DeriveSeed(config.seed, kAuditStream, k));
    RETURN_IF_ERROR(InContext(outcome.status(), named.name));
    Json row;
    row["name"] = named.name;
    row["pipeline"] = attack::PipelineToJson(named.pipeline);
    row["outcome"] = audit::AuditOutcomeToJson(*outcome);
    if (outcome->budget && outcome->budget->formal_guarantee()) {
      const bool consistent =
          audit::DpRegionCheckCorrected(*outcome, outcome->budget->epsilon,
                                        outcome->budget->delta) ==
          audit::DpRegion::kConsistent;
      row["dp_region"] = consistent ? "consistent" : "violated";
      AddInvariant(report, absl::StrCat("dp_region_", named.name), consistent,
                   absl::StrCat("corrected FPR ", outcome->fpr_interval.hi,
                                ", corrected FNR ", outcome->fnr_interval.hi,
                                " against epsilon ", outcome->budget->epsilon));
    } else {
      row["dp_region"] = nullptr;
    }
    results.push_back(std::move(row));
    report.tables.push_back(AuditScoresTable(named.name, *outcome));
  }
  report.results = {{"target_class", p.target_class},
                    {"canary_distance", p.canary_distance},
                    {"pipelines", std::move(results)}};
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// em_check

// All multisets of value indices with at most `max_size` elements, each
// sorted ascending.
std::vector<std::vector<int>> Multisets(int values, int max_size) {
  std::vector<std::vector<int>> out = {{}};
  for (size_t i = 0; i < out.size(); ++i) {
    if (static_cast<int>(out[i].size()) == max_size) continue;
    const int from = out[i].empty() ? 0 : out[i].back();
    for (int v = from; v < values; ++v) {
      auto next = out[i];
      next.push_back(v);
      out.push_back(std::move(next));
    }
  }
  return out;
}

absl::Status RunEmCheck(const ExperimentConfig& config, Report& report) {
  const auto& p = config.em_check;
  const learners::LossSpec loss{.clamp = true, .lo = p.loss_lo, .hi = p.loss_hi};
  std::vector<learners::ModelArtifact> candidates;
  for (double theta : p.thetas) {
    learners::ModelArtifact m;
    m.arch = {.kind = learners::ModelKind::kLogistic, .dim = 1, .num_classes = 2};
    m.params = {theta, 0.0, 0.0, 0.0};
    candidates.push_back(std::move(m));
  }
  auto log_probs = [&](const std::vector<int>& multiset) -> absl::StatusOr<std::vector<double>> {
    std::vector<data::ExampleId> ids;
    std::vector<int> labels;
    std::vector<double> features;
    for (int v : multiset) {
      ids.push_back(static_cast<data::ExampleId>(ids.size()));
      labels.push_back(v % 2);
      features.push_back(p.values[static_cast<size_t>(v)]);
    }
    ASSIGN_OR_RETURN(auto d, data::Dataset::Create(1, 2, ids, labels, features));
    return learners::ExponentialMechanismLogProbabilities(candidates, loss, d);
  };

  const int values = static_cast<int>(p.values.size());
  const auto sets = Multisets(values, p.max_size);
  std::map<std::vector<int>, std::vector<double>> cache;
  for (const auto& s : sets) {
    ASSIGN_OR_RETURN(cache[s], log_probs(s));
  }
  ASSIGN_OR_RETURN(const double epsilon,
                   accountant::ExponentialMechanismEpsilon(p.loss_lo, p.loss_hi));
  Table table{"em_pairs", {"dataset", "added_value", "max_log_ratio"}, {}};
  double worst = 0.0;
  int pairs = 0;
  for (const auto& s : sets) {
    if (static_cast<int>(s.size()) == p.max_size) continue;
    for (int v = 0; v < values; ++v) {
      auto bigger = s;
      bigger.insert(std::upper_bound(bigger.begin(), bigger.end(), v), v);
      const auto& a = cache.at(s);
      const auto& b = cache.at(bigger);
      double ratio = 0.0;
      for (size_t j = 0; j < a.size(); ++j) ratio = std::max(ratio, std::abs(a[j] - b[j]));
      worst = std::max(worst, ratio);
      ++pairs;
      std::ostringstream name;
      for (size_t i = 0; i < s.size(); ++i) name << (i ? " " : "") << p.values[s[i]];
      table.rows.push_back({name.str(), p.values[static_cast<size_t>(v)], ratio});
    }
  }
  report.results = {{"datasets", sets.size()},
                    {"neighbouring_pairs", pairs},
                    {"candidates", p.thetas.size()},
                    {"max_log_probability_ratio", worst},
                    {"accountant_upper_bound", {{"epsilon", epsilon},
                                                {"mechanism", "exponential"}}}};
  report.tables.push_back(std::move(table));
  AddInvariant(report, "log_ratio_within_epsilon", worst <= epsilon + 1e-9,
               absl::StrCat("max ", worst, " against ", epsilon));
  return absl::OkStatus();
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

std::string_view CodeVersion() { return PRIVAUDIT_VERSION; }

absl::StatusOr<Report> RunExperiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.experiment = std::string(ExperimentKindName(config.kind));
  report.config = ConfigToJson(config);
  report.results = Json::object();
  report.provenance.code_version = std::string(CodeVersion());
  report.provenance.started_at = UtcNow();

  absl::Status status;
  switch (config.kind) {
    case ExperimentKind::kProtocolGap:
      status = RunProtocolGap(config, report);
      break;
    case ExperimentKind::kDmProperties:
      status = RunDmProperties(config, report);
      break;
    case ExperimentKind::kDpSgdTable:
      status = RunDpSgdTable(config, report);
      break;
    case ExperimentKind::kEpsEstimation:
      status = RunEpsEstimation(config, report);
      break;
    case ExperimentKind::kAudit:
      status = RunAuditExperiment(config, report);
      break;
    case ExperimentKind::kEmCheck:
      status = RunEmCheck(config, report);
      break;
  }
  RETURN_IF_ERROR(InContext(status, report.experiment));
  RETURN_IF_ERROR(InContext(ValidateReport(report), report.experiment));
  report.provenance.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace privaudit::cli
