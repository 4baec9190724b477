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
#include <limits>
#include <string>

#include "absl/strings/str_cat.h"
#include "privaudit/attack/protocols.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/parallel.h"
#include "privaudit/common/status_macros.h"
#include "privaudit/learners/serialize.h"

namespace privaudit::audit {
namespace {

enum Stream : uint64_t { kSideD = 71, kSideDPrime = 72, kResponse = 73 };

using Json = nlohmann::ordered_json;

struct Trial {
  double score = 0.0;
  std::optional<accountant::PrivacyBudget> budget;
};

struct Context {
  const attack::PipelineSpec* spec;
  Distinguisher distinguisher;
  std::vector<double> mean_d;
  std::vector<double> mean_d_prime;
  std::span<const double> target;
  int target_label = 0;
};

absl::StatusOr<Trial> RunTrial(const Context& ctx, const data::Dataset& train,
                               uint64_t seed) {
  ASSIGN_OR_RETURN(auto run, attack::RunPipeline(*ctx.spec, train, seed));
  Trial trial;
  trial.budget = run.model.budget;
  if (ctx.distinguisher == Distinguisher::kCondensedMean) {
    const std::vector<double> m = run.condensed->examples.Mean();
    trial.score =
        SquaredDistance(m, ctx.mean_d) - SquaredDistance(m, ctx.mean_d_prime);
  } else {
    ASSIGN_OR_RETURN(auto p, learners::EvaluateOne(run.model, ctx.target,
                                                   ctx.target_label));
    trial.score = -p.loss;
  }
  if (!std::isfinite(trial.score)) {
    return absl::InternalError("distinguisher statistic is not finite");
  }
  return trial;
}

Json IntervalJson(const metrics::Interval& i) {
  return Json{{"lo", i.lo}, {"hi", i.hi}};
}

}  // namespace

std::string_view DistinguisherName(Distinguisher d) {
  switch (d) {
    case Distinguisher::kAuto:
      return "auto";
    case Distinguisher::kCondensedMean:
      return "condensed_mean";
    case Distinguisher::kTargetLoss:
      return "target_loss";
  }
  return "unknown";
}

absl::StatusOr<Distinguisher> ParseDistinguisher(std::string_view name) {
  if (name == "auto") return Distinguisher::kAuto;
  if (name == "condensed_mean") return Distinguisher::kCondensedMean;
  if (name == "target_loss") return Distinguisher::kTargetLoss;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown distinguisher `", std::string(name), "`"));
}

absl::StatusOr<data::AuditPair> CanaryAuditPair(const data::UniverseSpec& spec,
                                                int target_class,
                                                double distance) {
  if (target_class < 0 || target_class >= spec.num_classes) {
    return absl::InvalidArgumentError(
        absl::StrCat("target class ", target_class, " out of range"));
  }
  ASSIGN_OR_RETURN(auto universe, data::GenerateUniverse(spec));
  std::vector<double> canary = data::ClassMeans(spec)[target_class];
  canary[0] += distance * spec.noise;
  ASSIGN_OR_RETURN(auto planted,
                   data::AppendExample(universe, canary, target_class));
  data::ExampleId keep = -1;
  for (size_t i = 0; i < universe.size(); ++i) {
    if (universe.label(i) == target_class) {
      keep = universe.ids()[i];
      break;
    }
  }
  if (keep < 0) {
    return absl::FailedPreconditionError("target class has no examples");
  }
  return data::BuildAuditPair(planted, target_class, keep,
                              planted.ids().back());
}

absl::StatusOr<AuditOutcome> SummarizeAudit(std::vector<double> scores_d,
                                            std::vector<double> scores_d_prime,
                                            int calibration_per_side,
                                            double confidence) {
  const int n = static_cast<int>(scores_d.size());
  if (scores_d_prime.size() != scores_d.size()) {
    return absl::InvalidArgumentError("both sides need the same number of runs");
  }
  if (calibration_per_side < 1 || calibration_per_side >= n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "calibration runs per side must lie in [1, ", n - 1, "], got ",
        calibration_per_side));
  }
  AuditOutcome out;
  out.trials_per_side = n;
  out.calibration_per_side = calibration_per_side;
  out.evaluation_per_side = n - calibration_per_side;
  out.confidence = confidence;

  std::vector<double> calibration;
  std::vector<bool> labels;
  for (int i = 0; i < calibration_per_side; ++i) {
    calibration.push_back(scores_d[i]);
    labels.push_back(false);
    calibration.push_back(scores_d_prime[i]);
    labels.push_back(true);
  }
  out.threshold = attack::BestThreshold(calibration, labels);

  const int64_t graded = out.evaluation_per_side;
  for (int i = calibration_per_side; i < n; ++i) {
    out.true_positives += scores_d_prime[i] > out.threshold;
    out.false_positives += scores_d[i] > out.threshold;
  }
  const int64_t false_negatives = graded - out.true_positives;
  const int64_t true_negatives = graded - out.false_positives;
  out.detection_rate = static_cast<double>(out.true_positives + true_negatives) /
                       static_cast<double>(2 * graded);
  out.fpr = static_cast<double>(out.false_positives) / static_cast<double>(graded);
  out.fnr = static_cast<double>(false_negatives) / static_cast<double>(graded);
  ASSIGN_OR_RETURN(out.fpr_interval,
                   metrics::ClopperPearson(out.false_positives, graded, confidence));
  ASSIGN_OR_RETURN(out.fnr_interval,
                   metrics::ClopperPearson(false_negatives, graded, confidence));
  ASSIGN_OR_RETURN(out.eps, metrics::EpsLowerBound(out.true_positives,
                                                   out.false_positives, graded,
                                                   graded, confidence));
  out.scores_d = std::move(scores_d);
  out.scores_d_prime = std::move(scores_d_prime);
  return out;
}

absl::StatusOr<AuditOutcome> RunAudit(const attack::PipelineSpec& spec,
                                      const data::AuditPair& pair,
                                      const AuditOptions& options,
                                      uint64_t seed) {
  if (absl::Status s = spec.Validate(); !s.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid audit pipeline: ", s.message()));
  }
  if (options.trials_per_side < 20) {
    return absl::InvalidArgumentError(absl::StrCat(
        "an audit needs at least 20 runs per side, got ", options.trials_per_side));
  }
  if (!data::IsNeighboringPair(pair)) {
    return absl::InvalidArgumentError("D and D' are not neighbouring");
  }
  Context ctx;
  ctx.spec = &spec;
  ctx.distinguisher = options.distinguisher;
  if (ctx.distinguisher == Distinguisher::kAuto) {
    ctx.distinguisher = spec.condense == attack::CondenseStep::kNone
                            ? Distinguisher::kTargetLoss
                            : Distinguisher::kCondensedMean;
  }
  if (ctx.distinguisher == Distinguisher::kCondensedMean &&
      spec.condense == attack::CondenseStep::kNone) {
    return absl::InvalidArgumentError(
        "the condensed_mean distinguisher needs a condensing pipeline");
  }
  ctx.mean_d = pair.d.Mean();
  ctx.mean_d_prime = pair.d_prime.Mean();
  const size_t target = *pair.d_prime.IndexOf(pair.target_id);
  ctx.target = pair.d_prime.features(target);
  ctx.target_label = pair.d_prime.label(target);

  const size_t n = static_cast<size_t>(options.trials_per_side);
  std::vector<absl::StatusOr<Trial>> trials(2 * n, absl::UnknownError("not run"));
  ParallelFor(2 * n, options.jobs, [&](size_t k) {
    const bool prime = k >= n;
    const size_t i = prime ? k - n : k;
    trials[k] = RunTrial(ctx, prime ? pair.d_prime : pair.d,
                         DeriveSeed(seed, prime ? kSideDPrime : kSideD, i));
  });
  std::vector<double> scores_d(n);
  std::vector<double> scores_d_prime(n);
  for (size_t k = 0; k < 2 * n; ++k) {
    if (!trials[k].ok()) {
      return absl::Status(trials[k].status().code(),
                          absl::StrCat("audit run ", k % n, " on ",
                                       k >= n ? "D'" : "D", ": ",
                                       trials[k].status().message()));
    }
    (k >= n ? scores_d_prime[k - n] : scores_d[k]) = trials[k]->score;
  }
  const int calibration =
      options.calibration_per_side.value_or(options.trials_per_side / 2);
  ASSIGN_OR_RETURN(auto out, SummarizeAudit(std::move(scores_d),
                                            std::move(scores_d_prime),
                                            calibration, options.confidence));
  out.distinguisher = ctx.distinguisher;
  out.budget = trials[n]->budget;
  return out;
}

DpRegion DpRegionCheck(double fpr, double fnr, double epsilon, double delta) {
  const double e = std::exp(epsilon);
  auto holds = [](double lhs, double rhs) {
    return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
  };
  return holds(1.0 - fnr, e * fpr + delta) && holds(1.0 - fpr, e * fnr + delta)
             ? DpRegion::kConsistent
             : DpRegion::kViolated;
}

DpRegion DpRegionCheckCorrected(const AuditOutcome& outcome, double epsilon,
                                double delta) {
  return DpRegionCheck(outcome.fpr_interval.hi, outcome.fnr_interval.hi, epsilon,
                       delta);
}

std::vector<double> RandomizedResponse(const std::vector<bool>& bits,
                                       double epsilon, uint64_t seed) {
  const double truth = accountant::RandomizedResponseTruthProbability(epsilon);
  Rng rng(DeriveSeed(seed, kResponse));
  std::vector<double> out(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    const bool honest = UnitInterval(rng()) < truth;
    out[i] = (honest ? bits[i] : !bits[i]) ? 1.0 : 0.0;
  }
  return out;
}

nlohmann::ordered_json AuditOutcomeToJson(const AuditOutcome& outcome) {
  Json j;
  j["distinguisher"] = std::string(DistinguisherName(outcome.distinguisher));
  j["trials_per_side"] = outcome.trials_per_side;
  j["calibration_per_side"] = outcome.calibration_per_side;
  j["evaluation_per_side"] = outcome.evaluation_per_side;
  j["threshold"] = outcome.threshold;
  j["true_positives"] = outcome.true_positives;
  j["false_positives"] = outcome.false_positives;
  j["detection_rate"] = outcome.detection_rate;
  j["fpr"] = outcome.fpr;
  j["fpr_interval"] = IntervalJson(outcome.fpr_interval);
  j["fnr"] = outcome.fnr;
  j["fnr_interval"] = IntervalJson(outcome.fnr_interval);
  j["confidence"] = outcome.confidence;
  Json eps;
  eps["eps_lb"] = outcome.eps.eps_lb;
  eps["no_evidence"] = outcome.eps.no_evidence;
  eps["tpr_lower"] = outcome.eps.tpr_lower;
  eps["fpr_upper"] = outcome.eps.fpr_upper;
  if (outcome.eps.eps_naive && std::isfinite(*outcome.eps.eps_naive)) {
    eps["eps_naive"] = {{"value", *outcome.eps.eps_naive}, {"diagnostic", true}};
  } else {
    eps["eps_naive"] = {{"value", nullptr}, {"diagnostic", true}};
  }
  j["empirical_lower_bound"] = eps;
  j["accountant_upper_bound"] =
      outcome.budget ? learners::BudgetJson(*outcome.budget) : Json(nullptr);
  return j;
}

void WriteAuditScoresCsv(const AuditOutcome& outcome, std::ostream& out) {
  const auto saved = out.precision(std::numeric_limits<double>::max_digits10);
  out << "trial,side,split,score\n";
  for (auto [scores, side] : {std::pair{&outcome.scores_d, "d"},
                              std::pair{&outcome.scores_d_prime, "d_prime"}}) {
    for (size_t i = 0; i < scores->size(); ++i) {
      const bool calibration =
          static_cast<int>(i) < outcome.calibration_per_side;
      out << i << ',' << side << ','
          << (calibration ? "calibration" : "evaluation") << ',' << (*scores)[i]
          << '\n';
    }
  }
  out.precision(saved);
}

}  // namespace privaudit::audit
