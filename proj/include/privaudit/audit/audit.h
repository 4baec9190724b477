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

// Worst-case distinguishing audits on a neighbouring pair D, D'.
//
// The pipeline is run many times on each side. Each run yields one scalar
// (the distinguisher statistic) where larger means "trained on D'". The
// first part of the runs on each side picks a threshold, the rest are
// graded against it, and the graded counts give a detection rate and a
// Clopper-Pearson backed lower bound on epsilon.

#ifndef PRIVAUDIT_AUDIT_AUDIT_H_
#define PRIVAUDIT_AUDIT_AUDIT_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "privaudit/accountant/rdp.h"
#include "privaudit/attack/pipeline.h"
#include "privaudit/data/audit_pair.h"
#include "privaudit/data/universe.h"
#include "privaudit/metrics/metrics.h"

namespace privaudit::audit {

enum class Distinguisher {
  // kCondensedMean when the pipeline condenses, kTargetLoss otherwise.
  kAuto,
  // |mean(S) - mean(D)|^2 - |mean(S) - mean(D')|^2 for the condensed set S.
  kCondensedMean,
  // Negated loss of the trained model on the target example.
  kTargetLoss,
};

std::string_view DistinguisherName(Distinguisher d);
absl::StatusOr<Distinguisher> ParseDistinguisher(std::string_view name);

// Generates a universe from `spec`, plants a canary `distance` noise standard
// deviations from the mean of `target_class` along the first axis, and
// builds the pair differing in the canary. The kept example is the first
// universe example of the target class.
absl::StatusOr<data::AuditPair> CanaryAuditPair(const data::UniverseSpec& spec,
                                                int target_class,
                                                double distance);

struct AuditOptions {
  int trials_per_side = 200;
  // Runs per side used to choose the threshold; the remainder is graded.
  // Defaults to half when unset.
  std::optional<int> calibration_per_side;
  Distinguisher distinguisher = Distinguisher::kAuto;
  double confidence = metrics::kDefaultConfidence;
  int jobs = 1;
};

struct AuditOutcome {
  int trials_per_side = 0;
  int calibration_per_side = 0;
  int evaluation_per_side = 0;
  Distinguisher distinguisher = Distinguisher::kAuto;
  // Statistic per run, in trial order.
  std::vector<double> scores_d;
  std::vector<double> scores_d_prime;
  double threshold = 0.0;
  // Graded runs only. Positive means D'.
  int64_t true_positives = 0;
  int64_t false_positives = 0;
  double detection_rate = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  // Two-sided at `confidence`, so each end holds one-sided at
  // 1 - (1 - confidence) / 2 and both upper ends hold jointly at
  // `confidence`.
  metrics::Interval fpr_interval;
  metrics::Interval fnr_interval;
  metrics::EpsEstimate eps;
  double confidence = metrics::kDefaultConfidence;
  // Accountant bound of the trainer, when it has one.
  std::optional<accountant::PrivacyBudget> budget;
};

// Runs `spec` on pair.d and pair.d_prime `trials_per_side` times each.
// Run i on D uses seed (seed, D, i) and on D' seed (seed, D', i), so the
// outcome does not depend on `jobs`.
absl::StatusOr<AuditOutcome> RunAudit(const attack::PipelineSpec& spec,
                                      const data::AuditPair& pair,
                                      const AuditOptions& options,
                                      uint64_t seed);

// Threshold selection and grading given per-run statistics. The first
// `calibration_per_side` entries of each side choose the threshold.
absl::StatusOr<AuditOutcome> SummarizeAudit(std::vector<double> scores_d,
                                            std::vector<double> scores_d_prime,
                                            int calibration_per_side,
                                            double confidence);

enum class DpRegion { kConsistent, kViolated };

// Checks 1 - fnr <= e^eps fpr + delta and 1 - fpr <= e^eps fnr + delta, with
// a relative slack of 1e-12 for rounding.
DpRegion DpRegionCheck(double fpr, double fnr, double epsilon, double delta);

// The check at the upper ends of the FPR and FNR intervals.
DpRegion DpRegionCheckCorrected(const AuditOutcome& outcome, double epsilon,
                                double delta);

// Each bit reported truthfully with probability e^eps / (1 + e^eps),
// returned as 0/1 scores. The optimal attack on the output is the reported
// bit itself.
std::vector<double> RandomizedResponse(const std::vector<bool>& bits,
                                       double epsilon, uint64_t seed);

nlohmann::ordered_json AuditOutcomeToJson(const AuditOutcome& outcome);

// trial,side,split,score with side in {d, d_prime} and split in
// {calibration, evaluation}.
void WriteAuditScoresCsv(const AuditOutcome& outcome, std::ostream& out);

}  // namespace privaudit::audit

#endif  // PRIVAUDIT_AUDIT_AUDIT_H_
