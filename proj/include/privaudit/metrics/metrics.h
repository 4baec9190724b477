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

// Membership-inference metrics. Scores are "larger means more likely a
// member"; labels are membership bits.
//
// Two epsilon quantities are computed here and they must not be confused:
//   * EpsEstimate::eps_lb is a lower bound on the epsilon of any DP mechanism
//     that could have produced the observed counts, valid at the stated
//     confidence.
//   * eps_naive is ln(TPR/FPR) read off the empirical curve. It has no
//     statistical guarantee and is reported only as a diagnostic.
// Neither is ever an upper bound; those come from the accountant.

#ifndef PRIVAUDIT_METRICS_METRICS_H_
#define PRIVAUDIT_METRICS_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace privaudit::metrics {

inline constexpr double kDefaultConfidence = 0.95;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  // Examples with score >= threshold are called members. +inf for the
  // (0, 0) point.
  double threshold = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
  int64_t n_pos = 0;
  int64_t n_neg = 0;
};

// Sweeps every distinct score as a threshold. Equal scores enter the curve
// together as one step, so the result does not depend on input order.
absl::StatusOr<RocCurve> ComputeRoc(std::span<const double> scores,
                                    const std::vector<bool>& member_bits);

// Header "fpr,tpr,threshold" then one line per point.
void WriteRocCsv(const RocCurve& curve, std::ostream& out);

// 2 * (success_rate - 0.5); negative values are returned as is.
double AttackAdvantage(double success_rate);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Exact (Clopper-Pearson) binomial bounds from Beta quantiles. The one-sided
// forms hold with probability `confidence` each; the two-sided interval
// splits 1 - confidence evenly between the tails.
absl::StatusOr<double> ClopperPearsonLower(int64_t k, int64_t n,
                                           double confidence);
absl::StatusOr<double> ClopperPearsonUpper(int64_t k, int64_t n,
                                           double confidence);
absl::StatusOr<Interval> ClopperPearson(int64_t k, int64_t n,
                                        double confidence);

struct EpsEstimate {
  double eps_lb = 0.0;
  // True when the TPR lower bound does not exceed the FPR upper bound, so the
  // counts carry no evidence of privacy loss.
  bool no_evidence = true;
  // ln(TPR / FPR) at the same counts; unset when TP or FP is zero.
  std::optional<double> eps_naive;
  double confidence = kDefaultConfidence;
  double tpr_lower = 0.0;
  double fpr_upper = 1.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t n_pos = 0;
  int64_t n_neg = 0;
};

// eps_lb = max(0, ln(CP_lower(tp, n_pos) / CP_upper(fp, n_neg))), both
// one-sided at `confidence`.
absl::StatusOr<EpsEstimate> EpsLowerBound(int64_t tp, int64_t fp,
                                          int64_t n_pos, int64_t n_neg,
                                          double confidence = kDefaultConfidence);

// The largest eps_lb over all operating points of `curve`. Each point is
// evaluated at confidence 1 - (1 - confidence) / m for m candidate points,
// so the maximum still holds at `confidence`.
absl::StatusOr<EpsEstimate> BestEpsLowerBound(
    const RocCurve& curve, double confidence = kDefaultConfidence);

struct NaiveEstimate {
  double epsilon = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// max over points with FPR > 0 of ln(TPR / FPR). Diagnostic only.
absl::StatusOr<NaiveEstimate> EpsPointEstimateNaive(const RocCurve& curve);

struct GroupMetrics {
  int group = 0;
  int64_t size = 0;
  // Unset, with `error` describing why, when the group lacks members or
  // non-members.
  std::optional<RocCurve> roc;
  std::optional<EpsEstimate> eps;
  std::optional<NaiveEstimate> naive;
  std::string error;
};

// Recomputes every metric within each group named in `group_of`.
absl::StatusOr<std::map<int, GroupMetrics>> SubgroupMetrics(
    std::span<const double> scores, const std::vector<bool>& member_bits,
    std::span<const int> group_of, double confidence = kDefaultConfidence);

}  // namespace privaudit::metrics

#endif  // PRIVAUDIT_METRICS_METRICS_H_
