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

#include "privaudit/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "absl/strings/str_cat.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::metrics {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

absl::Status CheckBinomial(int64_t k, int64_t n, double confidence) {
  if (n < 1 || k < 0 || k > n) {
    return absl::InvalidArgumentError(
        absl::StrCat("binomial counts need 0 <= k <= n, n >= 1; got k=", k,
                     " n=", n));
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    return absl::InvalidArgumentError("confidence must lie in (0, 1)");
  }
  return absl::OkStatus();
}

double Rate(int64_t count, int64_t total) {
  return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

absl::StatusOr<RocCurve> ComputeRoc(std::span<const double> scores,
                                    const std::vector<bool>& member_bits) {
  if (scores.size() != member_bits.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        scores.size(), " scores but ", member_bits.size(), " membership bits"));
  }
  RocCurve curve;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) {
      return absl::InvalidArgumentError(absl::StrCat("score ", i, " is NaN"));
    }
    (member_bits[i] ? curve.n_pos : curve.n_neg) += 1;
  }
  if (curve.n_pos == 0 || curve.n_neg == 0) {
    return absl::InvalidArgumentError(
        "ROC needs at least one member and one non-member");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  curve.points.push_back({0.0, 0.0, kInf, 0, 0});
  int64_t tp = 0;
  int64_t fp = 0;
  // Twice the area in units of 1 / (n_pos * n_neg); exact in integers.
  __int128 twice_area = 0;
  for (size_t start = 0; start < order.size();) {
    const double threshold = scores[order[start]];
    const int64_t tp_before = tp;
    const int64_t fp_before = fp;
    size_t end = start;
    while (end < order.size() && scores[order[end]] == threshold) {
      (member_bits[order[end]] ? tp : fp) += 1;
      ++end;
    }
    twice_area += static_cast<__int128>(fp - fp_before) * (tp + tp_before);
    curve.points.push_back({Rate(fp, curve.n_neg), Rate(tp, curve.n_pos),
                            threshold, tp, fp});
    start = end;
  }
  curve.auc = static_cast<double>(static_cast<long double>(twice_area) /
                                  (2.0L * curve.n_pos * curve.n_neg));
  return curve;
}

void WriteRocCsv(const RocCurve& curve, std::ostream& out) {
  const auto saved = out.precision(std::numeric_limits<double>::max_digits10);
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve.points) {
    out << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
  }
  out.precision(saved);
}

double AttackAdvantage(double success_rate) {
  return 2.0 * (success_rate - 0.5);
}

absl::StatusOr<double> ClopperPearsonLower(int64_t k, int64_t n,
                                           double confidence) {
  RETURN_IF_ERROR(CheckBinomial(k, n, confidence));
  if (k == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(k),
                                static_cast<double>(n - k + 1),
                                1.0 - confidence);
}

absl::StatusOr<double> ClopperPearsonUpper(int64_t k, int64_t n,
                                           double confidence) {
  RETURN_IF_ERROR(CheckBinomial(k, n, confidence));
  if (k == n) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(k + 1),
                                static_cast<double>(n - k), confidence);
}

absl::StatusOr<Interval> ClopperPearson(int64_t k, int64_t n,
                                        double confidence) {
  RETURN_IF_ERROR(CheckBinomial(k, n, confidence));
  const double one_sided = 1.0 - (1.0 - confidence) / 2.0;
  Interval out;
  ASSIGN_OR_RETURN(out.lo, ClopperPearsonLower(k, n, one_sided));
  ASSIGN_OR_RETURN(out.hi, ClopperPearsonUpper(k, n, one_sided));
  return out;
}

absl::StatusOr<EpsEstimate> EpsLowerBound(int64_t tp, int64_t fp,
                                          int64_t n_pos, int64_t n_neg,
                                          double confidence) {
  EpsEstimate e;
  ASSIGN_OR_RETURN(e.tpr_lower, ClopperPearsonLower(tp, n_pos, confidence));
  ASSIGN_OR_RETURN(e.fpr_upper, ClopperPearsonUpper(fp, n_neg, confidence));
  e.confidence = confidence;
  e.tp = tp;
  e.fp = fp;
  e.n_pos = n_pos;
  e.n_neg = n_neg;
  e.no_evidence = !(e.tpr_lower > e.fpr_upper);
  e.eps_lb = e.no_evidence ? 0.0 : std::log(e.tpr_lower / e.fpr_upper);
  if (tp > 0 && fp > 0) {
    e.eps_naive = std::log(Rate(tp, n_pos) / Rate(fp, n_neg));
  }
  return e;
}

absl::StatusOr<EpsEstimate> BestEpsLowerBound(const RocCurve& curve,
                                              double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    return absl::InvalidArgumentError("confidence must lie in (0, 1)");
  }
  // The end points never give evidence, so they are not candidates.
  const size_t candidates =
      curve.points.size() > 2 ? curve.points.size() - 2 : 0;
  if (candidates == 0) {
    return EpsLowerBound(curve.n_pos, curve.n_neg, curve.n_pos, curve.n_neg,
                         confidence);
  }
  const double per_point =
      1.0 - (1.0 - confidence) / static_cast<double>(candidates);
  std::optional<EpsEstimate> best;
  for (size_t i = 1; i + 1 < curve.points.size(); ++i) {
    const RocPoint& p = curve.points[i];
    ASSIGN_OR_RETURN(EpsEstimate e, EpsLowerBound(p.tp, p.fp, curve.n_pos,
                                                  curve.n_neg, per_point));
    if (!best.has_value() || e.eps_lb > best->eps_lb) best = e;
  }
  best->confidence = confidence;
  return *best;
}

absl::StatusOr<NaiveEstimate> EpsPointEstimateNaive(const RocCurve& curve) {
  std::optional<NaiveEstimate> best;
  for (const RocPoint& p : curve.points) {
    if (p.fpr <= 0.0) continue;
    const double eps = std::log(p.tpr / p.fpr);
    if (!best.has_value() || eps > best->epsilon) best = {eps, p.fpr, p.tpr};
  }
  if (!best.has_value()) {
    return absl::FailedPreconditionError(
        "naive estimate undefined: no operating point with FPR > 0");
  }
  return *best;
}

absl::StatusOr<std::map<int, GroupMetrics>> SubgroupMetrics(
    std::span<const double> scores, const std::vector<bool>& member_bits,
    std::span<const int> group_of, double confidence) {
  if (scores.size() != member_bits.size() || scores.size() != group_of.size()) {
    return absl::InvalidArgumentError(
        "scores, membership bits and group labels differ in length");
  }
  std::map<int, std::vector<size_t>> members_of;
  for (size_t i = 0; i < group_of.size(); ++i) {
    members_of[group_of[i]].push_back(i);
  }
  std::map<int, GroupMetrics> out;
  for (const auto& [group, rows] : members_of) {
    GroupMetrics& g = out[group];
    g.group = group;
    g.size = static_cast<int64_t>(rows.size());
    std::vector<double> s;
    std::vector<bool> b;
    for (size_t i : rows) {
      s.push_back(scores[i]);
      b.push_back(member_bits[i]);
    }
    auto roc = ComputeRoc(s, b);
    if (!roc.ok()) {
      g.error = std::string(roc.status().message());
      continue;
    }
    ASSIGN_OR_RETURN(g.eps, BestEpsLowerBound(*roc, confidence));
    ASSIGN_OR_RETURN(g.naive, EpsPointEstimateNaive(*roc));
    g.roc = *std::move(roc);
  }
  return out;
}

}  // namespace privaudit::metrics
