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

#include "privaudit/accountant/rdp.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::accountant {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSeriesCutoff = -30.0;
constexpr int kFineSweepPoints = 40;

// log(a - b) for a >= b.
double LogSubExp(double a, double b) {
  if (b == -kInf) return a;
  if (a == b) return -kInf;
  return a + std::log1p(-std::exp(b - a));
}

double LogErfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; the direct form underflows past x ~ 26.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) -
                        15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(M_PI) + std::log(series);
}

double LogBinomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double LogAInteger(double q, double sigma, int order) {
  double log_a = -kInf;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  for (int i = 0; i <= order; ++i) {
    const double log_coef = LogBinomial(order, i) + i * log_q +
                            (order - i) * log_1mq;
    const double s = log_coef + (static_cast<double>(i) * i - i) /
                                    (2.0 * sigma * sigma);
    log_a = LogAddExp(log_a, s);
  }
  return log_a;
}

double LogAFractional(double q, double sigma, double order) {
  double log_a0 = -kInf;
  double log_a1 = -kInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  double coef = 1.0;  // generalized binomial C(order, i)
  for (int i = 0;; ++i) {
    if (i > 0) coef *= (order - (i - 1)) / i;
    const double log_coef = std::log(std::abs(coef));
    const double j = order - i;
    const double log_t0 = log_coef + i * log_q + j * log_1mq;
    const double log_t1 = log_coef + j * log_q + i * log_1mq;
    const double log_e0 =
        std::log(0.5) + LogErfc((i - z0) / (M_SQRT2 * sigma));
    const double log_e1 =
        std::log(0.5) + LogErfc((z0 - j) / (M_SQRT2 * sigma));
    const double log_s0 =
        log_t0 + (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma) +
        log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * sigma * sigma) + log_e1;
    if (coef > 0) {
      log_a0 = LogAddExp(log_a0, log_s0);
      log_a1 = LogAddExp(log_a1, log_s1);
    } else {
      log_a0 = LogSubExp(log_a0, log_s0);
      log_a1 = LogSubExp(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < kSeriesCutoff || i > 10000) break;
  }
  return LogAddExp(log_a0, log_a1);
}

}  // namespace

absl::Status RdpCurve::Validate() const {
  if (orders.empty() || orders.size() != values.size()) {
    return absl::InvalidArgumentError("RDP curve must pair each order with a value");
  }
  for (size_t i = 0; i < orders.size(); ++i) {
    if (!(orders[i] > 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("RDP order ", orders[i], " must exceed 1"));
    }
    if (i > 0 && !(orders[i] > orders[i - 1])) {
      return absl::InvalidArgumentError("RDP orders must be strictly increasing");
    }
    if (!(values[i] >= 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("RDP value ", values[i], " must be non-negative"));
    }
  }
  return absl::OkStatus();
}

std::vector<double> DefaultOrders() {
  std::vector<double> orders = {1.25, 1.5};
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  return orders;
}

double RdpSubsampledGaussianAtOrder(double q, double sigma, double order) {
  if (q == 0.0) return 0.0;
  if (q == 1.0) return order / (2.0 * sigma * sigma);
  if (std::isinf(order)) return kInf;
  const double log_a = order == std::floor(order)
                           ? LogAInteger(q, sigma, static_cast<int>(order))
                           : LogAFractional(q, sigma, order);
  return std::max(0.0, log_a / (order - 1.0));
}

absl::StatusOr<RdpCurve> RdpSubsampledGaussian(double q, double sigma,
                                               int64_t steps,
                                               std::span<const double> orders) {
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling rate must lie in (0, 1], got ", q));
  }
  if (steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("step count must be >= 1, got ", steps));
  }
  if (!(sigma >= 0.0)) {
    return absl::InvalidArgumentError("noise multiplier must be non-negative");
  }
  if (sigma == 0.0) {
    return absl::FailedPreconditionError(
        "noise multiplier 0: the mechanism is not private");
  }
  RdpCurve curve;
  curve.orders.assign(orders.begin(), orders.end());
  curve.values.reserve(orders.size());
  for (double order : orders) {
    curve.values.push_back(static_cast<double>(steps) *
                           RdpSubsampledGaussianAtOrder(q, sigma, order));
  }
  RETURN_IF_ERROR(curve.Validate());
  return curve;
}

absl::StatusOr<DpConversionResult> RdpToDp(const RdpCurve& curve, double delta,
                                           DpConversion conversion) {
  RETURN_IF_ERROR(curve.Validate());
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  const double log_inv_delta = -std::log(delta);
  DpConversionResult best{kInf, curve.orders.front()};
  for (size_t i = 0; i < curve.orders.size(); ++i) {
    const double a = curve.orders[i];
    double eps;
    if (conversion == DpConversion::kClassic) {
      eps = curve.values[i] + log_inv_delta / (a - 1.0);
    } else {
      eps = curve.values[i] +
            (log_inv_delta + (a - 1.0) * std::log1p(-1.0 / a) - std::log(a)) /
                (a - 1.0);
    }
    if (eps < best.epsilon) best = {eps, a};
  }
  best.epsilon = std::max(0.0, best.epsilon);
  return best;
}

absl::StatusOr<PrivacyBudget> DpSgdBudget(double q, double sigma,
                                          int64_t steps, double delta,
                                          double vacuous_threshold) {
  PrivacyBudget budget;
  budget.delta = delta;
  budget.mechanism = "subsampled_gaussian";
  budget.noise_multiplier = sigma;
  budget.sample_rate = q;
  budget.steps = steps;
  budget.conversion = DpConversion::kImproved;
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  if (sigma == 0.0) {
    budget.non_private = true;
    budget.epsilon = kInf;
    return budget;
  }
  const std::vector<double> coarse = DefaultOrders();
  ASSIGN_OR_RETURN(RdpCurve curve, RdpSubsampledGaussian(q, sigma, steps, coarse));
  ASSIGN_OR_RETURN(DpConversionResult first, RdpToDp(curve, delta));

  // Fine sweep strictly between the neighbours of the best coarse order.
  const auto it = std::find(coarse.begin(), coarse.end(), first.order);
  const size_t k = static_cast<size_t>(it - coarse.begin());
  const double lo = k == 0 ? 1.05 : coarse[k - 1];
  const double hi = k + 1 < coarse.size() ? coarse[k + 1] : coarse[k] + 8.0;
  std::vector<double> orders = coarse;
  for (int i = 1; i < kFineSweepPoints; ++i) {
    orders.push_back(lo + (hi - lo) * i / kFineSweepPoints);
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  budget.orders = orders;

  ASSIGN_OR_RETURN(RdpCurve fine, RdpSubsampledGaussian(q, sigma, steps, orders));
  ASSIGN_OR_RETURN(DpConversionResult result, RdpToDp(fine, delta));
  budget.epsilon = result.epsilon;
  budget.optimal_order = result.order;
  budget.vacuous = budget.epsilon > vacuous_threshold;
  return budget;
}

absl::StatusOr<double> RecomputeEpsilon(const PrivacyBudget& budget) {
  if (budget.non_private) return kInf;
  ASSIGN_OR_RETURN(RdpCurve curve,
                   RdpSubsampledGaussian(budget.sample_rate,
                                         budget.noise_multiplier, budget.steps,
                                         budget.orders));
  ASSIGN_OR_RETURN(DpConversionResult result,
                   RdpToDp(curve, budget.delta, budget.conversion));
  return result.epsilon;
}

absl::StatusOr<double> CalibrateNoiseMultiplier(double target_epsilon,
                                                double q, int64_t steps,
                                                double delta) {
  if (!(target_epsilon > 0.0)) {
    return absl::InvalidArgumentError("target epsilon must be positive");
  }
  auto eps_at = [&](double sigma) -> absl::StatusOr<double> {
    ASSIGN_OR_RETURN(PrivacyBudget b, DpSgdBudget(q, sigma, steps, delta));
    return b.epsilon;
  };
  double hi = 1.0;
  for (int i = 0;; ++i) {
    ASSIGN_OR_RETURN(double eps, eps_at(hi));
    if (eps <= target_epsilon) break;
    if (i > 60) {
      return absl::OutOfRangeError("no noise multiplier reaches the target");
    }
    hi *= 2.0;
  }
  double lo = 0.0;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    ASSIGN_OR_RETURN(double eps, eps_at(mid));
    (eps <= target_epsilon ? hi : lo) = mid;
  }
  return hi;
}

absl::StatusOr<double> ExponentialMechanismEpsilon(double lo, double hi) {
  if (!(hi >= lo)) {
    return absl::InvalidArgumentError(
        absl::StrCat("loss range [", lo, ", ", hi, "] is empty"));
  }
  return 2.0 * (hi - lo);
}

absl::StatusOr<double> RandomizedResponseEpsilon(double truth_prob) {
  if (!(truth_prob >= 0.5 && truth_prob < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("truth probability must lie in [1/2, 1), got ", truth_prob));
  }
  return std::log(truth_prob / (1.0 - truth_prob));
}

double RandomizedResponseTruthProbability(double epsilon) {
  return 1.0 / (1.0 + std::exp(-epsilon));
}

}  // namespace privaudit::accountant
