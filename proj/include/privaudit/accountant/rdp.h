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

#ifndef PRIVAUDIT_ACCOUNTANT_RDP_H_
#define PRIVAUDIT_ACCOUNTANT_RDP_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace privaudit::accountant {

// Renyi-DP guarantee as a function of the order alpha.
struct RdpCurve {
  std::vector<double> orders;  // strictly increasing, each > 1
  std::vector<double> values;  // rho(alpha) >= 0

  absl::Status Validate() const;
};

// {1.25, 1.5, 2, 3, ..., 64}.
std::vector<double> DefaultOrders();

// RDP of `steps` compositions of the Poisson-subsampled Gaussian mechanism
// with sampling rate q and noise multiplier sigma (sensitivity 1).
//
// Integer orders use the exact binomial expansion of
//   A_alpha = E_{z ~ N(0, sigma^2)} [((1 - q) + q exp((2z - 1) / (2 sigma^2)))^alpha];
// fractional orders use the two-sided series in the generalized binomial
// coefficients, truncated once both tails fall below e^-30 relative to the
// leading term (absolute error well under 1e-10 per order for the orders in
// DefaultOrders()).
//
// sigma == 0 is rejected with FailedPrecondition: the mechanism is not
// private and no finite curve exists.
absl::StatusOr<RdpCurve> RdpSubsampledGaussian(double q, double sigma,
                                               int64_t steps,
                                               std::span<const double> orders);

// Single-order RDP of one subsampled-Gaussian step.
double RdpSubsampledGaussianAtOrder(double q, double sigma, double order);

enum class DpConversion {
  // eps = rho + log(1/delta) / (alpha - 1).
  kClassic,
  // eps = rho + (log(1/delta) + (alpha - 1) log(1 - 1/alpha) - log(alpha))
  //       / (alpha - 1), which is never larger than kClassic.
  kImproved,
};

struct DpConversionResult {
  double epsilon = 0.0;
  double order = 0.0;  // minimizing order
};

// eps(delta) = min over orders of the chosen conversion, floored at 0.
absl::StatusOr<DpConversionResult> RdpToDp(
    const RdpCurve& curve, double delta,
    DpConversion conversion = DpConversion::kImproved);

// A finite upper bound on (eps, delta) for one training run.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  std::string mechanism;
  // sigma == 0: no finite guarantee exists. epsilon is +inf in that case.
  bool non_private = false;
  // epsilon above the vacuous threshold: reported, but carries no meaningful
  // formal guarantee.
  bool vacuous = false;
  double noise_multiplier = 0.0;
  double sample_rate = 0.0;
  int64_t steps = 0;
  DpConversion conversion = DpConversion::kImproved;
  std::vector<double> orders;
  double optimal_order = 0.0;

  bool formal_guarantee() const { return !non_private && !vacuous; }
};

inline constexpr double kDefaultVacuousEpsilon = 100.0;

// Accounts a DP-SGD run: evaluates the default order grid, then refines with
// a fine sweep between the neighbours of the best default order. The orders
// used are stored in the budget so the epsilon can be recomputed exactly.
absl::StatusOr<PrivacyBudget> DpSgdBudget(
    double q, double sigma, int64_t steps, double delta,
    double vacuous_threshold = kDefaultVacuousEpsilon);

// Recomputes epsilon from the accounting parameters stored in `budget`.
absl::StatusOr<double> RecomputeEpsilon(const PrivacyBudget& budget);

// Smallest noise multiplier (to relative precision 1e-6) whose DP-SGD budget
// is at most target_epsilon.
absl::StatusOr<double> CalibrateNoiseMultiplier(double target_epsilon,
                                                double q, int64_t steps,
                                                double delta);

// Sampling theta with probability proportional to exp(-sum_i l(theta, x_i))
// is eps-DP with eps = 2 (hi - lo) for a per-example loss in [lo, hi].
absl::StatusOr<double> ExponentialMechanismEpsilon(double lo, double hi);

// Binary randomized response reporting the true bit with probability
// truth_prob in [1/2, 1): eps = ln(truth_prob / (1 - truth_prob)).
absl::StatusOr<double> RandomizedResponseEpsilon(double truth_prob);

// Inverse of RandomizedResponseEpsilon.
double RandomizedResponseTruthProbability(double epsilon);

}  // namespace privaudit::accountant

#endif  // PRIVAUDIT_ACCOUNTANT_RDP_H_
