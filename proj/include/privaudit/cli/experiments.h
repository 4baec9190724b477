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

// The named experiments.
//
//   protocol_gap   membership advantage of one pipeline under the
//                  subset-restricted game (S against S' drawn from T \ S)
//                  and the full-universe game, side by side.
//   dm_properties  exactness checks of the linear distribution-matching
//                  condenser over random (S_init, T) pairs.
//   dpsgd_table    accuracy, accountant epsilon and attack advantage for a
//                  list of training pipelines.
//   eps_estimation randomized response with known epsilon: how often the
//                  confidence-backed lower bound and the naive read-off
//                  overshoot it, plus a hidden-subgroup mixture.
//   audit          canary audits of each configured pipeline on neighbouring
//                  datasets.
//   em_check       exhaustive log-probability ratio check of the exponential
//                  mechanism over small neighbouring datasets.
//
// Every run is a pure function of the config; `jobs` changes only speed.

#ifndef PRIVAUDIT_CLI_EXPERIMENTS_H_
#define PRIVAUDIT_CLI_EXPERIMENTS_H_

#include <string_view>

#include "absl/status/statusor.h"
#include "privaudit/cli/config.h"
#include "privaudit/cli/report.h"

namespace privaudit::cli {

std::string_view CodeVersion();

// Module errors are returned with the experiment name prefixed and their
// status code preserved.
absl::StatusOr<Report> RunExperiment(const ExperimentConfig& config);

}  // namespace privaudit::cli

#endif  // PRIVAUDIT_CLI_EXPERIMENTS_H_
