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

// Experiment reports, schema `privaudit-report/1`.
//
// Empirical epsilon values appear only inside objects keyed
// "empirical_lower_bound" and analytic ones only inside
// "accountant_upper_bound". ValidateReport rejects a report in which an
// empirical value sits next to a guarantee flag, or a naive point estimate
// is not tagged diagnostic.

#ifndef PRIVAUDIT_CLI_REPORT_H_
#define PRIVAUDIT_CLI_REPORT_H_

#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "privaudit/metrics/metrics.h"

namespace privaudit::cli {

inline constexpr char kReportSchema[] = "privaudit-report/1";

struct Invariant {
  std::string name;
  bool ok = true;
  std::string detail;

  friend bool operator==(const Invariant&, const Invariant&) = default;
};

// Emitted as <name>.csv. Cells are JSON scalars; strings are written raw.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::ordered_json>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

struct Provenance {
  std::string code_version;
  std::string started_at;
  double wall_time_seconds = 0.0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Report {
  std::string experiment;
  nlohmann::ordered_json config;
  nlohmann::ordered_json results;
  std::vector<Invariant> invariants;
  std::vector<Table> tables;
  Provenance provenance;

  bool InvariantViolated() const;
  friend bool operator==(const Report&, const Report&) = default;
};

// fpr,tpr,threshold with the +inf threshold written as "inf".
Table RocTable(const std::string& name, const metrics::RocCurve& curve);

nlohmann::ordered_json ReportToJson(const Report& report);
absl::StatusOr<Report> ReportFromJson(const nlohmann::ordered_json& j);

absl::Status ValidateReport(const Report& report);

void WriteTableCsv(const Table& table, std::ostream& out);

// Writes report.json and one CSV per table into `dir`, creating it.
absl::Status EmitReport(const Report& report, const std::string& dir);

}  // namespace privaudit::cli

#endif  // PRIVAUDIT_CLI_REPORT_H_
