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

#include "privaudit/cli/report.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "absl/strings/str_cat.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr char kEmpirical[] = "empirical_lower_bound";
constexpr char kAccountant[] = "accountant_upper_bound";

bool MentionsGuarantee(const Json& j) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (key == "formal_guarantee" || key == kAccountant) return true;
      if (MentionsGuarantee(value)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (MentionsGuarantee(v)) return true;
    }
  }
  return false;
}

absl::Status CheckNode(const Json& j, const std::string& path) {
  if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i) {
      RETURN_IF_ERROR(CheckNode(j[i], absl::StrCat(path, "[", i, "]")));
    }
    return absl::OkStatus();
  }
  if (!j.is_object()) return absl::OkStatus();
  for (const auto& [key, value] : j.items()) {
    const std::string where = absl::StrCat(path, ".", key);
    if ((key == "eps_lb" || key == "eps_naive") && path.find(kEmpirical) == std::string::npos) {
      return absl::InternalError(
          absl::StrCat(where, ": empirical epsilon outside ", kEmpirical));
    }
    if (key == kEmpirical && MentionsGuarantee(value)) {
      return absl::InternalError(
          absl::StrCat(where, ": empirical bound carries a guarantee field"));
    }
    if (key == "eps_naive" &&
        !(value.is_object() && value.value("diagnostic", false))) {
      return absl::InternalError(
          absl::StrCat(where, ": naive estimate must be tagged diagnostic"));
    }
    RETURN_IF_ERROR(CheckNode(value, where));
  }
  return absl::OkStatus();
}

void WriteCell(const Json& cell, std::ostream& out) {
  if (cell.is_string()) {
    out << cell.get<std::string>();
  } else if (cell.is_number_float()) {
    out << cell.get<double>();
  } else if (cell.is_null()) {
    out << "";
  } else {
    out << cell.dump();
  }
}

}  // namespace

bool Report::InvariantViolated() const {
  for (const auto& inv : invariants) {
    if (!inv.ok) return true;
  }
  return false;
}

Table RocTable(const std::string& name, const metrics::RocCurve& curve) {
  Table t{name, {"fpr", "tpr", "threshold"}, {}};
  for (const auto& p : curve.points) {
    Json threshold = std::isinf(p.threshold) ? Json(p.threshold > 0 ? "inf" : "-inf")
                                             : Json(p.threshold);
    t.rows.push_back({p.fpr, p.tpr, threshold});
  }
  return t;
}

nlohmann::ordered_json ReportToJson(const Report& report) {
  Json j;
  j["schema"] = kReportSchema;
  j["experiment"] = report.experiment;
  j["config"] = report.config;
  j["results"] = report.results;
  Json invariants = Json::array();
  for (const auto& inv : report.invariants) {
    invariants.push_back({{"name", inv.name}, {"ok", inv.ok}, {"detail", inv.detail}});
  }
  j["invariants"] = invariants;
  Json tables = Json::array();
  for (const auto& t : report.tables) {
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  }
  j["tables"] = tables;
  j["provenance"] = {{"code_version", report.provenance.code_version},
                     {"started_at", report.provenance.started_at},
                     {"wall_time_seconds", report.provenance.wall_time_seconds}};
  return j;
}

absl::StatusOr<Report> ReportFromJson(const nlohmann::ordered_json& j) {
  if (!j.is_object() || j.value("schema", "") != kReportSchema) {
    return absl::InvalidArgumentError(
        absl::StrCat("not a ", kReportSchema, " document"));
  }
  try {
    Report r;
    r.experiment = j.at("experiment").get<std::string>();
    r.config = j.at("config");
    r.results = j.at("results");
    for (const auto& inv : j.at("invariants")) {
      r.invariants.push_back({inv.at("name").get<std::string>(),
                              inv.at("ok").get<bool>(),
                              inv.at("detail").get<std::string>()});
    }
    for (const auto& t : j.at("tables")) {
      Table table;
      table.name = t.at("name").get<std::string>();
      table.columns = t.at("columns").get<std::vector<std::string>>();
      for (const auto& row : t.at("rows")) {
        table.rows.emplace_back(row.begin(), row.end());
      }
      r.tables.push_back(std::move(table));
    }
    const Json& p = j.at("provenance");
    r.provenance = {p.at("code_version").get<std::string>(),
                    p.at("started_at").get<std::string>(),
                    p.at("wall_time_seconds").get<double>()};
    return r;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed report: ", e.what()));
  }
}

absl::Status ValidateReport(const Report& report) {
  RETURN_IF_ERROR(CheckNode(report.results, "results"));
  for (const auto& t : report.tables) {
    for (const auto& row : t.rows) {
      if (row.size() != t.columns.size()) {
        return absl::InternalError(
            absl::StrCat("table ", t.name, " has a row of the wrong width"));
      }
    }
  }
  return absl::OkStatus();
}

void WriteTableCsv(const Table& table, std::ostream& out) {
  const auto saved = out.precision(std::numeric_limits<double>::max_digits10);
  for (size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      WriteCell(row[c], out);
    }
    out << '\n';
  }
  out.precision(saved);
}

absl::Status EmitReport(const Report& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  const std::filesystem::path root(dir);
  {
    const auto path = root / "report.json";
    std::ofstream out(path);
    out << ReportToJson(report).dump(2) << '\n';
    if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path.string()));
  }
  for (const auto& t : report.tables) {
    const auto path = root / (t.name + ".csv");
    std::ofstream out(path);
    WriteTableCsv(t, out);
    if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path.string()));
  }
  return absl::OkStatus();
}

}  // namespace privaudit::cli
