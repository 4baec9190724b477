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

#include "privaudit/learners/serialize.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::learners {
namespace {

constexpr absl::string_view kMagic = "privaudit-model/1";

absl::StatusOr<double> FieldValue(absl::string_view token,
                                  absl::string_view key) {
  absl::string_view rest = token;
  if (!absl::ConsumePrefix(&rest, key) || !absl::ConsumePrefix(&rest, "=")) {
    return absl::InvalidArgumentError(absl::StrCat(
        "model header: expected `", std::string(key), "=`, got `",
        std::string(token), "`"));
  }
  double value;
  if (!absl::SimpleAtod(rest, &value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("model header: bad value in `", std::string(token), "`"));
  }
  return value;
}

}  // namespace

std::string SerializeModel(const ModelArtifact& model) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  const Architecture& a = model.arch;
  out << kMagic << ' ' << ModelKindName(a.kind) << " dim=" << a.dim
      << " classes=" << a.num_classes << " hidden=" << a.hidden
      << " memory=" << a.memory << " bandwidth=" << a.bandwidth << '\n';
  for (double p : model.params) out << p << '\n';
  return out.str();
}

absl::StatusOr<ModelArtifact> ParseModel(std::string_view text) {
  std::vector<absl::string_view> lines = absl::StrSplit(
      absl::string_view(text.data(), text.size()), '\n', absl::SkipEmpty());
  if (lines.empty()) return absl::InvalidArgumentError("empty model file");
  std::vector<absl::string_view> header =
      absl::StrSplit(lines[0], ' ', absl::SkipEmpty());
  if (header.size() != 7 || header[0] != kMagic) {
    return absl::InvalidArgumentError("not a privaudit-model/1 file");
  }
  ModelArtifact model;
  ASSIGN_OR_RETURN(model.arch.kind, ParseModelKind(std::string_view(
                                        header[1].data(), header[1].size())));
  ASSIGN_OR_RETURN(double dim, FieldValue(header[2], "dim"));
  ASSIGN_OR_RETURN(double classes, FieldValue(header[3], "classes"));
  ASSIGN_OR_RETURN(double hidden, FieldValue(header[4], "hidden"));
  ASSIGN_OR_RETURN(double memory, FieldValue(header[5], "memory"));
  ASSIGN_OR_RETURN(model.arch.bandwidth, FieldValue(header[6], "bandwidth"));
  model.arch.dim = static_cast<int>(dim);
  model.arch.num_classes = static_cast<int>(classes);
  model.arch.hidden = static_cast<int>(hidden);
  model.arch.memory = static_cast<int>(memory);
  if (model.arch.dim < 1 || model.arch.num_classes < 1) {
    return absl::InvalidArgumentError("model header: dim and classes must be >= 1");
  }
  const size_t expected = model.arch.ParameterCount();
  if (lines.size() - 1 != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "model file has ", lines.size() - 1, " parameters, header implies ",
        expected));
  }
  model.params.resize(expected);
  for (size_t i = 0; i < expected; ++i) {
    if (!absl::SimpleAtod(lines[i + 1], &model.params[i]) ||
        !std::isfinite(model.params[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("model file: bad parameter on line ", i + 2));
    }
  }
  return model;
}

nlohmann::ordered_json BudgetJson(const accountant::PrivacyBudget& budget) {
  nlohmann::ordered_json j;
  j["mechanism"] = budget.mechanism;
  j["epsilon"] = std::isfinite(budget.epsilon)
                     ? nlohmann::ordered_json(budget.epsilon)
                     : nlohmann::ordered_json(nullptr);
  j["delta"] = budget.delta;
  j["non_private"] = budget.non_private;
  j["vacuous"] = budget.vacuous;
  j["formal_guarantee"] = budget.formal_guarantee();
  j["noise_multiplier"] = budget.noise_multiplier;
  j["sample_rate"] = budget.sample_rate;
  j["steps"] = budget.steps;
  j["conversion"] =
      budget.conversion == accountant::DpConversion::kClassic ? "classic"
                                                              : "improved";
  j["optimal_order"] = budget.optimal_order;
  j["orders"] = budget.orders;
  return j;
}

nlohmann::ordered_json ModelProvenanceJson(const ModelArtifact& model) {
  nlohmann::ordered_json j;
  j["trainer"] = model.provenance.trainer;
  j["seed"] = model.provenance.seed;
  j["dataset_fingerprint"] = model.provenance.dataset_fingerprint;
  j["dataset_size"] = model.provenance.dataset_size;
  j["hyperparameters"] = model.provenance.hyperparameters;
  j["architecture"] = {{"kind", std::string(ModelKindName(model.arch.kind))},
                       {"dim", model.arch.dim},
                       {"num_classes", model.arch.num_classes},
                       {"hidden", model.arch.hidden},
                       {"memory", model.arch.memory},
                       {"bandwidth", model.arch.bandwidth}};
  j["stats"] = {{"steps", model.stats.steps},
                {"final_loss", model.stats.final_loss},
                {"max_clipped_norm", model.stats.max_clipped_norm}};
  j["privacy"] = model.budget.has_value() ? BudgetJson(*model.budget)
                                          : nlohmann::ordered_json(nullptr);
  return j;
}

absl::Status WriteModel(const ModelArtifact& model, const std::string& prefix) {
  {
    std::ofstream out(prefix + ".model");
    if (!out) return absl::UnavailableError("cannot write " + prefix + ".model");
    out << SerializeModel(model);
  }
  std::ofstream meta(prefix + ".provenance.json");
  if (!meta) {
    return absl::UnavailableError("cannot write " + prefix + ".provenance.json");
  }
  meta << ModelProvenanceJson(model).dump(2) << '\n';
  return absl::OkStatus();
}

}  // namespace privaudit::learners
