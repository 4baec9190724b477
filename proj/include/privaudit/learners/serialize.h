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

#ifndef PRIVAUDIT_LEARNERS_SERIALIZE_H_
#define PRIVAUDIT_LEARNERS_SERIALIZE_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "privaudit/accountant/rdp.h"
#include "privaudit/learners/model.h"

namespace privaudit::learners {

// Text form: a header line
//   privaudit-model/1 <kind> dim=<d> classes=<k> hidden=<h> memory=<m>
//   bandwidth=<b>
// followed by one parameter per line in round-trip precision.
std::string SerializeModel(const ModelArtifact& model);
absl::StatusOr<ModelArtifact> ParseModel(std::string_view text);

// Budget as reported: epsilon is null when no finite guarantee exists.
nlohmann::ordered_json BudgetJson(const accountant::PrivacyBudget& budget);

nlohmann::ordered_json ModelProvenanceJson(const ModelArtifact& model);

// Writes <prefix>.model and <prefix>.provenance.json.
absl::Status WriteModel(const ModelArtifact& model, const std::string& prefix);

}  // namespace privaudit::learners

#endif  // PRIVAUDIT_LEARNERS_SERIALIZE_H_
