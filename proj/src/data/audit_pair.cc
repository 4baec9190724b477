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

#include "privaudit/data/audit_pair.h"

#include <algorithm>
#include <vector>

#include "absl/strings/str_cat.h"

namespace privaudit::data {

absl::StatusOr<AuditPair> BuildAuditPair(const Universe& universe,
                                         int target_class, ExampleId keep_id,
                                         ExampleId extra_id) {
  if (keep_id == extra_id) {
    return absl::InvalidArgumentError(
        absl::StrCat("keep and extra ids coincide (", keep_id, ")"));
  }
  const auto keep_index = universe.IndexOf(keep_id);
  const auto extra_index = universe.IndexOf(extra_id);
  if (!keep_index || !extra_index) {
    return absl::InvalidArgumentError(
        absl::StrCat("audit ids ", keep_id, "/", extra_id,
                     " are not both present in the universe"));
  }
  if (universe.label(*keep_index) != target_class ||
      universe.label(*extra_index) != target_class) {
    return absl::InvalidArgumentError(
        absl::StrCat("audit examples must both have label ", target_class));
  }

  std::vector<size_t> rows;
  for (size_t i = 0; i < universe.size(); ++i) {
    if (universe.label(i) != target_class || i == *keep_index) {
      rows.push_back(i);
    }
  }
  AuditPair pair;
  pair.d = universe.Select(rows);
  rows.push_back(*extra_index);
  pair.d_prime = universe.Select(rows);
  pair.keep_id = keep_id;
  pair.target_id = extra_id;
  pair.target_class = target_class;
  return pair;
}

bool IsNeighboringPair(const AuditPair& pair) {
  const Dataset& d = pair.d;
  const Dataset& dp = pair.d_prime;
  if (dp.size() != d.size() + 1 || d.dim() != dp.dim()) return false;
  if (d.Contains(pair.target_id)) return false;
  if (dp.id(dp.size() - 1) != pair.target_id) return false;
  for (size_t i = 0; i < d.size(); ++i) {
    if (d.id(i) != dp.id(i) || d.label(i) != dp.label(i)) return false;
    auto a = d.features(i);
    auto b = dp.features(i);
    if (!std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  return true;
}

}  // namespace privaudit::data
