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

#ifndef PRIVAUDIT_DATA_AUDIT_PAIR_H_
#define PRIVAUDIT_DATA_AUDIT_PAIR_H_

#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"
#include "privaudit/data/universe.h"

namespace privaudit::data {

// Neighbouring datasets for a worst-case audit. Every example of the target
// class is removed except `keep`; D' additionally holds the target.
struct AuditPair {
  Dataset d;
  Dataset d_prime;
  ExampleId keep_id = -1;
  ExampleId target_id = -1;
  int target_class = 0;
};

absl::StatusOr<AuditPair> BuildAuditPair(const Universe& universe,
                                         int target_class, ExampleId keep_id,
                                         ExampleId extra_id);

// True iff D' equals D plus exactly the target row, appended last.
bool IsNeighboringPair(const AuditPair& pair);

}  // namespace privaudit::data

#endif  // PRIVAUDIT_DATA_AUDIT_PAIR_H_
