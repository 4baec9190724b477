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

#ifndef PRIVAUDIT_COMMON_STATUS_MACROS_H_
#define PRIVAUDIT_COMMON_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define PRIVAUDIT_CONCAT_INNER_(a, b) a##b
#define PRIVAUDIT_CONCAT_(a, b) PRIVAUDIT_CONCAT_INNER_(a, b)

#define RETURN_IF_ERROR(expr)                      \
  do {                                             \
    const absl::Status _status_to_check = (expr);  \
    if (!_status_to_check.ok()) {                  \
      return _status_to_check;                     \
    }                                              \
  } while (false)

#define PRIVAUDIT_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                     \
  if (!statusor.ok()) {                                        \
    return statusor.status();                                  \
  }                                                            \
  lhs = std::move(statusor).value()

#define ASSIGN_OR_RETURN(lhs, rexpr)                                         \
  PRIVAUDIT_ASSIGN_OR_RETURN_IMPL_(                                          \
      PRIVAUDIT_CONCAT_(_statusor_, __LINE__), lhs, rexpr)

#endif  // PRIVAUDIT_COMMON_STATUS_MACROS_H_
