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

#ifndef PRIVAUDIT_DATA_CSV_H_
#define PRIVAUDIT_DATA_CSV_H_

#include <istream>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privaudit/data/dataset.h"

namespace privaudit::data {

struct CsvOptions {
  // Rescale each feature column to zero mean and unit variance. Constant
  // columns are only centred.
  bool normalize = true;
};

// Reads a header row with one `label` column; every other column is a
// numeric feature. Example ids are assigned by row order starting at 0 and
// the class count is max(label) + 1.
absl::StatusOr<Dataset> ReadCsv(std::istream& in, const CsvOptions& options);
absl::StatusOr<Dataset> ReadCsvFile(const std::string& path,
                                    const CsvOptions& options);

// Writes features as x0..x{d-1} followed by `label`, using round-trip
// precision. Ids are not written; they are implied by row order.
void WriteCsv(const Dataset& dataset, std::ostream& out);
absl::Status WriteCsvFile(const Dataset& dataset, const std::string& path);

}  // namespace privaudit::data

#endif  // PRIVAUDIT_DATA_CSV_H_
