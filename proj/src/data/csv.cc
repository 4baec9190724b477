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

#include "privaudit/data/csv.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "privaudit/common/numeric.h"

namespace privaudit::data {
namespace {

void NormalizeColumns(int dim, std::vector<double>& features) {
  const size_t n = features.size() / dim;
  if (n == 0) return;
  for (int j = 0; j < dim; ++j) {
    ExactAccumulator sum;
    for (size_t i = 0; i < n; ++i) sum.Add(features[i * dim + j]);
    const double mean = sum.Sum() / static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double c = features[i * dim + j] - mean;
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (size_t i = 0; i < n; ++i) {
      double& v = features[i * dim + j];
      v -= mean;
      if (sd > 0.0) v /= sd;
    }
  }
}

}  // namespace

absl::StatusOr<Dataset> ReadCsv(std::istream& in, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("CSV input is empty");
  }
  std::vector<std::string> header = absl::StrSplit(line, ',');
  int label_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    if (absl::StripAsciiWhitespace(header[c]) == "label") {
      if (label_col >= 0) {
        return absl::InvalidArgumentError("CSV header repeats `label`");
      }
      label_col = static_cast<int>(c);
    }
  }
  if (label_col < 0) {
    return absl::InvalidArgumentError("CSV header has no `label` column");
  }
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) {
    return absl::InvalidArgumentError("CSV has no feature columns");
  }

  std::vector<ExampleId> ids;
  std::vector<int> labels;
  std::vector<double> features;
  int max_label = -1;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    ++row;
    std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("CSV row ", row, " has ", cells.size(),
                       " cells, header has ", header.size()));
    }
    for (size_t c = 0; c < cells.size(); ++c) {
      const absl::string_view cell = absl::StripAsciiWhitespace(cells[c]);
      if (static_cast<int>(c) == label_col) {
        int y = 0;
        if (!absl::SimpleAtoi(cell, &y) || y < 0) {
          return absl::InvalidArgumentError(absl::StrCat(
              "CSV row ", row, ": label `", cell, "` is not a class index"));
        }
        labels.push_back(y);
        max_label = std::max(max_label, y);
      } else {
        double v = 0.0;
        if (!absl::SimpleAtod(cell, &v) || !std::isfinite(v)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "CSV row ", row, ": `", cell, "` is not a finite number"));
        }
        features.push_back(v);
      }
    }
    ids.push_back(static_cast<ExampleId>(ids.size()));
  }
  if (options.normalize) NormalizeColumns(dim, features);
  return Dataset::Create(dim, std::max(max_label + 1, 1), std::move(ids),
                         std::move(labels), std::move(features));
}

absl::StatusOr<Dataset> ReadCsvFile(const std::string& path,
                                    const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ReadCsv(in, options);
}

void WriteCsv(const Dataset& dataset, std::ostream& out) {
  for (int j = 0; j < dataset.dim(); ++j) out << 'x' << j << ',';
  out << "label\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.features(i)) out << v << ',';
    out << dataset.label(i) << '\n';
  }
}

absl::Status WriteCsvFile(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open ", path, " for writing"));
  }
  WriteCsv(dataset, out);
  if (!out) return absl::DataLossError(absl::StrCat("write to ", path, " failed"));
  return absl::OkStatus();
}

}  // namespace privaudit::data
