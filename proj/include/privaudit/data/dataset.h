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

#ifndef PRIVAUDIT_DATA_DATASET_H_
#define PRIVAUDIT_DATA_DATASET_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace privaudit::data {

using ExampleId = int64_t;

// A labeled point set with stable per-example identities. Used for the
// universe U, the training set T, condensed sets S and audit datasets D/D'.
//
// Features are stored row-major. A Dataset is immutable once created; every
// transformation returns a new Dataset, so instances can be shared freely
// across threads.
class Dataset {
 public:
  // Validates that every label lies in [0, num_classes), ids are unique, all
  // features are finite and the feature buffer holds ids.size() * dim values.
  static absl::StatusOr<Dataset> Create(int dim, int num_classes,
                                        std::vector<ExampleId> ids,
                                        std::vector<int> labels,
                                        std::vector<double> features);

  Dataset() = default;

  size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  int dim() const { return dim_; }
  int num_classes() const { return num_classes_; }

  std::span<const double> features(size_t index) const {
    return {features_.data() + index * static_cast<size_t>(dim_),
            static_cast<size_t>(dim_)};
  }
  int label(size_t index) const { return labels_[index]; }
  ExampleId id(size_t index) const { return ids_[index]; }

  std::span<const ExampleId> ids() const { return ids_; }
  std::span<const int> labels() const { return labels_; }
  std::span<const double> feature_matrix() const { return features_; }

  std::optional<size_t> IndexOf(ExampleId id) const;
  bool Contains(ExampleId id) const { return IndexOf(id).has_value(); }

  // Rows at the given positions, in the given order.
  Dataset Select(std::span<const size_t> indices) const;
  // Rows whose id is flagged in `keep` (indexed by position).
  Dataset Filter(const std::vector<bool>& keep) const;
  // Appends the rows of `other`; fails on id collisions or shape mismatch.
  absl::StatusOr<Dataset> Concat(const Dataset& other) const;

  // Per-coordinate mean, computed with exact (order-independent) summation.
  std::vector<double> Mean() const;
  std::vector<int> ClassCounts() const;

  // FNV-1a over shape, ids, labels and feature bytes.
  uint64_t Fingerprint() const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  int dim_ = 0;
  int num_classes_ = 0;
  std::vector<ExampleId> ids_;
  std::vector<int> labels_;
  std::vector<double> features_;
  std::shared_ptr<const std::unordered_map<ExampleId, size_t>> index_;
};

}  // namespace privaudit::data

#endif  // PRIVAUDIT_DATA_DATASET_H_
