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

#include "privaudit/data/dataset.h"

#include <cmath>
#include <cstring>
#include <utility>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"

namespace privaudit::data {
namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

void FnvMix(uint64_t& hash, const void* data, size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= kFnvPrime;
  }
}

}  // namespace

absl::StatusOr<Dataset> Dataset::Create(int dim, int num_classes,
                                        std::vector<ExampleId> ids,
                                        std::vector<int> labels,
                                        std::vector<double> features) {
  if (dim < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension must be >= 1, got ", dim));
  }
  if (num_classes < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("class count must be >= 1, got ", num_classes));
  }
  if (labels.size() != ids.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "got ", labels.size(), " labels for ", ids.size(), " examples"));
  }
  if (features.size() != ids.size() * static_cast<size_t>(dim)) {
    return absl::InvalidArgumentError(
        absl::StrCat("feature buffer holds ", features.size(),
                     " values, expected ", ids.size(), " x ", dim));
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      return absl::InvalidArgumentError(
          absl::StrCat("label ", labels[i], " of example ", ids[i],
                       " outside [0, ", num_classes, ")"));
    }
  }
  for (double v : features) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("non-finite feature value");
    }
  }
  auto index = std::make_shared<std::unordered_map<ExampleId, size_t>>();
  index->reserve(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!index->emplace(ids[i], i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate example id ", ids[i]));
    }
  }
  Dataset ds;
  ds.dim_ = dim;
  ds.num_classes_ = num_classes;
  ds.ids_ = std::move(ids);
  ds.labels_ = std::move(labels);
  ds.features_ = std::move(features);
  ds.index_ = std::move(index);
  return ds;
}

std::optional<size_t> Dataset::IndexOf(ExampleId id) const {
  if (!index_) return std::nullopt;
  auto it = index_->find(id);
  if (it == index_->end()) return std::nullopt;
  return it->second;
}

Dataset Dataset::Select(std::span<const size_t> indices) const {
  std::vector<ExampleId> ids;
  std::vector<int> labels;
  std::vector<double> features;
  ids.reserve(indices.size());
  labels.reserve(indices.size());
  features.reserve(indices.size() * dim_);
  for (size_t i : indices) {
    ids.push_back(ids_[i]);
    labels.push_back(labels_[i]);
    auto row = this->features(i);
    features.insert(features.end(), row.begin(), row.end());
  }
  // Rows come from a valid dataset, so only a repeated index can fail.
  return *Create(dim_, num_classes_, std::move(ids), std::move(labels),
                 std::move(features));
}

Dataset Dataset::Filter(const std::vector<bool>& keep) const {
  std::vector<size_t> indices;
  for (size_t i = 0; i < size() && i < keep.size(); ++i) {
    if (keep[i]) indices.push_back(i);
  }
  return Select(indices);
}

absl::StatusOr<Dataset> Dataset::Concat(const Dataset& other) const {
  if (other.dim_ != dim_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot concatenate dimension ", other.dim_, " onto ", dim_));
  }
  std::vector<ExampleId> ids = ids_;
  std::vector<int> labels = labels_;
  std::vector<double> features = features_;
  ids.insert(ids.end(), other.ids_.begin(), other.ids_.end());
  labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
  features.insert(features.end(), other.features_.begin(),
                  other.features_.end());
  return Create(dim_, std::max(num_classes_, other.num_classes_),
                std::move(ids), std::move(labels), std::move(features));
}

std::vector<double> Dataset::Mean() const {
  std::vector<double> mean(dim_, 0.0);
  if (empty()) return mean;
  const double n = static_cast<double>(size());
  for (int j = 0; j < dim_; ++j) {
    ExactAccumulator acc;
    for (size_t i = 0; i < size(); ++i) acc.Add(features_[i * dim_ + j]);
    mean[j] = acc.Sum() / n;
  }
  return mean;
}

std::vector<int> Dataset::ClassCounts() const {
  std::vector<int> counts(num_classes_, 0);
  for (int y : labels_) ++counts[y];
  return counts;
}

uint64_t Dataset::Fingerprint() const {
  uint64_t hash = kFnvOffset;
  FnvMix(hash, &dim_, sizeof(dim_));
  FnvMix(hash, &num_classes_, sizeof(num_classes_));
  FnvMix(hash, ids_.data(), ids_.size() * sizeof(ExampleId));
  FnvMix(hash, labels_.data(), labels_.size() * sizeof(int));
  FnvMix(hash, features_.data(), features_.size() * sizeof(double));
  return hash;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.dim_ == b.dim_ && a.num_classes_ == b.num_classes_ &&
         a.ids_ == b.ids_ && a.labels_ == b.labels_ &&
         a.features_.size() == b.features_.size() &&
         std::memcmp(a.features_.data(), b.features_.data(),
                     a.features_.size() * sizeof(double)) == 0;
}

}  // namespace privaudit::data
