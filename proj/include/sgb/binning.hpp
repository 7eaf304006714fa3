// Copyright 2026 The SGB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgb/protocols.hpp"

namespace sgb {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One party's vertical slice: feature columns plus, at the label holder, the
// label column. Rows are assumed pre-aligned across parties.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;  // [feature][row]
  std::vector<double> labels;
  bool has_labels = false;

  std::size_t rows() const { return columns.empty() ? labels.size() : columns[0].size(); }
  std::size_t n_features() const { return columns.size(); }

  // Header row with feature names; complete numeric values only (missing
  // values are rejected at ingestion). label_column may be empty.
  static Dataset from_csv(const std::string& path, const std::string& label_column);
  void to_csv(const std::string& path) const;

  Dataset slice_rows(std::size_t begin, std::size_t end) const;
};

// Quantile bucketization of one column: thresholds at nearest-rank quantiles
// i/K, deduplicated and capped below the column max, so every bucket can be
// non-empty. Values <= thresholds[k] (first such k) land in bucket k; ties go
// to the lower bucket.
struct FeatureBuckets {
  std::vector<double> thresholds;
  std::vector<std::uint32_t> bucket_of;

  std::size_t n_buckets() const { return thresholds.size() + 1; }
  std::uint32_t bucket_for(double v) const;
};

FeatureBuckets quantile_bin(const std::vector<double>& column, std::size_t k_buckets);

// Per-feature binning for a whole slice.
std::vector<FeatureBuckets> bin_dataset(const Dataset& d, std::size_t k_buckets);

// Raw 0/1 membership vector for (feature j, bucket k); k may exceed the
// feature's effective bucket count (padded empty bucket).
std::vector<std::uint32_t> bucket_counts(const FeatureBuckets& fb, std::size_t k_global,
                                         std::size_t rows);

// Shares every indicator vector s_{jk} of `owner`'s features (k_global per
// feature, feature-major). Raw 0/1 values, so downstream sums stay exact.
std::vector<RingVec> share_indicators(Proto& p, const std::vector<FeatureBuckets>& local,
                                      std::size_t n_features, std::size_t k_global,
                                      std::size_t rows, Role owner);

}  // namespace sgb
