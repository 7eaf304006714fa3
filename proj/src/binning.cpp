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

#include "sgb/binning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sgb {

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_value(const std::string& s, std::size_t row, const std::string& col) {
  double v = 0;
  auto begin = s.data();
  auto end = s.data() + s.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw DataError("row " + std::to_string(row) + ", column '" + col +
                    "': missing or non-numeric value");
  }
  return v;
}

}  // namespace

Dataset Dataset::from_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = split_csv_line(line);

  Dataset d;
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!label_column.empty() && header[i] == label_column) {
      label_idx = i;
      d.has_labels = true;
    } else {
      d.feature_names.push_back(header[i]);
    }
  }
  if (!label_column.empty() && !d.has_labels) {
    throw DataError(path + ": label column '" + label_column + "' not found");
  }
  d.columns.resize(d.feature_names.size());

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(row + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::size_t fi = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == label_idx) {
        d.labels.push_back(parse_value(cells[i], row + 1, header[i]));
      } else {
        d.columns[fi++].push_back(parse_value(cells[i], row + 1, header[i]));
      }
    }
    ++row;
  }
  return d;
}

void Dataset::to_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (j) out << ',';
    out << feature_names[j];
  }
  if (has_labels) out << (feature_names.empty() ? "" : ",") << "label";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out << ',';
      out << columns[j][i];
    }
    if (has_labels) out << (columns.empty() ? "" : ",") << labels[i];
    out << '\n';
  }
}

Dataset Dataset::slice_rows(std::size_t begin, std::size_t end) const {
  Dataset d;
  d.feature_names = feature_names;
  d.has_labels = has_labels;
  d.columns.resize(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    d.columns[j].assign(columns[j].begin() + begin, columns[j].begin() + end);
  }
  if (has_labels) d.labels.assign(labels.begin() + begin, labels.begin() + end);
  return d;
}

// ---------------------------------------------------------------------------
// quantile binning
// ---------------------------------------------------------------------------

std::uint32_t FeatureBuckets::bucket_for(double v) const {
  // first k with v <= thresholds[k]; past the last threshold lands in the top
  std::size_t k = std::upper_bound(thresholds.begin(), thresholds.end(), v) -
                  thresholds.begin();
  // upper_bound gives first strictly greater; ties must go to the lower
  // bucket, so step back while v equals the previous threshold
  while (k > 0 && v <= thresholds[k - 1]) --k;
  return (std::uint32_t)k;
}

FeatureBuckets quantile_bin(const std::vector<double>& column, std::size_t k_buckets) {
  if (column.empty()) throw DataError("cannot bin an empty column");
  if (k_buckets < 2) throw DataError("bucket count must be at least 2");
  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  double maxv = sorted.back();

  FeatureBuckets fb;
  for (std::size_t i = 1; i < k_buckets; ++i) {
    // nearest-rank quantile at q = i/K
    std::size_t rank = (i * sorted.size() + k_buckets - 1) / k_buckets;  // ceil(q*M)
    double t = sorted[rank - 1];
    if (t >= maxv) continue;  // would create a permanently empty top bucket
    if (fb.thresholds.empty() || t > fb.thresholds.back()) fb.thresholds.push_back(t);
  }
  fb.bucket_of.resize(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) fb.bucket_of[i] = fb.bucket_for(column[i]);
  return fb;
}

std::vector<FeatureBuckets> bin_dataset(const Dataset& d, std::size_t k_buckets) {
  std::vector<FeatureBuckets> out;
  out.reserve(d.columns.size());
  for (const auto& col : d.columns) out.push_back(quantile_bin(col, k_buckets));
  return out;
}

std::vector<std::uint32_t> bucket_counts(const FeatureBuckets& fb, std::size_t k_global,
                                         std::size_t rows) {
  std::vector<std::uint32_t> counts(k_global, 0);
  (void)rows;
  for (auto b : fb.bucket_of) ++counts[b];
  return counts;
}

std::vector<RingVec> share_indicators(Proto& p, const std::vector<FeatureBuckets>& local,
                                      std::size_t n_features, std::size_t k_global,
                                      std::size_t rows, Role owner) {
  std::vector<RingVec> out;
  out.reserve(n_features * k_global);
  bool is_owner = p.ctx().self == owner;
  for (std::size_t j = 0; j < n_features; ++j) {
    for (std::size_t k = 0; k < k_global; ++k) {
      RingVec s(rows);
      if (is_owner) {
        for (std::size_t i = 0; i < rows; ++i) {
          s[i] = RingValue{(u128)(local[j].bucket_of[i] == k ? 1 : 0)};
        }
      }
      out.push_back(p.share_vec(s, owner));
    }
  }
  return out;
}

}  // namespace sgb
