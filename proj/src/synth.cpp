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

#include "sgb/synth.hpp"

#include <algorithm>
#include <cmath>

#include "sgb/rng.hpp"

namespace sgb {

Dataset make_synthetic(const SynthSpec& spec) {
  Prg prg(spec.seed);
  Dataset d;
  d.has_labels = true;
  d.columns.resize(spec.features);
  for (std::size_t j = 0; j < spec.features; ++j) {
    d.feature_names.push_back("f" + std::to_string(j));
    d.columns[j].resize(spec.rows);
    for (auto& v : d.columns[j]) v = std::floor(prg.real(0, 1) * 4096) / 4096;
  }
  std::vector<double> w(spec.features);
  for (auto& x : w) x = prg.real(-2, 2);
  std::vector<double> score(spec.rows, 0.0);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    for (std::size_t j = 0; j < spec.features; ++j) {
      double xj = d.columns[j][i];
      score[i] += w[j] * xj + 0.7 * w[(j + 1) % spec.features] * xj * xj;
    }
    score[i] += prg.real(-spec.noise, spec.noise);
  }
  d.labels.resize(spec.rows);
  if (spec.classification) {
    std::vector<double> sorted = score;
    std::nth_element(sorted.begin(), sorted.begin() + spec.rows / 2, sorted.end());
    double median = sorted[spec.rows / 2];
    for (std::size_t i = 0; i < spec.rows; ++i) d.labels[i] = score[i] > median ? 1.0 : 0.0;
  } else {
    for (std::size_t i = 0; i < spec.rows; ++i) d.labels[i] = score[i];
  }
  return d;
}

std::pair<Dataset, Dataset> vertical_split(const Dataset& full, std::size_t n_a) {
  Dataset a, b;
  a.has_labels = full.has_labels;
  a.labels = full.labels;
  for (std::size_t j = 0; j < full.columns.size(); ++j) {
    auto& dst = j < n_a ? a : b;
    dst.feature_names.push_back(full.feature_names[j]);
    dst.columns.push_back(full.columns[j]);
  }
  if (b.columns.empty() && !full.columns.empty()) {
    // keep row count observable on the feature-less side
    b.columns = {};
  }
  return {a, b};
}

}  // namespace sgb
