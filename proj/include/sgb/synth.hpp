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

#include "sgb/binning.hpp"

namespace sgb {

struct SynthSpec {
  std::size_t rows = 200;
  std::size_t features = 6;
  bool classification = true;
  std::uint64_t seed = 1;
  double noise = 0.25;
};

// Seeded synthetic dataset: features uniform in [0,1), target from a random
// sparse linear score (thresholded at the median for classification).
Dataset make_synthetic(const SynthSpec& spec);

// Vertical split: first n_a features to Party A (with labels), rest to B.
std::pair<Dataset, Dataset> vertical_split(const Dataset& full, std::size_t n_a);

}  // namespace sgb
