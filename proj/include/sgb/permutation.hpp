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
#include <vector>

#include "sgb/protocols.hpp"

namespace sgb {

// Destination-map semantics: Y[map[i]] = X[i].
struct Permutation {
  std::vector<std::uint32_t> map;

  std::size_t size() const { return map.size(); }
  void validate() const;

  // Inverse: if this maps i -> map[i], inv maps map[i] -> i.
  Permutation inverse() const;

  // out[map[i]] = x[i]
  template <typename Vec>
  Vec apply(const Vec& x) const {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[map[i]] = x[i];
    return out;
  }
};

// Applies a permutation known only to `owner` to a shared vector, producing
// shares of pi(X). Consumes the triple; reuse is rejected.
RingVec secure_permute(Proto& p, const RingVec& x, const Permutation* pi, Role owner,
                       PermTripleShare& triple);

// Per-(feature,bucket) gradient sums for the features of `owner`: gradients
// are securely permuted into the owner's bucket order, then accumulated
// locally over the (public) bucket boundary ranges. bucket_of is owner-local;
// bucket_counts is the public per-feature occupancy table. Returns shares of
// n_features*K sums, feature-major.
std::pair<RingVec, RingVec> crp_sum_gradients(
    Proto& p, const RingVec& g_share, const RingVec& h_share, Role owner,
    const std::vector<std::vector<std::uint32_t>>& bucket_of,
    const std::vector<std::vector<std::uint32_t>>& bucket_counts, std::size_t n_buckets);

// Stable bucket-grouping permutation: rows ordered by bucket index.
Permutation bucket_sort_permutation(const std::vector<std::uint32_t>& bucket_of_row,
                                    std::size_t n_buckets);

}  // namespace sgb
