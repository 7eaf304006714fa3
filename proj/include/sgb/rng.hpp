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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "sgb/ring.hpp"

namespace sgb {

// Deterministic when seeded; seeded from OS entropy otherwise.
class Prg {
 public:
  Prg() : gen_(std::random_device{}()) {}
  explicit Prg(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t word() { return gen_(); }

  u128 wide() { return ((u128)gen_() << 64) | gen_(); }

  RingValue ring(const RingConfig& cfg) { return {wide() & cfg.mask()}; }

  RingVec ring_vec(std::size_t n, const RingConfig& cfg) {
    RingVec v(n);
    for (auto& x : v) x = ring(cfg);
    return v;
  }

  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  // Uniform permutation of {0..n-1}.
  std::vector<std::uint32_t> permutation(std::size_t n) {
    std::vector<std::uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), gen_);
    return p;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Derives independent stream seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sgb
