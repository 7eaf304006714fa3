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

#include "sgb/binning.hpp"

namespace sgb {

enum class Objective { kSquaredError, kLogistic };
enum class Variant { kSS, kCRP, kHEP };

Objective objective_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);
std::string to_string(Objective o);
std::string to_string(Variant v);

struct TrainConfig {
  int trees = 5;
  int max_depth = 3;
  double lambda = 1.0;
  double gamma = 0.0;
  std::size_t buckets = 33;
  Objective objective = Objective::kSquaredError;
  Variant variant = Variant::kCRP;
  double learning_rate = 1.0;
  double sigmoid_bound = 8.0;
  int he_key_bits = 2048;

  void validate() const;
  double h_max() const { return objective == Objective::kLogistic ? 0.25 : 1.0; }
  std::size_t leaves() const { return (std::size_t)1 << max_depth; }
  std::size_t internal_nodes() const { return ((std::size_t)1 << max_depth) - 1; }
};

// Fixed-point arithmetic simulator: the plaintext trainer pushes every value
// through the same 2^-f grid, the same normalized-denominator division and
// the same sigmoid surrogate as the secure pipeline, so that split choices
// are comparable between the two.
struct FxSim {
  int f = 20;

  double q(double x) const;
  double mul(double a, double b) const { return mul_impl(a, b); }
  double mul_impl(double a, double b) const;
  double div(double num, double den, double den_bound, int iterations) const;
  // mirrors the fine-scale division the trainer uses on the 128-bit ring:
  // converged reciprocal, one-ulp output noise
  double div_precise(double num, double den, double den_bound) const;
  double sigmoid(double x, double x_bound) const;
};

// Division bound used for gains and leaf weights; a power of two keeps the
// public reciprocal scalar exact on the grid.
double gain_div_bound(const TrainConfig& cfg, std::size_t rows);

// Public index-preference ramp added to gains at selection time only: tied
// candidates (equal up to fixed-point noise) resolve to the lowest flat
// index on both the secure and the plaintext path. Far above the noise band,
// far below meaningful gain gaps.
inline double split_tie_bias() { return 0x1p-13; }

// A selected split candidate: party 0/1, the owner-local feature slot, and
// the bucket index k ("bucket <= k goes left").
struct SplitRef {
  int party = 0;
  int slot = 0;
  int bucket = 0;
  friend bool operator==(const SplitRef&, const SplitRef&) = default;
};

// flat candidate ordering: Party A's slots first, ascending bucket split
std::size_t flat_candidate_count(std::size_t n_a, std::size_t n_b, std::size_t k_buckets);
SplitRef split_from_flat(std::size_t flat, std::size_t n_a, std::size_t n_b,
                         std::size_t k_buckets);
std::size_t flat_from_split(const SplitRef& s, std::size_t n_a, std::size_t n_b,
                            std::size_t k_buckets);

struct PlainTree {
  std::vector<SplitRef> splits;      // internal nodes, breadth-first
  std::vector<double> leaf_weights;  // 2^max_depth
};

struct PlainModel {
  TrainConfig cfg;
  std::size_t n_features_a = 0;
  std::size_t n_features_b = 0;
  double base_score = 0;
  std::vector<PlainTree> trees;
  std::vector<std::vector<double>> thresholds;  // per global feature

  void save_json(const std::string& path) const;
  static PlainModel load_json(const std::string& path);
};

// Reference trainer over the combined feature matrix. Column order defines
// the global feature order: Party A's slots first.
PlainModel plain_train(const TrainConfig& cfg, const Dataset& full, std::size_t n_features_a);

std::vector<double> plain_predict(const PlainModel& model, const Dataset& instances);

// rank-statistic AUC with ties averaged
double auc(const std::vector<double>& scores, const std::vector<double>& labels);
double rmse(const std::vector<double>& scores, const std::vector<double>& labels);

}  // namespace sgb
