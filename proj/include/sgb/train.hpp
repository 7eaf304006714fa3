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

#include <optional>
#include <string>
#include <vector>

#include "sgb/binning.hpp"
#include "sgb/he.hpp"
#include "sgb/oracle.hpp"
#include "sgb/permutation.hpp"

namespace sgb {

// One party's view of a tree node. Split info is stored only at the owner;
// the other side keeps a dummy marker.
struct SecureNode {
  bool self_owned = false;
  std::string feature;                // owner only
  std::optional<double> threshold;    // owner only; empty = every instance left
};

struct SecureTree {
  std::vector<SecureNode> internal;  // breadth-first
  RingVec leaf_weight_shares;
};

// This party's half of the distributed model: tree shapes agree across the
// two halves, split info and weight shares do not.
struct ModelHalf {
  Role role = Role::PartyA;
  RingConfig ring;
  TrainConfig cfg;
  std::size_t n_features_a = 0;
  std::size_t n_features_b = 0;
  RingValue base_share{0};
  std::vector<SecureTree> trees;

  void save_json(const std::string& path) const;
  static ModelHalf load_json(const std::string& path);

  // shape fingerprint both halves must agree on
  std::uint64_t shape_hash() const;
};

// Per-node gradient/hessian/mask state during oblivious expansion.
struct NodeState {
  RingVec g, h, mask;
};

// Per-(feature,bucket) sums of shared gradients; the three back-ends are
// exchangeable and bit-identical on the same inputs.
class SumGradientsBackend {
 public:
  SumGradientsBackend(Proto& p, Variant variant, std::size_t m,
                      const std::vector<FeatureBuckets>& local_bins, std::size_t n_local,
                      std::size_t n_peer, std::size_t k_buckets, HeSession* he);

  // returns (bg, bh), flattened feature-major over the global feature order
  // (Party A's slots first)
  std::pair<RingVec, RingVec> run(const RingVec& g, const RingVec& h);

 private:
  std::pair<RingVec, RingVec> run_ss(const RingVec& g, const RingVec& h, Role owner,
                                     std::size_t n_own);
  std::pair<RingVec, RingVec> run_crp(const RingVec& g, const RingVec& h, Role owner,
                                      std::size_t n_own);
  std::pair<RingVec, RingVec> run_hep(const RingVec& g, const RingVec& h, Role owner,
                                      std::size_t n_own);

  Proto& p_;
  Variant variant_;
  std::size_t m_, k_;
  std::size_t n_a_ = 0, n_b_ = 0;
  const std::vector<FeatureBuckets>& local_bins_;
  std::vector<std::vector<std::uint32_t>> local_bucket_of_;
  std::vector<std::vector<std::uint32_t>> counts_a_, counts_b_;  // public (CRP)
  HeSession* he_;
};

// Split gains over shared bucket sums: for every (feature, bucket-split)
// candidate, 0.5*(GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - gamma, batched
// into one multiplication and one division round-trip.
RingVec compute_split_gains(Proto& p, const TrainConfig& cfg, const RingVec& bg,
                            const RingVec& bh, std::size_t n_features, std::size_t k_buckets,
                            double div_bound, int div_iters, int div_extra);

// Secure training session: runs the boosting loop over shared gradients with
// oblivious full-depth expansion. Both parties call this in lockstep with
// their local slice; the label holder is Party A.
ModelHalf secure_train(Proto& p, const TrainConfig& cfg, const Dataset& local);

// Secure batch prediction over a distributed model. Scores are revealed to
// `recipient` only (others get zeros). When `onehot_probe` is non-null the
// per-tree selection vectors are opened into it (test instrumentation).
std::vector<double> secure_predict(Proto& p, const ModelHalf& model,
                                   const Dataset& local_instances, Role recipient,
                                   std::vector<std::vector<std::uint64_t>>* onehot_probe = nullptr);

}  // namespace sgb
