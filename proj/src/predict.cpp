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

#include <unordered_map>

#include "sgb/serialize.hpp"
#include "sgb/train.hpp"

namespace sgb {

namespace {

// Candidate-leaf indicators for one tree under local knowledge: owned nodes
// prune one branch, dummy nodes keep both. Bits are leaf-major per instance.
std::vector<std::uint8_t> local_candidates(const ModelHalf& model, const SecureTree& tree,
                                           const Dataset& inst,
                                           const std::unordered_map<std::string, std::size_t>& col,
                                           std::size_t m) {
  int depth = model.cfg.max_depth;
  std::size_t leaves = (std::size_t)1 << depth;
  std::vector<std::uint8_t> out(m * leaves, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
      bool ok = true;
      std::size_t pos = 0;
      for (int d = 0; d < depth && ok; ++d) {
        std::size_t node = (((std::size_t)1 << d) - 1) + pos;
        bool take_right = (leaf >> (depth - 1 - d)) & 1;
        const SecureNode& n = tree.internal[node];
        if (n.self_owned) {
          bool goes_left = true;
          if (n.threshold) {
            double v = inst.columns[col.at(n.feature)][i];
            goes_left = v <= *n.threshold;
          }
          if (goes_left == take_right) ok = false;
        }
        pos = pos * 2 + (take_right ? 1 : 0);
      }
      if (ok) out[i * leaves + leaf] = 1;
    }
  }
  return out;
}

}  // namespace

std::vector<double> secure_predict(Proto& p, const ModelHalf& model,
                                   const Dataset& local_instances, Role recipient,
                                   std::vector<std::vector<std::uint64_t>>* onehot_probe) {
  auto& ctx = p.ctx();
  auto& rcfg = ctx.cfg;
  PhaseScope ph(ctx.ep->meter, "predict");

  // shape handshake: both halves must describe the same forest
  {
    Writer w;
    w.u64(model.shape_hash());
    w.u64(local_instances.n_features() > 0 ? local_instances.rows() : 0);
    Bytes b = p.exchange_msg(Opcode::kShape, w.out);
    Reader r(b);
    if (r.u64() != model.shape_hash()) {
      throw ProtocolError("model halves disagree on forest shape");
    }
    std::uint64_t peer_rows = r.u64();
    std::uint64_t mine = local_instances.n_features() > 0 ? local_instances.rows() : 0;
    if (mine > 0 && peer_rows > 0 && mine != peer_rows) {
      throw ProtocolError("instance counts disagree");
    }
  }

  std::size_t m = local_instances.n_features() > 0 ? local_instances.rows() : 0;
  {
    // the feature-less side learns the batch size from the peer
    Writer w;
    w.u64(m);
    Bytes b = p.exchange_msg(Opcode::kShape, w.out);
    Reader r(b);
    std::uint64_t peer_m = r.u64();
    if (m == 0) m = peer_m;
  }
  if (m == 0) return {};

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t j = 0; j < local_instances.feature_names.size(); ++j) {
    col[local_instances.feature_names[j]] = j;
  }
  for (const auto& tree : model.trees) {
    for (const auto& n : tree.internal) {
      if (n.self_owned && n.threshold && !col.count(n.feature)) {
        throw DataError("instance data lacks model feature '" + n.feature + "'");
      }
    }
  }

  std::size_t leaves = (std::size_t)1 << model.cfg.max_depth;
  RingVec total(m, model.base_share);
  for (const auto& tree : model.trees) {
    auto mine = local_candidates(model, tree, local_instances, col, m);
    RingVec flat(m * leaves);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = RingValue{(u128)mine[i]};
    RingVec ia = p.share_vec(flat, Role::PartyA);
    RingVec ib = p.share_vec(flat, Role::PartyB);
    RingVec sel = p.mul_vec(ia, ib, /*truncate=*/false);
    if (onehot_probe) {
      RingVec opened = p.open_vec(sel);
      std::vector<std::uint64_t> bits(opened.size());
      for (std::size_t i = 0; i < opened.size(); ++i) bits[i] = (std::uint64_t)opened[i].raw;
      onehot_probe->push_back(std::move(bits));
    }
    RingVec w_eff = model.cfg.learning_rate == 1.0
                        ? tree.leaf_weight_shares
                        : p.scalar_mul_real(tree.leaf_weight_shares, model.cfg.learning_rate);
    RingVec wexp(m * leaves);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t l = 0; l < leaves; ++l) wexp[i * leaves + l] = w_eff[l];
    }
    RingVec sw = p.mul_vec(sel, wexp, /*truncate=*/false);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t l = 0; l < leaves; ++l) {
        total[i] = p.add(total[i], sw[i * leaves + l]);
      }
    }
  }

  RingVec opened = p.open_vec(total, recipient);
  std::vector<double> out;
  if (ctx.self == recipient) {
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = decode(opened[i], rcfg);
  }
  return out;
}

}  // namespace sgb
