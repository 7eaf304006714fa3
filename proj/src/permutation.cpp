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

#include "sgb/permutation.hpp"

#include <numeric>

#include "sgb/serialize.hpp"

namespace sgb {

void Permutation::validate() const {
  std::vector<bool> seen(map.size(), false);
  for (auto d : map) {
    if (d >= map.size() || seen[d]) throw ProtocolError("not a bijection");
    seen[d] = true;
  }
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.map.resize(map.size());
  for (std::uint32_t i = 0; i < map.size(); ++i) inv.map[map[i]] = i;
  return inv;
}

RingVec secure_permute(Proto& p, const RingVec& x, const Permutation* pi, Role owner,
                       PermTripleShare& triple) {
  auto& ctx = p.ctx();
  auto& cfg = ctx.cfg;
  std::size_t n = x.size();
  if (triple.used) throw ProtocolError("permutation triple reuse");
  triple.used = true;
  if (triple.r.size() != n) throw ProtocolError("permutation triple size mismatch");

  // Step 2: owner solves pi2 = pi o pi1^{-1} and sends it, masking pi.
  Permutation pi2;
  if (ctx.self == owner) {
    if (!pi || pi->size() != n) throw ProtocolError("owner must supply a permutation of size n");
    pi2.map.resize(n);
    for (std::size_t i = 0; i < n; ++i) pi2.map[triple.pi1[i]] = pi->map[i];
    Writer w;
    for (auto v : pi2.map) w.u32(v);
    p.send_msg(Opcode::kPermMap, w.out);
  } else {
    Bytes b = p.recv_msg(Opcode::kPermMap);
    Reader rd(b);
    pi2.map.resize(n);
    for (auto& v : pi2.map) v = rd.u32();
  }

  // Step 3: reveal X - R to the owner only.
  RingVec masked = p.sub_vec(x, triple.r);
  RingVec x_minus_r = p.open_vec(masked, owner);

  // Step 4: local output shares.
  if (ctx.self == owner) {
    RingVec permuted(n);
    for (std::size_t i = 0; i < n; ++i) permuted[pi->map[i]] = x_minus_r[i];
    RingVec mine = pi2.apply(triple.pir);
    RingVec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = ring_add(permuted[i], mine[i], cfg);
    return out;
  }
  return pi2.apply(triple.pir);
}

Permutation bucket_sort_permutation(const std::vector<std::uint32_t>& bucket_of_row,
                                    std::size_t n_buckets) {
  std::vector<std::uint32_t> offset(n_buckets + 1, 0);
  for (auto b : bucket_of_row) ++offset[b + 1];
  for (std::size_t k = 1; k <= n_buckets; ++k) offset[k] += offset[k - 1];
  Permutation perm;
  perm.map.resize(bucket_of_row.size());
  for (std::size_t i = 0; i < bucket_of_row.size(); ++i) {
    perm.map[i] = offset[bucket_of_row[i]]++;
  }
  return perm;
}

std::pair<RingVec, RingVec> crp_sum_gradients(
    Proto& p, const RingVec& g_share, const RingVec& h_share, Role owner,
    const std::vector<std::vector<std::uint32_t>>& bucket_of,
    const std::vector<std::vector<std::uint32_t>>& bucket_counts, std::size_t n_buckets) {
  auto& ctx = p.ctx();
  auto& cfg = ctx.cfg;
  std::size_t m = g_share.size();
  std::size_t n_features = bucket_counts.size();
  RingVec bg(n_features * n_buckets), bh(n_features * n_buckets);

  for (std::size_t j = 0; j < n_features; ++j) {
    Permutation pi;
    if (ctx.self == owner) pi = bucket_sort_permutation(bucket_of[j], n_buckets);

    auto tg = ctx.rand.fetch_perm(m, owner);
    RingVec pg = secure_permute(p, g_share, ctx.self == owner ? &pi : nullptr, owner, tg);
    auto th = ctx.rand.fetch_perm(m, owner);
    RingVec ph = secure_permute(p, h_share, ctx.self == owner ? &pi : nullptr, owner, th);

    std::size_t pos = 0;
    for (std::size_t k = 0; k < n_buckets; ++k) {
      RingValue sg{0}, sh{0};
      for (std::uint32_t t = 0; t < bucket_counts[j][k]; ++t, ++pos) {
        sg = ring_add(sg, pg[pos], cfg);
        sh = ring_add(sh, ph[pos], cfg);
      }
      bg[j * n_buckets + k] = sg;
      bh[j * n_buckets + k] = sh;
    }
    if (pos != m) throw ProtocolError("bucket counts do not cover all rows");
  }
  return {bg, bh};
}

}  // namespace sgb
