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

#include "sgb/correlated.hpp"

#include "sgb/rng.hpp"
#include "sgb/serialize.hpp"

namespace sgb {

namespace {
constexpr std::size_t kBeaverBatch = 4096;
constexpr std::size_t kBitTripleBatch = 4096;
constexpr std::size_t kBitPairBatch = 64;

Bytes encode_request(RandKind kind, std::uint64_t count, std::uint64_t n, Role owner) {
  Writer w;
  w.u8((std::uint8_t)kind);
  w.u64(count);
  w.u64(n);
  w.u8((std::uint8_t)owner);
  return std::move(w.out);
}
}  // namespace

void RandClient::request(RandKind kind, std::uint64_t count, std::uint64_t n, Role owner) {
  if (self_ == Role::PartyA) {
    ep_->send(Role::Dealer, encode_request(kind, count, n, owner));
  }
}

Bytes RandClient::request_and_recv(RandKind kind, std::uint64_t count, std::uint64_t n,
                                   Role owner) {
  request(kind, count, n, owner);
  return ep_->recv(Role::Dealer);
}

void RandClient::ensure_beaver(std::size_t n) {
  while (beaver_.size() < n) {
    std::uint64_t count = std::max(n - beaver_.size(), kBeaverBatch);
    Bytes b = request_and_recv(RandKind::kBeaver, count, 0, self_);
    Reader r(b);
    for (std::uint64_t i = 0; i < count; ++i) {
      BeaverShare t{r.ring(cfg_), r.ring(cfg_), r.ring(cfg_)};
      beaver_.push_back(t);
    }
  }
}

BeaverShare RandClient::draw_beaver() {
  ensure_beaver(1);
  BeaverShare t = beaver_.front();
  beaver_.pop_front();
  ++beaver_consumed_;
  return t;
}

void RandClient::ensure_bit_triples(std::size_t words) {
  while (bit_triples_.size() < words) {
    std::uint64_t count = std::max(words - bit_triples_.size(), kBitTripleBatch);
    Bytes b = request_and_recv(RandKind::kBitTriple, count, 0, self_);
    Reader r(b);
    for (std::uint64_t i = 0; i < count; ++i) {
      bit_triples_.push_back({r.u64(), r.u64(), r.u64()});
    }
  }
}

BitTripleWords RandClient::draw_bit_triple() {
  ensure_bit_triples(1);
  BitTripleWords t = bit_triples_.front();
  bit_triples_.pop_front();
  return t;
}

void RandClient::ensure_bit_pairs(std::size_t blocks) {
  while (bit_pairs_.size() < blocks) {
    std::uint64_t count = std::max(blocks - bit_pairs_.size(), kBitPairBatch);
    Bytes b = request_and_recv(RandKind::kBitPair, count, 0, self_);
    Reader r(b);
    for (std::uint64_t i = 0; i < count; ++i) {
      BitPairBlock blk;
      blk.r_bool = r.u64();
      blk.r_arith = r.ring_vec(64, cfg_);
      bit_pairs_.push_back(std::move(blk));
    }
  }
}

BitPairBlock RandClient::draw_bit_pair_block() {
  ensure_bit_pairs(1);
  BitPairBlock t = std::move(bit_pairs_.front());
  bit_pairs_.pop_front();
  return t;
}

PermTripleShare RandClient::fetch_perm(std::size_t n, Role owner) {
  Bytes b = request_and_recv(RandKind::kPerm, 1, n, owner);
  Reader r(b);
  PermTripleShare t;
  if (self_ == owner) {
    t.pi1.resize(n);
    for (auto& x : t.pi1) x = r.u32();
  }
  t.r = r.ring_vec(n, cfg_);
  t.pir = r.ring_vec(n, cfg_);
  return t;
}

InnerProdShare RandClient::fetch_inner_prod(std::size_t m, std::size_t n_ind, Role owner) {
  Bytes b = request_and_recv(RandKind::kInnerProd, n_ind, m, owner);
  Reader r(b);
  InnerProdShare s;
  if (self_ == owner) {
    s.a.resize(n_ind);
    for (auto& v : s.a) v = r.ring_vec(m, cfg_);
  } else {
    s.b_g = r.ring_vec(m, cfg_);
    s.b_h = r.ring_vec(m, cfg_);
  }
  s.c_g = r.ring_vec(n_ind, cfg_);
  s.c_h = r.ring_vec(n_ind, cfg_);
  return s;
}

void shutdown_dealer(Endpoint& ep) {
  ep.send(Role::Dealer, encode_request(RandKind::kShutdown, 0, 0, Role::PartyA));
}

// ---------------------------------------------------------------------------
// DealerService
// ---------------------------------------------------------------------------

DealerService::DealerService(Endpoint* ep, RingConfig cfg, std::uint64_t seed)
    : ep_(ep), cfg_(cfg), prg_(seed) {}

void DealerService::serve() {
  for (;;) {
    Bytes req = ep_->recv(Role::PartyA);
    Reader r(req);
    if ((RandKind)r.u8() == RandKind::kShutdown) return;
    serve_one(req);
  }
}

void DealerService::serve_one(const Bytes& req) {
  Reader r(req);
  RandKind kind = (RandKind)r.u8();
  std::uint64_t count = r.u64();
  std::uint64_t n = r.u64();
  Role owner = (Role)r.u8();

  Writer to_a, to_b;
  switch (kind) {
    case RandKind::kBeaver: {
      for (std::uint64_t i = 0; i < count; ++i) {
        RingValue a = prg_.ring(cfg_), b = prg_.ring(cfg_);
        if (force_beaver_ab) {
          a = force_beaver_ab->first;
          b = force_beaver_ab->second;
          force_beaver_ab.reset();
        }
        RingValue c = ring_mul(a, b, cfg_);
        for (RingValue v : {a, b, c}) {
          RingValue va = prg_.ring(cfg_);
          to_a.ring(va, cfg_);
          to_b.ring(ring_sub(v, va, cfg_), cfg_);
        }
      }
      break;
    }
    case RandKind::kBitTriple: {
      for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t a = prg_.word(), b = prg_.word();
        std::uint64_t c = a & b;
        for (std::uint64_t v : {a, b, c}) {
          std::uint64_t va = prg_.word();
          to_a.u64(va);
          to_b.u64(v ^ va);
        }
      }
      break;
    }
    case RandKind::kBitPair: {
      for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t bits = prg_.word();
        std::uint64_t mask = prg_.word();
        to_a.u64(mask);
        to_b.u64(bits ^ mask);
        for (int lane = 0; lane < 64; ++lane) {
          RingValue bit{(u128)((bits >> lane) & 1)};
          RingValue sa = prg_.ring(cfg_);
          to_a.ring(sa, cfg_);
          to_b.ring(ring_sub(bit, sa, cfg_), cfg_);
        }
      }
      break;
    }
    case RandKind::kPerm: {
      auto pi1 = force_perm ? *force_perm : prg_.permutation(n);
      force_perm.reset();
      RingVec big = force_perm_r_zero ? RingVec(n) : prg_.ring_vec(n, cfg_);
      RingVec pir(n);
      for (std::uint64_t i = 0; i < n; ++i) pir[pi1[i]] = big[i];
      Writer& own = (owner == Role::PartyA) ? to_a : to_b;
      for (auto x : pi1) own.u32(x);
      for (const RingVec* vec : {&big, &pir}) {
        for (RingValue v : *vec) {
          RingValue va = prg_.ring(cfg_);
          to_a.ring(va, cfg_);
          to_b.ring(ring_sub(v, va, cfg_), cfg_);
        }
      }
      break;
    }
    case RandKind::kInnerProd: {
      std::uint64_t n_ind = count, m = n;
      Writer& own = (owner == Role::PartyA) ? to_a : to_b;
      Writer& peer = (owner == Role::PartyA) ? to_b : to_a;
      RingVec b_g = prg_.ring_vec(m, cfg_);
      RingVec b_h = prg_.ring_vec(m, cfg_);
      std::vector<RingVec> a(n_ind);
      for (auto& v : a) v = prg_.ring_vec(m, cfg_);
      for (const auto& v : a) own.ring_vec(v, cfg_);
      peer.ring_vec(b_g, cfg_);
      peer.ring_vec(b_h, cfg_);
      for (const RingVec* bm : {&b_g, &b_h}) {
        for (std::uint64_t j = 0; j < n_ind; ++j) {
          RingValue c{0};
          for (std::uint64_t i = 0; i < m; ++i) {
            c = ring_add(c, ring_mul(a[j][i], (*bm)[i], cfg_), cfg_);
          }
          RingValue ca = prg_.ring(cfg_);
          to_a.ring(ca, cfg_);
          to_b.ring(ring_sub(c, ca, cfg_), cfg_);
        }
      }
      break;
    }
    case RandKind::kShutdown:
      return;
  }
  ep_->send(Role::PartyA, to_a.out);
  ep_->send(Role::PartyB, to_b.out);
}

}  // namespace sgb
