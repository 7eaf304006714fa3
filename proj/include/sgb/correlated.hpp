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
#include <deque>
#include <optional>
#include <vector>

#include "sgb/ring.hpp"
#include "sgb/rng.hpp"
#include "sgb/transport.hpp"

namespace sgb {

// Kinds of input-independent correlated randomness served by the dealer.
enum class RandKind : std::uint8_t {
  kBeaver = 0,     // (a, b, c=ab) over Z_{2^l}
  kBitTriple = 1,  // (a, b, c=a&b) over Z_2, 64 lanes per word
  kBitPair = 2,    // random bit shared both Boolean and arithmetic (raw 0/1)
  kPerm = 3,       // (pi1, <R>, <pi1(R)>)
  kInnerProd = 4,  // masks for owner-private-vector inner products
  kShutdown = 255,
};

struct BeaverShare {
  RingValue a, b, c;
};

// 64 bit-triple lanes packed per word.
struct BitTripleWords {
  std::uint64_t a = 0, b = 0, c = 0;
};

// 64 bit pairs: Boolean share packed in one word, arithmetic shares raw 0/1.
struct BitPairBlock {
  std::uint64_t r_bool = 0;
  RingVec r_arith;  // 64 entries
};

// One party's half of a permutation triple. pi1 is only populated at the
// permuting party.
struct PermTripleShare {
  std::vector<std::uint32_t> pi1;
  RingVec r;
  RingVec pir;
  bool used = false;
};

// Correlation for inner products <s, v> where s is private to `owner` and v
// is the peer's share vector, masked once and reused across all indicators.
// Owner side: per-indicator masks a[j] and shares of c = <a[j], b_*>.
// Peer side: the two vector masks b_g, b_h and its shares of c.
struct InnerProdShare {
  std::vector<RingVec> a;  // owner only: n_ind vectors of length m
  RingVec b_g, b_h;        // peer only: length m
  RingVec c_g, c_h;        // both: n_ind shares each
};

// Party-side view of the dealer: pull-based pools for stream kinds, direct
// fetches for sized correlations. Party A drives the request channel; Party B
// reaches the matching consumption point in lockstep and only receives, so
// the dealer never has a data-bearing inbound path from B at all.
class RandClient {
 public:
  RandClient() = default;
  RandClient(Role self, Endpoint* ep, RingConfig cfg) : self_(self), ep_(ep), cfg_(cfg) {}

  void ensure_beaver(std::size_t n);
  BeaverShare draw_beaver();

  void ensure_bit_triples(std::size_t words);
  BitTripleWords draw_bit_triple();

  void ensure_bit_pairs(std::size_t blocks);
  BitPairBlock draw_bit_pair_block();

  PermTripleShare fetch_perm(std::size_t n, Role owner);
  InnerProdShare fetch_inner_prod(std::size_t m, std::size_t n_ind, Role owner);

  std::uint64_t beaver_consumed() const { return beaver_consumed_; }

 private:
  void request(RandKind kind, std::uint64_t count, std::uint64_t n, Role owner);
  Bytes request_and_recv(RandKind kind, std::uint64_t count, std::uint64_t n, Role owner);

  Role self_ = Role::PartyA;
  Endpoint* ep_ = nullptr;
  RingConfig cfg_;
  std::deque<BeaverShare> beaver_;
  std::deque<BitTripleWords> bit_triples_;
  std::deque<BitPairBlock> bit_pairs_;
  std::uint64_t beaver_consumed_ = 0;
};

// Sends the dealer a shutdown frame (Party A only).
void shutdown_dealer(Endpoint& ep);

// The offline randomness generator. Serves batches to both parties from a
// seeded generator; the only frames it ever reads are (kind, count, n, owner)
// requests from Party A.
class DealerService {
 public:
  DealerService(Endpoint* ep, RingConfig cfg, std::uint64_t seed);

  // Serves requests until a shutdown frame arrives.
  void serve();

  // Test hooks: values consumed by the next matching generation.
  std::optional<std::pair<RingValue, RingValue>> force_beaver_ab;
  std::optional<std::vector<std::uint32_t>> force_perm;
  bool force_perm_r_zero = false;

 private:
  void serve_one(const Bytes& req);

  Endpoint* ep_;
  RingConfig cfg_;
  Prg prg_;
};

}  // namespace sgb
