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
#include <optional>
#include <vector>

#include "sgb/correlated.hpp"
#include "sgb/ring.hpp"
#include "sgb/rng.hpp"
#include "sgb/transport.hpp"

namespace sgb {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-party protocol context: one role, one channel mesh, one randomness
// pool. Both parties run the same code in lockstep; asymmetry is expressed
// by branching on self.
struct PartyCtx {
  Role self;
  RingConfig cfg;
  Endpoint* ep;
  RandClient rand;
  Prg prg;

  PartyCtx(Role self_, Endpoint* ep_, RingConfig cfg_, std::uint64_t seed)
      : self(self_), cfg(cfg_), ep(ep_), rand(self_, ep_, cfg_), prg(seed) {}

  bool is_a() const { return self == Role::PartyA; }
  Role peer() const { return other_party(self); }
};

// Opcode carried by every party-to-party protocol message, together with the
// session id. A mismatch on receive means the two parties fell out of
// lockstep and aborts loudly instead of misinterpreting shares.
enum class Opcode : std::uint8_t {
  kShareInit = 1,
  kReveal = 2,
  kBeaverMask = 3,
  kBoolMask = 4,
  kBitOpen = 5,
  kPermMap = 6,
  kMeta = 7,
  kBucketCounts = 8,
  kHeKey = 9,
  kHeCts = 10,
  kIndicatorMask = 11,
  kGradientMask = 12,
  kShape = 13,
};

// Two-party additive secret sharing protocol suite. Values are this party's
// additive shares; a logical secret x satisfies x = <x>_A + <x>_B mod 2^l.
//
// Two fixed-point layers coexist: "scaled" values carry f fractional bits
// (reals), "raw" values are plain ring integers (bits, indices, indicator
// vectors). Multiplying raw by scaled needs no truncation, which keeps
// indicator arithmetic exact.
class Proto {
 public:
  explicit Proto(PartyCtx& ctx, std::uint32_t session_id = 1)
      : ctx_(ctx), session_id_(session_id) {}

  // protocol frame: (session id, opcode, payload)
  void send_msg(Opcode op, const Bytes& payload);
  Bytes recv_msg(Opcode expect);
  Bytes exchange_msg(Opcode op, const Bytes& mine);

  PartyCtx& ctx() { return ctx_; }
  const RingConfig& cfg() const { return ctx_.cfg; }

  // --- sharing ------------------------------------------------------------
  RingVec share_vec(const RingVec& x, Role holder);
  RingValue share(RingValue x, Role holder);

  // Reveal. If `to` is empty both parties learn the value; otherwise only
  // `to` does (the other party's return value is garbage zeros).
  RingVec open_vec(const RingVec& sh, std::optional<Role> to = std::nullopt);
  RingValue open(RingValue sh, std::optional<Role> to = std::nullopt);

  // --- local linear layer ---------------------------------------------------
  RingVec add_vec(const RingVec& x, const RingVec& y) const;
  RingVec sub_vec(const RingVec& x, const RingVec& y) const;
  RingValue add(RingValue x, RingValue y) const { return ring_add(x, y, ctx_.cfg); }
  RingValue sub(RingValue x, RingValue y) const { return ring_sub(x, y, ctx_.cfg); }

  // share of a public constant (Party A holds it)
  RingValue from_public(double c) const;
  RingVec from_public_vec(const std::vector<double>& c) const;
  RingValue add_public(RingValue sh, double c) const;
  RingVec add_public_vec(const RingVec& sh, double c) const;
  // c - x for public c
  RingVec public_minus_vec(double c, const RingVec& sh) const;

  // exact integer scalar
  RingVec scalar_mul_int(const RingVec& sh, std::int64_t k) const;
  // real scalar: multiply by encode(c), then truncate
  RingVec scalar_mul_real(const RingVec& sh, double c) const;

  // --- Beaver multiplication ------------------------------------------------
  // Element-wise product. `truncate` removes the extra f fractional bits and
  // must be set when both operands are scaled.
  RingVec mul_vec(const RingVec& x, const RingVec& y, bool truncate);
  RingValue mul(RingValue x, RingValue y, bool truncate);

  // --- division / sigmoid -----------------------------------------------
  // Iterative-refinement reciprocal of den normalized by a public bound:
  // returns shares of num/den. Accuracy contract: relative error <= 1e-3 at
  // the default two iterations when den/den_bound lies in [0.5, 1); callers
  // with smaller normalized denominators pass more iterations. extra_bits
  // carries the reciprocal at a finer fractional scale, shrinking the result
  // noise to about one ulp (the ring must have headroom for it).
  RingVec div_vec(const RingVec& num, const RingVec& den, double den_bound, int iterations = 2,
                  int extra_bits = 0);

  // 0.5*x/(1+|x|) + 0.5, accurate for |x| <= x_bound.
  RingVec sigmoid_vec(const RingVec& x, double x_bound = 8.0);

  // --- comparison / argmax -----------------------------------------------
  // Strict signed comparison; returns raw 0/1 arithmetic bit shares of
  // [u < v]. Requires |u|, |v| < 2^(l-2).
  RingVec less_than_vec(const RingVec& u, const RingVec& v);

  // Index of the maximum, ties to the lowest index. Only the final index is
  // revealed.
  std::size_t argmax(const RingVec& values);

 private:
  std::vector<std::uint64_t> and_words(const std::vector<std::uint64_t>& x,
                                       const std::vector<std::uint64_t>& y);
  RingVec bits_to_arith(const std::vector<std::uint64_t>& bit_share, std::size_t n);
  RingVec mul_vec_bits(const RingVec& x, const RingVec& y, int trunc_bits);
  RingVec reciprocal_vec(const RingVec& den_scaled, int iterations);

  PartyCtx& ctx_;
  std::uint32_t session_id_;
};

// Iterations needed for the normalized-denominator refinement to converge to
// ~2^-target_bits when d may be as small as d_min.
int goldschmidt_iterations(double d_min, int target_bits = 24);

// Extra reciprocal precision affordable in this ring (0 on narrow rings).
int division_extra_bits(const RingConfig& cfg);

}  // namespace sgb
