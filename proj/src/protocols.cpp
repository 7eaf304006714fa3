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

#include "sgb/protocols.hpp"

#include <cmath>

#include "sgb/serialize.hpp"

namespace sgb {

namespace {
std::size_t words_for(std::size_t n) { return (n + 63) / 64; }
}

void Proto::send_msg(Opcode op, const Bytes& payload) {
  Writer w;
  w.u32(session_id_);
  w.u8((std::uint8_t)op);
  w.bytes(payload);
  ctx_.ep->send(ctx_.peer(), w.out);
}

Bytes Proto::recv_msg(Opcode expect) {
  Bytes b = ctx_.ep->recv(ctx_.peer());
  Reader r(b);
  std::uint32_t sid = r.u32();
  Opcode op = (Opcode)r.u8();
  if (sid != session_id_ || op != expect) {
    throw ProtocolError("protocol desync: unexpected message (session " + std::to_string(sid) +
                        ", opcode " + std::to_string((int)op) + ")");
  }
  return Bytes(b.begin() + 5, b.end());
}

Bytes Proto::exchange_msg(Opcode op, const Bytes& mine) {
  send_msg(op, mine);
  return recv_msg(op);
}

// ---------------------------------------------------------------------------
// sharing
// ---------------------------------------------------------------------------

RingVec Proto::share_vec(const RingVec& x, Role holder) {
  auto& c = ctx_.cfg;
  if (ctx_.self == holder) {
    RingVec r(x.size()), keep(x.size());
    Writer w;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r[i] = ctx_.prg.ring(c);
      keep[i] = ring_sub(x[i], r[i], c);
    }
    w.ring_vec(r, c);
    send_msg(Opcode::kShareInit, w.out);
    return keep;
  }
  if (holder != ctx_.peer()) throw ProtocolError("share_init holder must be a party");
  Bytes b = recv_msg(Opcode::kShareInit);
  Reader rd(b);
  return rd.ring_vec(x.size(), c);
}

RingValue Proto::share(RingValue x, Role holder) { return share_vec({x}, holder)[0]; }

RingVec Proto::open_vec(const RingVec& sh, std::optional<Role> to) {
  auto& c = ctx_.cfg;
  if (!to) {
    Writer w;
    w.ring_vec(sh, c);
    Bytes theirs = exchange_msg(Opcode::kReveal, w.out);
    Reader rd(theirs);
    RingVec out(sh.size());
    for (std::size_t i = 0; i < sh.size(); ++i) out[i] = ring_add(sh[i], rd.ring(c), c);
    return out;
  }
  if (ctx_.self != *to) {
    Writer w;
    w.ring_vec(sh, c);
    send_msg(Opcode::kReveal, w.out);
    return RingVec(sh.size());
  }
  Bytes theirs = recv_msg(Opcode::kReveal);
  Reader rd(theirs);
  RingVec out(sh.size());
  for (std::size_t i = 0; i < sh.size(); ++i) out[i] = ring_add(sh[i], rd.ring(c), c);
  return out;
}

RingValue Proto::open(RingValue sh, std::optional<Role> to) { return open_vec({sh}, to)[0]; }

// ---------------------------------------------------------------------------
// linear layer
// ---------------------------------------------------------------------------

RingVec Proto::add_vec(const RingVec& x, const RingVec& y) const {
  if (x.size() != y.size()) throw ProtocolError("length mismatch");
  RingVec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = ring_add(x[i], y[i], ctx_.cfg);
  return z;
}

RingVec Proto::sub_vec(const RingVec& x, const RingVec& y) const {
  if (x.size() != y.size()) throw ProtocolError("length mismatch");
  RingVec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = ring_sub(x[i], y[i], ctx_.cfg);
  return z;
}

RingValue Proto::from_public(double c) const {
  return ctx_.is_a() ? encode(c, ctx_.cfg) : RingValue{0};
}

RingVec Proto::from_public_vec(const std::vector<double>& c) const {
  RingVec v(c.size());
  if (ctx_.is_a()) {
    for (std::size_t i = 0; i < c.size(); ++i) v[i] = encode(c[i], ctx_.cfg);
  }
  return v;
}

RingValue Proto::add_public(RingValue sh, double c) const {
  return ctx_.is_a() ? ring_add(sh, encode(c, ctx_.cfg), ctx_.cfg) : sh;
}

RingVec Proto::add_public_vec(const RingVec& sh, double c) const {
  if (!ctx_.is_a()) return sh;
  RingVec z(sh.size());
  RingValue e = encode(c, ctx_.cfg);
  for (std::size_t i = 0; i < sh.size(); ++i) z[i] = ring_add(sh[i], e, ctx_.cfg);
  return z;
}

RingVec Proto::public_minus_vec(double c, const RingVec& sh) const {
  RingVec z(sh.size());
  RingValue e = ctx_.is_a() ? encode(c, ctx_.cfg) : RingValue{0};
  for (std::size_t i = 0; i < sh.size(); ++i) z[i] = ring_sub(e, sh[i], ctx_.cfg);
  return z;
}

RingVec Proto::scalar_mul_int(const RingVec& sh, std::int64_t k) const {
  RingVec z(sh.size());
  RingValue kv{(u128)(i128)k & ctx_.cfg.mask()};
  for (std::size_t i = 0; i < sh.size(); ++i) z[i] = ring_mul(sh[i], kv, ctx_.cfg);
  return z;
}

RingVec Proto::scalar_mul_real(const RingVec& sh, double c) const {
  RingVec z(sh.size());
  RingValue e = encode(c, ctx_.cfg);
  for (std::size_t i = 0; i < sh.size(); ++i) {
    z[i] = local_truncate(ring_mul(sh[i], e, ctx_.cfg), ctx_.cfg);
  }
  return z;
}

// ---------------------------------------------------------------------------
// Beaver multiplication
// ---------------------------------------------------------------------------

RingVec Proto::mul_vec_bits(const RingVec& x, const RingVec& y, int trunc_bits) {
  if (x.size() != y.size()) throw ProtocolError("length mismatch");
  auto& c = ctx_.cfg;
  std::size_t n = x.size();
  ctx_.rand.ensure_beaver(n);
  std::vector<BeaverShare> ts(n);
  Writer w;
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = ctx_.rand.draw_beaver();
    w.ring(ring_sub(x[i], ts[i].a, c), c);
    w.ring(ring_sub(y[i], ts[i].b, c), c);
  }
  Bytes theirs = exchange_msg(Opcode::kBeaverMask, w.out);
  Reader mine(w.out), peer(theirs);
  RingVec z(n);
  for (std::size_t i = 0; i < n; ++i) {
    RingValue e = ring_add(mine.ring(c), peer.ring(c), c);
    RingValue f = ring_add(mine.ring(c), peer.ring(c), c);
    RingValue zi = ring_add(ring_mul(f, x[i], c), ring_mul(e, y[i], c), c);
    zi = ring_add(zi, ts[i].c, c);
    if (!ctx_.is_a()) zi = ring_sub(zi, ring_mul(e, f, c), c);
    z[i] = trunc_bits > 0 ? local_truncate_bits(zi, trunc_bits, c) : zi;
  }
  return z;
}

RingVec Proto::mul_vec(const RingVec& x, const RingVec& y, bool truncate) {
  return mul_vec_bits(x, y, truncate ? ctx_.cfg.f : 0);
}

RingValue Proto::mul(RingValue x, RingValue y, bool truncate) {
  return mul_vec({x}, {y}, truncate)[0];
}

// ---------------------------------------------------------------------------
// Boolean layer: packed-word XOR shares, bit-triple ANDs
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> Proto::and_words(const std::vector<std::uint64_t>& x,
                                            const std::vector<std::uint64_t>& y) {
  std::size_t n = x.size();
  ctx_.rand.ensure_bit_triples(n);
  std::vector<BitTripleWords> ts(n);
  Writer w;
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = ctx_.rand.draw_bit_triple();
    w.u64(x[i] ^ ts[i].a);
    w.u64(y[i] ^ ts[i].b);
  }
  Bytes theirs = exchange_msg(Opcode::kBoolMask, w.out);
  Reader mine(w.out), peer(theirs);
  std::vector<std::uint64_t> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t e = mine.u64() ^ peer.u64();
    std::uint64_t f = mine.u64() ^ peer.u64();
    z[i] = (f & ts[i].a) ^ (e & ts[i].b) ^ ts[i].c;
    if (!ctx_.is_a()) z[i] ^= e & f;
  }
  return z;
}

RingVec Proto::bits_to_arith(const std::vector<std::uint64_t>& bit_share, std::size_t n) {
  auto& c = ctx_.cfg;
  std::size_t nw = words_for(n);
  std::vector<BitPairBlock> blocks(nw);
  Writer w;
  for (std::size_t i = 0; i < nw; ++i) {
    blocks[i] = ctx_.rand.draw_bit_pair_block();
    w.u64(bit_share[i] ^ blocks[i].r_bool);
  }
  Bytes theirs = exchange_msg(Opcode::kBitOpen, w.out);
  Reader mine(w.out), peer(theirs);
  RingVec out(n);
  for (std::size_t i = 0; i < nw; ++i) {
    std::uint64_t m = mine.u64() ^ peer.u64();
    std::size_t lanes = std::min<std::size_t>(64, n - i * 64);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      const RingValue& ra = blocks[i].r_arith[lane];
      if ((m >> lane) & 1) {
        RingValue one{ctx_.is_a() ? (u128)1 : (u128)0};
        out[i * 64 + lane] = ring_sub(one, ra, c);
      } else {
        out[i * 64 + lane] = ra;
      }
    }
  }
  return out;
}

RingVec Proto::less_than_vec(const RingVec& u, const RingVec& v) {
  if (u.size() != v.size()) throw ProtocolError("length mismatch");
  auto& c = ctx_.cfg;
  std::size_t n = u.size();
  std::size_t nw = words_for(n);
  int l = c.l;

  // d = u - v; sign(d) = 1 iff u < v. The two arithmetic shares of d are
  // Boolean inputs to a shared ripple-carry adder: each party's XOR share of
  // operand "mine" is its own share's bit, of operand "theirs" is zero.
  RingVec d = sub_vec(u, v);
  // p[j] = bitplane j of my share: the share of (x_j XOR y_j) on both sides.
  std::vector<std::vector<std::uint64_t>> p(l, std::vector<std::uint64_t>(nw, 0));
  for (std::size_t i = 0; i < n; ++i) {
    u128 raw = d[i].raw;
    for (int j = 0; j < l; ++j) {
      p[j][i / 64] |= (std::uint64_t)((raw >> j) & 1) << (i % 64);
    }
  }

  // Generate terms g[j] = x_j AND y_j for j < l-1, all in one round. The
  // XOR share of x_j is p[j] at A and 0 at B; of y_j it is the reverse.
  std::vector<std::uint64_t> xs, ys;
  xs.reserve((l - 1) * nw);
  ys.reserve((l - 1) * nw);
  for (int j = 0; j < l - 1; ++j) {
    for (std::size_t k = 0; k < nw; ++k) {
      xs.push_back(ctx_.is_a() ? p[j][k] : 0);
      ys.push_back(ctx_.is_a() ? 0 : p[j][k]);
    }
  }
  std::vector<std::uint64_t> g_all = and_words(xs, ys);

  // carry chain: c_0 = g_0; c_j = g_j XOR (c_{j-1} AND p_j)
  std::vector<std::uint64_t> carry(g_all.begin(), g_all.begin() + nw);
  for (int j = 1; j < l - 1; ++j) {
    std::vector<std::uint64_t> t = and_words(
        carry, std::vector<std::uint64_t>(p[j].begin(), p[j].end()));
    for (std::size_t k = 0; k < nw; ++k) {
      carry[k] = t[k] ^ g_all[(std::size_t)j * nw + k];
    }
  }

  // msb = p_{l-1} XOR c_{l-2}
  std::vector<std::uint64_t> msb(nw);
  for (std::size_t k = 0; k < nw; ++k) msb[k] = p[l - 1][k] ^ carry[k];
  return bits_to_arith(msb, n);
}

std::size_t Proto::argmax(const RingVec& values) {
  if (values.empty()) throw ProtocolError("argmax on empty input");
  auto& c = ctx_.cfg;
  RingVec vals = values;
  // indices as raw ring integers, public at start (held by A's share)
  RingVec idx(values.size());
  if (ctx_.is_a()) {
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = RingValue{(u128)i};
  }

  while (vals.size() > 1) {
    std::size_t pairs = vals.size() / 2;
    RingVec u(pairs), v(pairs), iu(pairs), iv(pairs);
    for (std::size_t t = 0; t < pairs; ++t) {
      u[t] = vals[2 * t];
      v[t] = vals[2 * t + 1];
      iu[t] = idx[2 * t];
      iv[t] = idx[2 * t + 1];
    }
    RingVec b = less_than_vec(u, v);  // 1 iff u < v; ties keep the earlier element
    // winner = u + b*(v-u), same for the index; both selections batched.
    RingVec bb(2 * pairs), diff(2 * pairs);
    for (std::size_t t = 0; t < pairs; ++t) {
      bb[t] = b[t];
      bb[pairs + t] = b[t];
      diff[t] = ring_sub(v[t], u[t], c);
      diff[pairs + t] = ring_sub(iv[t], iu[t], c);
    }
    RingVec prod = mul_vec(bb, diff, /*truncate=*/false);
    RingVec nvals(pairs + (vals.size() & 1)), nidx(nvals.size());
    for (std::size_t t = 0; t < pairs; ++t) {
      nvals[t] = ring_add(u[t], prod[t], c);
      nidx[t] = ring_add(iu[t], prod[pairs + t], c);
    }
    if (vals.size() & 1) {
      nvals[pairs] = vals.back();
      nidx[pairs] = idx.back();
    }
    vals = std::move(nvals);
    idx = std::move(nidx);
  }

  RingValue flat = open(idx[0]);
  return (std::size_t)(std::uint64_t)flat.raw;
}

// ---------------------------------------------------------------------------
// division and sigmoid
// ---------------------------------------------------------------------------

int goldschmidt_iterations(double d_min, int target_bits) {
  d_min = std::min(std::max(d_min, 1e-9), 1.0);
  auto e0 = [](double d) { return std::fabs(1.0 - d * (2.9142 - 2.0 * d)); };
  // error after the linear initialization, worst over [d_min, 1]
  double e = std::max(std::max(e0(d_min), e0(1.0)), 0.062);
  if (e >= 1.0) e = 1.0 - 1e-9;
  double need = (double)target_bits * std::log(2.0) / -std::log(e);
  int k = (int)std::ceil(std::log2(std::max(need, 1.0)));
  return std::max(k, 2);
}

int division_extra_bits(const RingConfig& cfg) {
  // the reciprocal path must keep num*y' below 2^(l-2)
  return cfg.l >= 3 * cfg.f + 60 ? cfg.f : 0;
}

RingVec Proto::reciprocal_vec(const RingVec& d, int iterations) {
  // y0 = 2.9142 - 2 d ; then y *= (2 - D), D *= (2 - D)
  RingVec y = add_public_vec(scalar_mul_int(d, -2), 2.9142);
  RingVec D = mul_vec(d, y, true);
  for (int it = 0; it < iterations; ++it) {
    RingVec F = public_minus_vec(2.0, D);
    y = mul_vec(y, F, true);
    if (it + 1 < iterations) D = mul_vec(D, F, true);
  }
  return y;
}

RingVec Proto::div_vec(const RingVec& num, const RingVec& den, double den_bound, int iterations,
                       int extra_bits) {
  if (num.size() != den.size()) throw ProtocolError("length mismatch");
  if (den_bound <= 0) throw ProtocolError("den_bound must be positive");
  auto& c = ctx_.cfg;
  RingVec d = scalar_mul_real(den, 1.0 / den_bound);
  if (extra_bits == 0) {
    RingVec y = reciprocal_vec(d, iterations);
    RingVec q = mul_vec(num, y, true);
    return scalar_mul_real(q, 1.0 / den_bound);
  }

  // Fine-scale variant: the reciprocal runs with f+extra_bits fractional
  // bits, and the final product folds the downshift, so the quotient carries
  // only about one ulp of truncation noise and a zero numerator stays an
  // exact zero.
  int fs = c.f + extra_bits;
  std::size_t n = d.size();
  RingVec y(n);
  RingValue init = ctx_.is_a()
                       ? RingValue{(u128)detail::ld_to_i128(std::rintl(2.9142L *
                                                                       std::exp2l(fs))) &
                                   c.mask()}
                       : RingValue{0};
  for (std::size_t i = 0; i < n; ++i) {
    RingValue dd = ring_mul(d[i], RingValue{(u128)1 << (extra_bits + 1)}, c);
    y[i] = ring_sub(init, dd, c);
  }
  RingVec D = mul_vec_bits(d, y, c.f);  // lands on the fine scale
  RingValue two_fine{((u128)2 << fs) & c.mask()};
  for (int it = 0; it < iterations; ++it) {
    RingVec F(n);
    for (std::size_t i = 0; i < n; ++i) {
      F[i] = ring_sub(ctx_.is_a() ? two_fine : RingValue{0}, D[i], c);
    }
    y = mul_vec_bits(y, F, fs);
    if (it + 1 < iterations) D = mul_vec_bits(D, F, fs);
  }
  RingVec q = mul_vec_bits(num, y, fs);  // back to f fractional bits
  return scalar_mul_real(q, 1.0 / den_bound);
}

RingVec Proto::sigmoid_vec(const RingVec& x, double x_bound) {
  RingVec zero(x.size());
  RingVec b = less_than_vec(x, zero);              // 1 iff x < 0
  RingVec bx = mul_vec(b, x, /*truncate=*/false);  // raw bit times scaled value
  RingVec absx = sub_vec(x, scalar_mul_int(bx, 2));
  RingVec den = add_public_vec(absx, 1.0);
  double den_bound = 1.0 + x_bound;
  int extra = division_extra_bits(ctx_.cfg);
  int iters = goldschmidt_iterations(1.0 / den_bound, ctx_.cfg.f + extra + 4);
  RingVec ratio = div_vec(x, den, den_bound, iters, extra);
  RingVec half = scalar_mul_real(ratio, 0.5);
  return add_public_vec(half, 0.5);
}

}  // namespace sgb
