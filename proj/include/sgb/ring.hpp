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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgb {

using u128 = unsigned __int128;
using i128 = __int128;

// Fixed-point arithmetic in Z_{2^l}. Reals are scaled by 2^f and live in the
// ring as two's-complement values; products carry 2f fractional bits until
// truncated.
struct RingConfig {
  int l = 128;      // ring width in bits
  int f = 20;       // fractional bits
  int sigma = 40;   // statistical masking slack, bits

  void validate() const {
    if (l < 64 || l > 128) throw std::invalid_argument("ring width must be in [64,128]");
    if (f < 1) throw std::invalid_argument("fractional bits must be >= 1");
    if (sigma < 1) throw std::invalid_argument("sigma must be >= 1");
    if (2 * f + 8 >= l) throw std::invalid_argument("ring too narrow for products: need 2f+8 < l");
  }

  u128 mask() const { return l == 128 ? ~(u128)0 : (((u128)1 << l) - 1); }
  u128 sign_bit() const { return (u128)1 << (l - 1); }
  u128 unit() const { return (u128)1 << f; }  // encode(1.0)
  int share_bytes() const { return l / 8; }
};

struct RingValue {
  u128 raw = 0;
  friend bool operator==(const RingValue& a, const RingValue& b) { return a.raw == b.raw; }
  friend bool operator!=(const RingValue& a, const RingValue& b) { return a.raw != b.raw; }
};

using RingVec = std::vector<RingValue>;

inline RingValue ring_add(RingValue a, RingValue b, const RingConfig& cfg) {
  return {(a.raw + b.raw) & cfg.mask()};
}

inline RingValue ring_sub(RingValue a, RingValue b, const RingConfig& cfg) {
  return {(a.raw - b.raw) & cfg.mask()};
}

inline RingValue ring_mul(RingValue a, RingValue b, const RingConfig& cfg) {
  return {(a.raw * b.raw) & cfg.mask()};
}

inline RingValue ring_neg(RingValue a, const RingConfig& cfg) {
  return {(~a.raw + 1) & cfg.mask()};
}

// Two's-complement reading of an l-bit value.
inline i128 ring_signed(RingValue v, const RingConfig& cfg) {
  if (v.raw & cfg.sign_bit()) {
    // subtracting 2^l; for l == 128 the wrap does it natively
    return (i128)(v.raw - cfg.mask() - 1);
  }
  return (i128)v.raw;
}

namespace detail {

inline long double i128_to_ld(i128 v) {
  bool neg = v < 0;
  u128 m = neg ? (u128)(-v) : (u128)v;
  long double r = (long double)(std::uint64_t)(m >> 64) * 18446744073709551616.0L +
                  (long double)(std::uint64_t)m;
  return neg ? -r : r;
}

inline i128 ld_to_i128(long double v) {
  bool neg = v < 0;
  long double m = neg ? -v : v;
  long double hi = std::floor(m / 18446744073709551616.0L);
  std::uint64_t lo = (std::uint64_t)(m - hi * 18446744073709551616.0L);
  u128 r = ((u128)(std::uint64_t)hi << 64) | lo;
  return neg ? -(i128)r : (i128)r;
}

}  // namespace detail

// raw = round(x * 2^f) mod 2^l. Throws on |x| >= 2^(l-f-1).
inline RingValue encode(double x, const RingConfig& cfg) {
  long double bound = std::exp2l(cfg.l - cfg.f - 1);
  if (!(std::fabs((long double)x) < bound)) {
    throw std::overflow_error("encode: value out of fixed-point range");
  }
  long double scaled = std::rintl((long double)x * std::exp2l(cfg.f));
  return {(u128)detail::ld_to_i128(scaled) & cfg.mask()};
}

inline double decode(RingValue v, const RingConfig& cfg) {
  return (double)(detail::i128_to_ld(ring_signed(v, cfg)) / std::exp2l(cfg.f));
}

// Decoding for un-truncated products (2f fractional bits).
inline double decode2f(RingValue v, const RingConfig& cfg) {
  return (double)(detail::i128_to_ld(ring_signed(v, cfg)) / std::exp2l(2 * cfg.f));
}

// Independent per-share truncation after a fixed-point multiplication: an
// arithmetic shift that removes the f low bits, with a half-ulp rounding
// offset so that shares of zero reconstruct to zero. When both shares of a
// product are truncated this way, the reconstruction is within 2*2^-f of the
// real product unless the (negligible-probability) share wrap occurs.
inline RingValue local_truncate(RingValue v, const RingConfig& cfg) {
  i128 s = ring_signed(v, cfg);
  s = (s + ((i128)1 << (cfg.f - 1))) >> cfg.f;
  return {(u128)s & cfg.mask()};
}

// Same scheme with an explicit shift, for values carried at a finer
// fractional scale than f.
inline RingValue local_truncate_bits(RingValue v, int bits, const RingConfig& cfg) {
  i128 s = ring_signed(v, cfg);
  s = (s + ((i128)1 << (bits - 1))) >> bits;
  return {(u128)s & cfg.mask()};
}

inline RingValue ring_from_u64(std::uint64_t x) { return {(u128)x}; }

}  // namespace sgb
