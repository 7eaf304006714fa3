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

#include "sgb/he.hpp"

#include "sgb/serialize.hpp"

namespace sgb {

// ---------------------------------------------------------------------------
// Paillier
// ---------------------------------------------------------------------------

Paillier Paillier::keygen(int bits, std::uint64_t seed) {
  if (bits < 1024) throw ProtocolError("key size below 1024 bits");
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed((unsigned long)seed);
  auto prime = [&](int nbits) {
    mpz_class p = rng.get_z_bits(nbits);
    mpz_setbit(p.get_mpz_t(), nbits - 1);  // keep the size
    mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    return p;
  };
  Paillier out;
  mpz_class p = prime(bits / 2), q = prime(bits / 2);
  while (q == p) q = prime(bits / 2);
  out.pk_.n = p * q;
  out.pk_.n2 = out.pk_.n * out.pk_.n;
  out.pk_.bits = bits;
  mpz_class pm1 = p - 1, qm1 = q - 1;
  mpz_lcm(out.lambda_.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  // with g = n+1: L(g^lambda) = lambda, so mu = lambda^-1 mod n
  if (mpz_invert(out.mu_.get_mpz_t(), out.lambda_.get_mpz_t(), out.pk_.n.get_mpz_t()) == 0) {
    throw ProtocolError("keygen: lambda not invertible");
  }
  return out;
}

mpz_class Paillier::enc(const PublicKey& pk, const mpz_class& m, gmp_randclass& rng) {
  mpz_class mm = m % pk.n;
  if (mm < 0) mm += pk.n;
  mpz_class r = rng.get_z_range(pk.n - 1) + 1;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n2.get_mpz_t());
  mpz_class gm = (1 + mm * pk.n) % pk.n2;  // (n+1)^m mod n^2
  return (gm * rn) % pk.n2;
}

mpz_class Paillier::dec(const mpz_class& c) const {
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.get_mpz_t(), lambda_.get_mpz_t(), pk_.n2.get_mpz_t());
  mpz_class l = (u - 1) / pk_.n;
  return (l * mu_) % pk_.n;
}

mpz_class Paillier::add(const PublicKey& pk, const mpz_class& c1, const mpz_class& c2) {
  return (c1 * c2) % pk.n2;
}

mpz_class Paillier::add_plain(const PublicKey& pk, const mpz_class& c, const mpz_class& m) {
  mpz_class mm = m % pk.n;
  if (mm < 0) mm += pk.n;
  return (c * ((1 + mm * pk.n) % pk.n2)) % pk.n2;
}

mpz_class Paillier::mul_plain(const PublicKey& pk, const mpz_class& c, const mpz_class& k) {
  mpz_class kk = k % pk.n;
  if (kk < 0) kk += pk.n;
  mpz_class out;
  mpz_powm(out.get_mpz_t(), c.get_mpz_t(), kk.get_mpz_t(), pk.n2.get_mpz_t());
  return out;
}

// ---------------------------------------------------------------------------
// conversions / wire format
// ---------------------------------------------------------------------------

mpz_class ring_to_mpz(RingValue v, const RingConfig& cfg) {
  (void)cfg;
  std::uint64_t limbs[2] = {(std::uint64_t)v.raw, (std::uint64_t)(v.raw >> 64)};
  mpz_class m;
  mpz_import(m.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, limbs);
  return m;
}

RingValue mpz_to_ring(const mpz_class& m, const RingConfig& cfg) {
  mpz_class r = m;
  if (r < 0) {
    mpz_class mod = mpz_class(1) << cfg.l;
    r %= mod;
    if (r < 0) r += mod;
  }
  std::uint64_t limbs[4] = {0, 0, 0, 0};
  std::size_t count = 0;
  mpz_export(limbs, &count, -1, sizeof(std::uint64_t), 0, 0, r.get_mpz_t());
  u128 raw = ((u128)limbs[1] << 64) | limbs[0];
  return {raw & cfg.mask()};
}

void write_mpz(Writer& w, const mpz_class& m) {
  std::size_t count = (mpz_sizeinbase(m.get_mpz_t(), 2) + 7) / 8;
  std::vector<std::uint8_t> buf(std::max<std::size_t>(count, 1), 0);
  std::size_t written = 0;
  mpz_export(buf.data(), &written, 1, 1, 1, 0, m.get_mpz_t());
  w.u32((std::uint32_t)written);
  w.bytes({buf.data(), written});
}

mpz_class read_mpz(Reader& r) {
  std::uint32_t len = r.u32();
  auto b = r.take(len);
  mpz_class m;
  mpz_import(m.get_mpz_t(), len, 1, 1, 1, 0, b.data());
  return m;
}

// ---------------------------------------------------------------------------
// HeSession
// ---------------------------------------------------------------------------

namespace {

void send_framed(PartyCtx& ctx, Opcode op, const Bytes& payload) {
  Writer w;
  w.u32(1);
  w.u8((std::uint8_t)op);
  w.bytes(payload);
  ctx.ep->send(ctx.peer(), w.out);
}

Bytes recv_framed(PartyCtx& ctx, Opcode expect) {
  Bytes b = ctx.ep->recv(ctx.peer());
  Reader r(b);
  r.u32();
  if ((Opcode)r.u8() != expect) throw ProtocolError("protocol desync on the HE channel");
  return Bytes(b.begin() + 5, b.end());
}

}  // namespace

HeSession::HeSession(PartyCtx& ctx, int key_bits) : ctx_(ctx), rng_(gmp_randinit_mt) {
  rng_.seed((unsigned long)ctx_.prg.word());
  own_ = Paillier::keygen(key_bits, ctx_.prg.word());
  // key exchange
  Writer w;
  write_mpz(w, own_.pub().n);
  w.u32((std::uint32_t)key_bits);
  send_framed(ctx_, Opcode::kHeKey, w.out);
  Bytes theirs = recv_framed(ctx_, Opcode::kHeKey);
  Reader rd(theirs);
  peer_pk_.n = read_mpz(rd);
  peer_pk_.n2 = peer_pk_.n * peer_pk_.n;
  peer_pk_.bits = (int)rd.u32();
  // plaintext space must dominate masked ring values
  if ((int)mpz_sizeinbase(peer_pk_.n.get_mpz_t(), 2) < ctx_.cfg.l + ctx_.cfg.sigma + 32) {
    throw ProtocolError("HE plaintext space too small for ring + masking slack");
  }
}

std::vector<Ciphertext> HeSession::s2h(const RingVec& share, Role encrypter) {
  auto& c = ctx_.cfg;
  if (ctx_.self == encrypter) {
    Writer w;
    for (RingValue v : share) {
      write_mpz(w, Paillier::enc(own_.pub(), ring_to_mpz(v, c), rng_));
    }
    ciphertexts_sent_ += share.size();
    send_framed(ctx_, Opcode::kHeCts, w.out);
    return {};
  }
  Bytes b = recv_framed(ctx_, Opcode::kHeCts);
  Reader rd(b);
  std::vector<Ciphertext> cts;
  cts.reserve(share.size());
  for (RingValue v : share) {
    mpz_class ct = read_mpz(rd);
    cts.push_back({Paillier::add_plain(peer_pk_, ct, ring_to_mpz(v, c)), encrypter});
  }
  return cts;
}

RingVec HeSession::h2s(const std::vector<Ciphertext>& cts, Role encrypter, std::size_t n) {
  auto& c = ctx_.cfg;
  RingVec out(n);
  if (ctx_.self != encrypter) {
    // calculator: mask with r < 2^(l+sigma), keep -r as the local share
    if (cts.size() != n) throw ProtocolError("h2s size mismatch");
    if (capture_masks) last_masks.clear();
    Writer w;
    for (std::size_t i = 0; i < n; ++i) {
      if (cts[i].encrypter != encrypter) throw ProtocolError("ciphertext under the wrong key");
      mpz_class r = rng_.get_z_bits(c.l + c.sigma);
      if (capture_masks) last_masks.push_back(r);
      write_mpz(w, Paillier::add_plain(peer_pk_, cts[i].c, r));
      out[i] = ring_neg(mpz_to_ring(r, c), c);
    }
    ciphertexts_sent_ += n;
    send_framed(ctx_, Opcode::kHeCts, w.out);
    return out;
  }
  Bytes b = recv_framed(ctx_, Opcode::kHeCts);
  Reader rd(b);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mpz_to_ring(own_.dec(read_mpz(rd)), c);
  }
  return out;
}

std::pair<RingVec, RingVec> HeSession::sum_gradients(
    const RingVec& g_share, const RingVec& h_share, Role owner,
    const std::vector<std::vector<std::uint32_t>>& bucket_of, std::size_t n_features,
    std::size_t n_buckets) {
  Role encrypter = other_party(owner);
  std::size_t out_n = n_features * n_buckets;

  auto g_cts = s2h(g_share, encrypter);
  auto h_cts = s2h(h_share, encrypter);

  if (ctx_.self == owner) {
    // accumulate per (feature, bucket) under the peer's key
    std::vector<Ciphertext> acc;
    acc.reserve(out_n * 2);
    std::vector<Ciphertext> acc_h;
    acc_h.reserve(out_n);
    for (std::size_t j = 0; j < n_features; ++j) {
      std::vector<mpz_class> bg(n_buckets), bh(n_buckets);
      for (std::size_t k = 0; k < n_buckets; ++k) {
        bg[k] = Paillier::enc(peer_pk_, 0, rng_);
        bh[k] = Paillier::enc(peer_pk_, 0, rng_);
      }
      for (std::size_t i = 0; i < g_cts.size(); ++i) {
        std::uint32_t k = bucket_of[j][i];
        bg[k] = Paillier::add(peer_pk_, bg[k], g_cts[i].c);
        bh[k] = Paillier::add(peer_pk_, bh[k], h_cts[i].c);
      }
      for (std::size_t k = 0; k < n_buckets; ++k) {
        acc.push_back({bg[k], encrypter});
        acc_h.push_back({bh[k], encrypter});
      }
    }
    RingVec sg = h2s(acc, encrypter, out_n);
    RingVec sh = h2s(acc_h, encrypter, out_n);
    return {sg, sh};
  }
  RingVec sg = h2s({}, encrypter, out_n);
  RingVec sh = h2s({}, encrypter, out_n);
  return {sg, sh};
}

}  // namespace sgb
