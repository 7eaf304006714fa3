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

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "sgb/protocols.hpp"
#include "sgb/ring.hpp"

namespace sgb {

// Additively homomorphic cryptosystem (Paillier with g = n+1). Any scheme
// with Dec(c1*c2) = m1+m2 and plaintext space well above 2^(l+sigma) fits
// the protocols below.
class Paillier {
 public:
  Paillier() = default;

  static Paillier keygen(int bits, std::uint64_t seed);

  struct PublicKey {
    mpz_class n, n2;
    int bits = 0;
    bool valid() const { return bits > 0; }
  };

  const PublicKey& pub() const { return pk_; }

  static mpz_class enc(const PublicKey& pk, const mpz_class& m, gmp_randclass& rng);
  mpz_class dec(const mpz_class& c) const;
  static mpz_class add(const PublicKey& pk, const mpz_class& c1, const mpz_class& c2);
  // homomorphic addition of a (non-negative) plaintext
  static mpz_class add_plain(const PublicKey& pk, const mpz_class& c, const mpz_class& m);
  // homomorphic scalar multiplication
  static mpz_class mul_plain(const PublicKey& pk, const mpz_class& c, const mpz_class& k);

 private:
  PublicKey pk_;
  mpz_class lambda_, mu_;
};

mpz_class ring_to_mpz(RingValue v, const RingConfig& cfg);
RingValue mpz_to_ring(const mpz_class& m, const RingConfig& cfg);

void write_mpz(Writer& w, const mpz_class& m);
mpz_class read_mpz(Reader& r);

// Ciphertext under one party's key, held by the other (the calculator).
struct Ciphertext {
  mpz_class c;
  Role encrypter = Role::PartyA;
};

// Scheme-transformation session: one key pair per party, public keys
// exchanged once at construction.
class HeSession {
 public:
  HeSession(PartyCtx& ctx, int key_bits);

  // Shared vector -> ciphertexts of the plaintext under `encrypter`'s key,
  // held by the calculator. The encrypter's return value is empty.
  std::vector<Ciphertext> s2h(const RingVec& share, Role encrypter);

  // Ciphertexts held by the calculator -> shares of the plaintext mod 2^l.
  // The calculator masks additively with r < 2^(l+sigma); the encrypter
  // decrypts its masked share. `n` must be the vector length on both sides
  // (the encrypter passes cts empty).
  RingVec h2s(const std::vector<Ciphertext>& cts, Role encrypter, std::size_t n);

  // Per-(feature,bucket) gradient sums accumulated under HE at the bucket
  // owner. bucket_of is owner-local: bucket_of[j][i] = bucket of row i under
  // feature j. Returns shares of the K*n_features sums, feature-major.
  std::pair<RingVec, RingVec> sum_gradients(const RingVec& g_share, const RingVec& h_share,
                                            Role owner,
                                            const std::vector<std::vector<std::uint32_t>>& bucket_of,
                                            std::size_t n_features, std::size_t n_buckets);

  std::uint64_t ciphertexts_sent() const { return ciphertexts_sent_; }

  const Paillier& own_keys() const { return own_; }
  const Paillier::PublicKey& peer_key() const { return peer_pk_; }
  const Paillier::PublicKey& key_of(Role r) const {
    return r == ctx_.self ? own_.pub() : peer_pk_;
  }

  // test instrumentation: masks drawn by the most recent h2s on this side
  bool capture_masks = false;
  std::vector<mpz_class> last_masks;

 private:
  PartyCtx& ctx_;
  Paillier own_;
  Paillier::PublicKey peer_pk_;
  gmp_randclass rng_;
  std::uint64_t ciphertexts_sent_ = 0;
};

}  // namespace sgb
