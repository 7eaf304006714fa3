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

#include "sgb/train.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sgb/serialize.hpp"

namespace sgb {

namespace {

struct PeerMeta {
  std::uint64_t rows = 0;
  std::uint64_t n_features = 0;
  bool has_labels = false;
};

PeerMeta exchange_meta(Proto& p, const Dataset& local) {
  Writer w;
  w.u64(local.rows());
  w.u64(local.n_features());
  w.u8(local.has_labels ? 1 : 0);
  Bytes b = p.exchange_msg(Opcode::kMeta, w.out);
  Reader r(b);
  PeerMeta m;
  m.rows = r.u64();
  m.n_features = r.u64();
  m.has_labels = r.u8() != 0;
  return m;
}

std::vector<std::vector<std::uint32_t>> exchange_bucket_counts(
    Proto& p, const std::vector<std::vector<std::uint32_t>>& mine, std::size_t peer_features,
    std::size_t k) {
  Writer w;
  for (const auto& feat : mine) {
    for (auto c : feat) w.u32(c);
  }
  Bytes b = p.exchange_msg(Opcode::kBucketCounts, w.out);
  Reader r(b);
  std::vector<std::vector<std::uint32_t>> theirs(peer_features,
                                                 std::vector<std::uint32_t>(k));
  for (auto& feat : theirs) {
    for (auto& c : feat) c = r.u32();
  }
  return theirs;
}

RingVec raw_ones(Proto& p, std::size_t n) {
  RingVec v(n);
  if (p.ctx().is_a()) {
    for (auto& x : v) x = RingValue{1};
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// SumGradients back-ends
// ---------------------------------------------------------------------------

SumGradientsBackend::SumGradientsBackend(Proto& p, Variant variant, std::size_t m,
                                         const std::vector<FeatureBuckets>& local_bins,
                                         std::size_t n_local, std::size_t n_peer,
                                         std::size_t k_buckets, HeSession* he)
    : p_(p), variant_(variant), m_(m), k_(k_buckets), local_bins_(local_bins), he_(he) {
  bool is_a = p_.ctx().is_a();
  n_a_ = is_a ? n_local : n_peer;
  n_b_ = is_a ? n_peer : n_local;
  for (const auto& fb : local_bins_) local_bucket_of_.push_back(fb.bucket_of);
  if (variant_ == Variant::kCRP) {
    std::vector<std::vector<std::uint32_t>> mine;
    for (const auto& fb : local_bins_) mine.push_back(bucket_counts(fb, k_, m_));
    auto theirs = exchange_bucket_counts(p_, mine, n_peer, k_);
    counts_a_ = is_a ? mine : theirs;
    counts_b_ = is_a ? theirs : mine;
  }
  if (variant_ == Variant::kHEP && he_ == nullptr) {
    throw ProtocolError("HEP back-end needs an HE session");
  }
}

std::pair<RingVec, RingVec> SumGradientsBackend::run(const RingVec& g, const RingVec& h) {
  RingVec bg, bh;
  bg.reserve((n_a_ + n_b_) * k_);
  bh.reserve((n_a_ + n_b_) * k_);
  for (Role owner : {Role::PartyA, Role::PartyB}) {
    std::size_t n_own = owner == Role::PartyA ? n_a_ : n_b_;
    if (n_own == 0) continue;
    std::pair<RingVec, RingVec> part;
    switch (variant_) {
      case Variant::kSS: part = run_ss(g, h, owner, n_own); break;
      case Variant::kCRP: part = run_crp(g, h, owner, n_own); break;
      case Variant::kHEP: part = run_hep(g, h, owner, n_own); break;
    }
    bg.insert(bg.end(), part.first.begin(), part.first.end());
    bh.insert(bh.end(), part.second.begin(), part.second.end());
  }
  return {bg, bh};
}

// Inner products of the owner's (private) indicator vectors with the shared
// gradients: the owner reveals each indicator masked once, the peer reveals
// its gradient shares masked once, and the dealer correlation closes the
// cross terms. Indicators are raw 0/1, so sums reconstruct exactly.
std::pair<RingVec, RingVec> SumGradientsBackend::run_ss(const RingVec& g, const RingVec& h,
                                                        Role owner, std::size_t n_own) {
  auto& ctx = p_.ctx();
  auto& cfg = ctx.cfg;
  std::size_t n_ind = n_own * k_;
  InnerProdShare corr = ctx.rand.fetch_inner_prod(m_, n_ind, owner);
  RingVec bg(n_ind), bh(n_ind);

  if (ctx.self == owner) {
    Writer w;
    w.out.reserve(n_ind * m_ * cfg.share_bytes());
    for (std::size_t j = 0; j < n_own; ++j) {
      for (std::size_t kk = 0; kk < k_; ++kk) {
        const auto& a = corr.a[j * k_ + kk];
        for (std::size_t i = 0; i < m_; ++i) {
          RingValue s{(u128)(local_bucket_of_[j][i] == kk ? 1 : 0)};
          w.ring(ring_add(s, a[i], cfg), cfg);
        }
      }
    }
    p_.send_msg(Opcode::kIndicatorMask, w.out);
    Bytes b = p_.recv_msg(Opcode::kGradientMask);
    Reader r(b);
    RingVec u_g = r.ring_vec(m_, cfg), u_h = r.ring_vec(m_, cfg);
    // z = <s, g_own + u> + c
    RingVec gu(m_), hu(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      gu[i] = ring_add(g[i], u_g[i], cfg);
      hu[i] = ring_add(h[i], u_h[i], cfg);
    }
    for (std::size_t j = 0; j < n_own; ++j) {
      for (std::size_t kk = 0; kk < k_; ++kk) {
        RingValue zg = corr.c_g[j * k_ + kk], zh = corr.c_h[j * k_ + kk];
        for (std::size_t i = 0; i < m_; ++i) {
          if (local_bucket_of_[j][i] == kk) {
            zg = ring_add(zg, gu[i], cfg);
            zh = ring_add(zh, hu[i], cfg);
          }
        }
        bg[j * k_ + kk] = zg;
        bh[j * k_ + kk] = zh;
      }
    }
  } else {
    Writer w;
    w.out.reserve(2 * m_ * cfg.share_bytes());
    for (std::size_t i = 0; i < m_; ++i) w.ring(ring_add(g[i], corr.b_g[i], cfg), cfg);
    for (std::size_t i = 0; i < m_; ++i) w.ring(ring_add(h[i], corr.b_h[i], cfg), cfg);
    p_.send_msg(Opcode::kGradientMask, w.out);
    Bytes b = p_.recv_msg(Opcode::kIndicatorMask);
    Reader r(b);
    // z = -<t, b> + c
    for (std::size_t jk = 0; jk < n_ind; ++jk) {
      RingValue zg{0}, zh{0};
      for (std::size_t i = 0; i < m_; ++i) {
        RingValue t = r.ring(cfg);
        zg = ring_add(zg, ring_mul(t, corr.b_g[i], cfg), cfg);
        zh = ring_add(zh, ring_mul(t, corr.b_h[i], cfg), cfg);
      }
      bg[jk] = ring_add(ring_neg(zg, cfg), corr.c_g[jk], cfg);
      bh[jk] = ring_add(ring_neg(zh, cfg), corr.c_h[jk], cfg);
    }
  }
  return {bg, bh};
}

std::pair<RingVec, RingVec> SumGradientsBackend::run_crp(const RingVec& g, const RingVec& h,
                                                         Role owner, std::size_t n_own) {
  (void)n_own;
  bool mine = p_.ctx().self == owner;
  const auto& counts = owner == Role::PartyA ? counts_a_ : counts_b_;
  return crp_sum_gradients(p_, g, h, owner,
                           mine ? local_bucket_of_
                                : std::vector<std::vector<std::uint32_t>>{},
                           counts, k_);
}

std::pair<RingVec, RingVec> SumGradientsBackend::run_hep(const RingVec& g, const RingVec& h,
                                                         Role owner, std::size_t n_own) {
  bool mine = p_.ctx().self == owner;
  return he_->sum_gradients(g, h, owner,
                            mine ? local_bucket_of_
                                 : std::vector<std::vector<std::uint32_t>>{},
                            n_own, k_);
}

// ---------------------------------------------------------------------------
// gain computation
// ---------------------------------------------------------------------------

RingVec compute_split_gains(Proto& p, const TrainConfig& cfg, const RingVec& bg,
                            const RingVec& bh, std::size_t n_features, std::size_t k,
                            double div_bound, int div_iters, int div_extra) {
  std::size_t per = k - 1;
  std::size_t n_cand = n_features * per;
  RingValue G{0}, H{0};
  for (std::size_t kk = 0; kk < k; ++kk) {
    G = p.add(G, bg[kk]);
    H = p.add(H, bh[kk]);
  }
  RingVec nums(2 * n_cand + 1), dens(2 * n_cand + 1);
  for (std::size_t j = 0; j < n_features; ++j) {
    RingValue gl{0}, hl{0};
    for (std::size_t kk = 0; kk < per; ++kk) {
      gl = p.add(gl, bg[j * k + kk]);
      hl = p.add(hl, bh[j * k + kk]);
      std::size_t c = j * per + kk;
      nums[c] = gl;
      dens[c] = hl;
      nums[n_cand + c] = p.sub(G, gl);
      dens[n_cand + c] = p.sub(H, hl);
    }
  }
  nums[2 * n_cand] = G;
  dens[2 * n_cand] = H;
  RingVec squares = p.mul_vec(nums, nums, /*truncate=*/true);
  RingVec shifted = p.add_public_vec(dens, cfg.lambda);
  RingVec terms = p.div_vec(squares, shifted, div_bound, div_iters, div_extra);
  RingVec s(n_cand);
  for (std::size_t c = 0; c < n_cand; ++c) {
    s[c] = p.sub(p.add(terms[c], terms[n_cand + c]), terms[2 * n_cand]);
  }
  RingVec half = p.scalar_mul_real(s, 0.5);
  return cfg.gamma == 0.0 ? half : p.add_public_vec(half, -cfg.gamma);
}

// ---------------------------------------------------------------------------
// secure training
// ---------------------------------------------------------------------------

ModelHalf secure_train(Proto& p, const TrainConfig& cfg, const Dataset& local) {
  cfg.validate();
  auto& ctx = p.ctx();
  auto& rcfg = ctx.cfg;
  bool is_a = ctx.is_a();

  PeerMeta peer = exchange_meta(p, local);
  if (is_a && !local.has_labels) throw DataError("labels must be held by Party A");
  if (!is_a && local.has_labels) throw DataError("Party B must not hold labels");
  if (!is_a && !peer.has_labels) throw DataError("peer (Party A) reports no labels");
  std::size_t M = is_a ? local.rows() : (std::size_t)peer.rows;
  if (local.n_features() > 0 && local.rows() != M) {
    throw DataError("row counts disagree between parties");
  }
  if (M == 0) throw DataError("empty training set");
  std::size_t n_a = is_a ? local.n_features() : peer.n_features;
  std::size_t n_b = is_a ? peer.n_features : local.n_features();
  if (n_a + n_b == 0) throw DataError("no features on either side");
  std::size_t K = cfg.buckets;

  auto bins = bin_dataset(local, K);

  std::unique_ptr<HeSession> he;
  if (cfg.variant == Variant::kHEP) he = std::make_unique<HeSession>(ctx, cfg.he_key_bits);
  SumGradientsBackend backend(p, cfg.variant, M, bins, local.n_features(), peer.n_features, K,
                              he.get());

  double div_bound = gain_div_bound(cfg, M);
  int div_extra = division_extra_bits(rcfg);
  int div_iters = goldschmidt_iterations(cfg.lambda / div_bound, rcfg.f + div_extra + 4);

  // labels and base score
  RingVec y(M);
  {
    PhaseScope ph(ctx.ep->meter, "base_score");
    if (is_a) {
      for (std::size_t i = 0; i < M; ++i) y[i] = encode(local.labels[i], rcfg);
    }
    y = p.share_vec(y, Role::PartyA);
  }
  RingValue base{0};
  if (cfg.objective == Objective::kSquaredError) {
    PhaseScope ph(ctx.ep->meter, "base_score");
    RingValue sum{0};
    for (auto v : y) sum = p.add(sum, v);
    base = p.scalar_mul_real({sum}, 1.0 / (double)M)[0];
  }
  RingVec pred(M, base);

  ModelHalf model;
  model.role = ctx.self;
  model.ring = rcfg;
  model.cfg = cfg;
  model.n_features_a = n_a;
  model.n_features_b = n_b;
  model.base_share = base;

  for (int t = 0; t < cfg.trees; ++t) {
    // gradients from up-to-date shared predictions
    NodeState root;
    {
      PhaseScope ph(ctx.ep->meter, "gradients");
      if (cfg.objective == Objective::kSquaredError) {
        root.g = p.sub_vec(pred, y);
        root.h = p.from_public_vec(std::vector<double>(M, 1.0));
      } else {
        RingVec yh = p.sigmoid_vec(pred, cfg.sigmoid_bound);
        root.g = p.sub_vec(yh, y);
        root.h = p.mul_vec(yh, p.public_minus_vec(1.0, yh), /*truncate=*/true);
      }
      root.mask = raw_ones(p, M);
    }

    SecureTree tree;
    std::vector<NodeState> level;
    level.push_back(std::move(root));

    for (int depth = 0; depth < cfg.max_depth; ++depth) {
      std::vector<NodeState> next;
      next.reserve(level.size() * 2);
      for (auto& node : level) {
        RingVec bg, bh;
        {
          PhaseScope ph(ctx.ep->meter, "sum_gradients");
          std::tie(bg, bh) = backend.run(node.g, node.h);
        }
        RingVec gains;
        {
          PhaseScope ph(ctx.ep->meter, "compute_gain");
          gains = compute_split_gains(p, cfg, bg, bh, n_a + n_b, K, div_bound,
                                      div_iters, div_extra);
        }
        std::size_t flat;
        {
          PhaseScope ph(ctx.ep->meter, "argmax");
          // selection-time tie-break ramp; the reported gains stay unbiased
          RingVec biased = gains;
          if (is_a) {
            for (std::size_t c = 0; c < biased.size(); ++c) {
              double ramp = (double)(biased.size() - c) * split_tie_bias();
              biased[c] = ring_add(biased[c], encode(ramp, rcfg), rcfg);
            }
          }
          flat = p.argmax(biased);
        }
        SplitRef ref = split_from_flat(flat, n_a, n_b, K);
        Role owner = ref.party == 0 ? Role::PartyA : Role::PartyB;

        PhaseScope ph(ctx.ep->meter, "split_node");
        SecureNode snode;
        RingVec branch(M);
        if (ctx.self == owner) {
          const auto& fb = bins[ref.slot];
          for (std::size_t i = 0; i < M; ++i) {
            branch[i] = RingValue{(u128)(fb.bucket_of[i] <= (std::uint32_t)ref.bucket ? 1 : 0)};
          }
          snode.self_owned = true;
          snode.feature = local.feature_names[ref.slot];
          if ((std::size_t)ref.bucket < fb.thresholds.size()) {
            snode.threshold = fb.thresholds[ref.bucket];
          }
        }
        tree.internal.push_back(std::move(snode));
        RingVec b_sh = p.share_vec(branch, owner);

        RingVec xs(3 * M), ys(3 * M);
        for (std::size_t i = 0; i < M; ++i) {
          xs[i] = node.g[i];
          xs[M + i] = node.h[i];
          xs[2 * M + i] = node.mask[i];
          ys[i] = b_sh[i];
          ys[M + i] = b_sh[i];
          ys[2 * M + i] = b_sh[i];
        }
        RingVec prod = p.mul_vec(xs, ys, /*truncate=*/false);
        NodeState left, right;
        left.g.assign(prod.begin(), prod.begin() + M);
        left.h.assign(prod.begin() + M, prod.begin() + 2 * M);
        left.mask.assign(prod.begin() + 2 * M, prod.end());
        right.g = p.sub_vec(node.g, left.g);
        right.h = p.sub_vec(node.h, left.h);
        right.mask = p.sub_vec(node.mask, left.mask);
        next.push_back(std::move(left));
        next.push_back(std::move(right));
      }
      level = std::move(next);
    }

    // leaf weights and shared prediction update
    {
      PhaseScope ph(ctx.ep->meter, "leaf_weight");
      std::size_t L = level.size();
      RingVec nums(L), dens(L);
      for (std::size_t l = 0; l < L; ++l) {
        RingValue G{0}, H{0};
        for (std::size_t i = 0; i < M; ++i) {
          G = p.add(G, level[l].g[i]);
          H = p.add(H, level[l].h[i]);
        }
        nums[l] = ring_neg(G, rcfg);
        dens[l] = H;
      }
      dens = p.add_public_vec(dens, cfg.lambda);
      RingVec w = p.div_vec(nums, dens, div_bound, div_iters, div_extra);
      tree.leaf_weight_shares = w;

      RingVec w_eff = cfg.learning_rate == 1.0 ? w : p.scalar_mul_real(w, cfg.learning_rate);
      RingVec xs(L * M), ys(L * M);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 0; i < M; ++i) {
          xs[l * M + i] = level[l].mask[i];
          ys[l * M + i] = w_eff[l];
        }
      }
      RingVec wm = p.mul_vec(xs, ys, /*truncate=*/false);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 0; i < M; ++i) {
          pred[i] = p.add(pred[i], wm[l * M + i]);
        }
      }
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// ---------------------------------------------------------------------------
// model persistence
// ---------------------------------------------------------------------------

namespace {

std::string ring_hex(RingValue v, const RingConfig& cfg) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (int i = cfg.share_bytes() - 1; i >= 0; --i) {
    std::uint8_t b = (std::uint8_t)(v.raw >> (8 * i));
    s += digits[b >> 4];
    s += digits[b & 0xf];
  }
  return s;
}

RingValue ring_from_hex(const std::string& s, const RingConfig& cfg) {
  if (s.size() != (std::size_t)cfg.share_bytes() * 2) throw DataError("bad share hex length");
  u128 raw = 0;
  for (char ch : s) {
    int d = ch >= '0' && ch <= '9'   ? ch - '0'
            : ch >= 'a' && ch <= 'f' ? ch - 'a' + 10
            : ch >= 'A' && ch <= 'F' ? ch - 'A' + 10
                                     : -1;
    if (d < 0) throw DataError("bad share hex digit");
    raw = (raw << 4) | (u128)d;
  }
  return {raw & cfg.mask()};
}

}  // namespace

void ModelHalf::save_json(const std::string& path) const {
  nlohmann::json j;
  j["kind"] = "secure-half";
  j["role"] = role_name(role);
  j["ring"] = {{"l", ring.l}, {"f", ring.f}, {"sigma", ring.sigma}};
  j["config"] = {{"trees", cfg.trees},
                 {"max_depth", cfg.max_depth},
                 {"lambda", cfg.lambda},
                 {"gamma", cfg.gamma},
                 {"buckets", cfg.buckets},
                 {"objective", to_string(cfg.objective)},
                 {"variant", to_string(cfg.variant)},
                 {"learning_rate", cfg.learning_rate}};
  j["n_features_a"] = n_features_a;
  j["n_features_b"] = n_features_b;
  j["base_score_share"] = ring_hex(base_share, ring);
  nlohmann::json trees_j = nlohmann::json::array();
  for (const auto& t : trees) {
    nlohmann::json tj;
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < t.internal.size(); ++i) {
      nlohmann::json nj;
      nj["id"] = i;
      nj["owner"] = t.internal[i].self_owned ? "self" : "peer";
      if (t.internal[i].self_owned) {
        nj["feature"] = t.internal[i].feature;
        if (t.internal[i].threshold) nj["bucket_threshold"] = *t.internal[i].threshold;
      }
      nodes.push_back(nj);
    }
    tj["nodes"] = nodes;
    nlohmann::json weights = nlohmann::json::array();
    for (auto w : t.leaf_weight_shares) weights.push_back(ring_hex(w, ring));
    tj["leaf_weight_shares"] = weights;
    trees_j.push_back(tj);
  }
  j["trees"] = trees_j;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

ModelHalf ModelHalf::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("kind", "") != "secure-half") throw DataError(path + ": not a model half");
  ModelHalf m;
  std::string role = j["role"];
  m.role = role == "party_a" ? Role::PartyA : Role::PartyB;
  m.ring.l = j["ring"]["l"];
  m.ring.f = j["ring"]["f"];
  m.ring.sigma = j["ring"]["sigma"];
  m.cfg.trees = j["config"]["trees"];
  m.cfg.max_depth = j["config"]["max_depth"];
  m.cfg.lambda = j["config"]["lambda"];
  m.cfg.gamma = j["config"]["gamma"];
  m.cfg.buckets = j["config"]["buckets"];
  m.cfg.objective = objective_from_string(j["config"]["objective"]);
  m.cfg.variant = variant_from_string(j["config"]["variant"]);
  m.cfg.learning_rate = j["config"]["learning_rate"];
  m.n_features_a = j["n_features_a"];
  m.n_features_b = j["n_features_b"];
  m.base_share = ring_from_hex(j["base_score_share"], m.ring);
  for (const auto& tj : j["trees"]) {
    SecureTree t;
    for (const auto& nj : tj["nodes"]) {
      SecureNode n;
      n.self_owned = nj["owner"] == "self";
      if (n.self_owned) {
        n.feature = nj["feature"];
        if (nj.contains("bucket_threshold")) n.threshold = (double)nj["bucket_threshold"];
      }
      t.internal.push_back(std::move(n));
    }
    for (const auto& wj : tj["leaf_weight_shares"]) {
      t.leaf_weight_shares.push_back(ring_from_hex(wj, m.ring));
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

std::uint64_t ModelHalf::shape_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix((std::uint64_t)trees.size());
  mix((std::uint64_t)cfg.max_depth);
  mix(n_features_a);
  mix(n_features_b);
  for (const auto& t : trees) {
    mix(t.internal.size());
    mix(t.leaf_weight_shares.size());
    for (const auto& n : t.internal) {
      // absolute owner party: both halves must agree
      bool owned_by_a = (role == Role::PartyA) == n.self_owned;
      mix(owned_by_a ? 1 : 2);
    }
  }
  return h;
}

}  // namespace sgb
