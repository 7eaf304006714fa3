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
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any executed criterion fails. Criterion 5
// needs the public credit-default dataset on disk and reports SKIP (exit
// 125) when it is absent.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>

#include "../harness.hpp"
#include "sgb/synth.hpp"
#include "sgb/train.hpp"

using namespace sgb;
using namespace sgb::testing;

namespace {

int g_failures = 0;
bool g_skipped = false;

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

void report(int criterion, const Check& c, double seconds) {
  std::printf("CRITERION %d: %s (%.1fs)%s%s\n", criterion, c.ok ? "PASS" : "FAIL", seconds,
              c.detail.empty() ? "" : " — ", c.detail.c_str());
  if (!c.ok) ++g_failures;
  std::fflush(stdout);
}

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// Criterion 1: protocol exactness
// ---------------------------------------------------------------------------

void criterion_1() {
  double t0 = now_s();
  Check c;
  RingConfig rc;
  Prg prg(1001);

  {  // share/reconstruct roundtrip + linear homomorphism, batched
    RingVec xs = prg.ring_vec(1000, rc), ys = prg.ring_vec(1000, rc);
    auto r = run_pair([&](Proto& p) {
      RingVec a = p.share_vec(xs, Role::PartyA);
      RingVec b = p.share_vec(ys, Role::PartyB);
      auto before = p.ctx().ep->meter.bytes_sent(p.ctx().peer());
      RingVec sum = p.add_vec(a, b);
      auto after = p.ctx().ep->meter.bytes_sent(p.ctx().peer());
      RingVec opened_x = p.open_vec(a);
      RingVec opened_sum = p.open_vec(sum);
      return std::make_tuple(opened_x, opened_sum, after - before);
    });
    bool rt = true, lin = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      rt &= std::get<0>(r.a)[i] == xs[i];
      lin &= std::get<1>(r.a)[i] == ring_add(xs[i], ys[i], rc);
    }
    c.expect(rt, "share/reconstruct roundtrip");
    c.expect(lin, "linear homomorphism");
    c.expect(std::get<2>(r.a) == 0, "linear ops must not communicate");
  }

  {  // CR permutation, 1e3 random cases, exact
    bool all = true;
    auto r = run_pair([&](Proto& p) {
      Prg lp(2002);  // identical on both sides
      bool ok = true;
      for (int rep = 0; rep < 1000; ++rep) {
        std::size_t n = 1 + lp.index(64);
        Role owner = rep % 2 ? Role::PartyA : Role::PartyB;
        RingVec x = lp.ring_vec(n, p.cfg());
        Permutation pi{lp.permutation(n)};
        RingVec sh = p.share_vec(x, Role::PartyA);
        auto triple = p.ctx().rand.fetch_perm(n, owner);
        RingVec out =
            secure_permute(p, sh, p.ctx().self == owner ? &pi : nullptr, owner, triple);
        RingVec opened = p.open_vec(out);
        RingVec want = pi.apply(x);
        for (std::size_t i = 0; i < n; ++i) ok &= opened[i] == want[i];
      }
      return ok;
    });
    all = r.a && r.b;
    c.expect(all, "CR permutation exactness (1e3)");
  }

  {  // HE s2h .. h2s roundtrip, 1e3, exact
    RingVec vals = prg.ring_vec(1000, rc);
    auto r = run_pair([&](Proto& p) {
      HeSession he(p.ctx(), 1024);
      RingVec mine = p.share_vec(vals, Role::PartyA);
      auto cts = he.s2h(mine, Role::PartyB);
      RingVec back = he.h2s(cts, Role::PartyB, vals.size());
      return p.open_vec(back);
    });
    bool ok = true;
    for (std::size_t i = 0; i < vals.size(); ++i) ok &= r.a[i] == vals[i];
    c.expect(ok, "HE s2h/h2s roundtrip (1e3)");
  }

  {  // comparison, 1e3, exact
    std::vector<double> us(1000), vs(1000);
    for (auto& x : us) x = std::floor(prg.real(-1e5, 1e5) * 8) / 8;
    for (auto& x : vs) x = std::floor(prg.real(-1e5, 1e5) * 8) / 8;
    auto r = run_pair([&](Proto& p) {
      RingVec u(us.size()), v(vs.size());
      for (std::size_t i = 0; i < us.size(); ++i) u[i] = encode(us[i], p.cfg());
      for (std::size_t i = 0; i < vs.size(); ++i) v[i] = encode(vs[i], p.cfg());
      RingVec ush = p.share_vec(u, Role::PartyA);
      RingVec vsh = p.share_vec(v, Role::PartyB);
      return p.open_vec(p.less_than_vec(ush, vsh));
    });
    bool ok = true;
    for (std::size_t i = 0; i < us.size(); ++i) {
      ok &= (std::uint64_t)r.a[i].raw == (us[i] < vs[i] ? 1u : 0u);
    }
    c.expect(ok, "comparison vs plaintext (1e3)");
  }

  {  // argmax, 1e3, exact with lowest-index ties
    auto r = run_pair([&](Proto& p) {
      Prg lp(3003);
      bool ok = true;
      for (int rep = 0; rep < 1000; ++rep) {
        std::size_t n = 1 + lp.index(64);
        std::vector<double> vals(n);
        for (auto& x : vals) x = std::floor(lp.real(-50, 50) * 4) / 4;  // coarse: ties happen
        RingVec enc_vals(n);
        for (std::size_t i = 0; i < n; ++i) enc_vals[i] = encode(vals[i], p.cfg());
        RingVec sh = p.share_vec(enc_vals, Role::PartyA);
        std::size_t got = p.argmax(sh);
        std::size_t want = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (vals[i] > vals[want]) want = i;
        }
        ok &= got == want;
      }
      return ok;
    });
    c.expect(r.a && r.b, "argmax vs plaintext with lowest-index ties (1e3)");
  }

  double dt = now_s() - t0;
  c.expect(dt < 60.0, "runtime under 60s");
  report(1, c, dt);
}

// ---------------------------------------------------------------------------
// Criterion 2: numerical tolerances
// ---------------------------------------------------------------------------

void criterion_2() {
  double t0 = now_s();
  Check c;
  RingConfig rc;
  Prg prg(1002);
  double ulp = std::exp2(-rc.f);

  {  // Beaver multiplication with truncation: 1e4 pairs in [-100,100]
    std::vector<double> xs(10000), ys(10000);
    for (auto& v : xs) v = prg.real(-100, 100);
    for (auto& v : ys) v = prg.real(-100, 100);
    auto r = run_pair([&](Proto& p) {
      RingVec x(xs.size()), y(ys.size());
      for (std::size_t i = 0; i < xs.size(); ++i) x[i] = encode(xs[i], p.cfg());
      for (std::size_t i = 0; i < ys.size(); ++i) y[i] = encode(ys[i], p.cfg());
      RingVec a = p.share_vec(x, Role::PartyA);
      RingVec b = p.share_vec(y, Role::PartyB);
      return p.open_vec(p.mul_vec(a, b, true));
    });
    int failures = 0;
    double max_err = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      long double want = (long double)decode(encode(xs[i], rc), rc) *
                         (long double)decode(encode(ys[i], rc), rc);
      double err = std::fabs((double)((long double)decode(r.a[i], rc) - want));
      max_err = std::max(max_err, err);
      if (err > 2 * ulp) ++failures;
    }
    c.expect(failures == 0, "truncation failures: " + std::to_string(failures));
    c.expect(max_err <= 2 * ulp, "mul max error " + std::to_string(max_err));
  }

  {  // division at the paper's two iterations, normalized d in [0.5, 1)
    std::vector<double> dens(300), bounds(300), nums(300);
    for (std::size_t i = 0; i < dens.size(); ++i) {
      dens[i] = prg.real(0.1, 64.0);
      bounds[i] = dens[i] / prg.real(0.5, 0.999);
      nums[i] = prg.real(-30, 30);
    }
    double worst_rel = 0;
    for (std::size_t i = 0; i < dens.size(); i += 50) {
      std::size_t hi = std::min(i + 50, dens.size());
      auto r = run_pair([&](Proto& p) {
        RingVec out;
        for (std::size_t j = i; j < hi; ++j) {
          RingVec n = p.share_vec({encode(nums[j], p.cfg())}, Role::PartyA);
          RingVec d = p.share_vec({encode(dens[j], p.cfg())}, Role::PartyB);
          RingVec q = p.div_vec(n, d, bounds[j], 2);
          out.push_back(q[0]);
        }
        return p.open_vec(out);
      });
      for (std::size_t j = i; j < hi; ++j) {
        double want = nums[j] / dens[j];
        double got = decode(r.a[j - i], rc);
        double rel = std::fabs(got - want) / std::max(std::fabs(want), 1e-2);
        worst_rel = std::max(worst_rel, rel);
      }
    }
    c.expect(worst_rel <= 1e-3,
             "division (2 iters, d in [0.5,1)) worst relative error " + std::to_string(worst_rel));
  }

  {  // sigmoid: f(0) exact, range in (0,1), deviation from logistic <= 0.09
    std::vector<double> grid;
    for (double x = -8; x <= 8.0001; x += 0.01) grid.push_back(x);
    auto r = run_pair([&](Proto& p) {
      RingVec x(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) x[i] = encode(grid[i], p.cfg());
      RingVec sh = p.share_vec(x, Role::PartyA);
      return p.open_vec(p.sigmoid_vec(sh));
    });
    std::size_t zero_at = 800;  // grid[800] == 0
    c.expect(r.a[zero_at] == encode(0.5, rc), "f(0) == 0.5 exactly in fixed point");
    bool in_range = true;
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double v = decode(r.a[i], rc);
      in_range &= v > 0.0 && v < 1.0;
      worst = std::max(worst, std::fabs(v - 1.0 / (1.0 + std::exp(-grid[i]))));
    }
    c.expect(in_range, "sigmoid range within (0,1)");
    c.expect(worst <= 0.09, "sigmoid max deviation " + std::to_string(worst));
  }

  report(2, c, now_s() - t0);
}

// ---------------------------------------------------------------------------
// Criterion 3: variant equivalence of SumGradients
// ---------------------------------------------------------------------------

void criterion_3() {
  double t0 = now_s();
  Check c;
  RingConfig rc;
  const std::size_t M = 200, N = 6, NA = 3, K = 8;

  bool all_equal = true, oracle_equal = true;
  for (int inst = 0; inst < 20; ++inst) {
    Prg prg(5000 + inst);
    auto full = make_synthetic({.rows = M, .features = N, .classification = false,
                                .seed = 6000 + (std::uint64_t)inst});
    auto [da, db] = vertical_split(full, NA);
    RingVec g = prg.ring_vec(M, rc), h = prg.ring_vec(M, rc);

    auto r = run_pair(
        [&](Proto& p) {
          const Dataset& mine = p.ctx().is_a() ? da : db;
          auto bins = bin_dataset(mine, K);
          RingVec gsh = p.share_vec(g, Role::PartyA);
          RingVec hsh = p.share_vec(h, Role::PartyA);
          HeSession he(p.ctx(), 1024);
          std::vector<std::pair<RingVec, RingVec>> outs;
          for (Variant v : {Variant::kSS, Variant::kCRP, Variant::kHEP}) {
            SumGradientsBackend backend(p, v, M, bins, mine.n_features(),
                                        N - mine.n_features(), K, &he);
            outs.push_back(backend.run(gsh, hsh));
          }
          return outs;
        },
        rc, 7000 + inst);

    auto bg0 = reconstruct(r.a[0].first, r.b[0].first, rc);
    auto bh0 = reconstruct(r.a[0].second, r.b[0].second, rc);
    for (int v = 1; v < 3; ++v) {
      all_equal &= reconstruct(r.a[v].first, r.b[v].first, rc) == bg0;
      all_equal &= reconstruct(r.a[v].second, r.b[v].second, rc) == bh0;
    }
    // plaintext accumulation oracle
    auto bins_full = bin_dataset(full, K);
    for (std::size_t j = 0; j < N; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        RingValue sg{0}, sh{0};
        for (std::size_t i = 0; i < M; ++i) {
          if (bins_full[j].bucket_of[i] == k) {
            sg = ring_add(sg, g[i], rc);
            sh = ring_add(sh, h[i], rc);
          }
        }
        oracle_equal &= bg0[j * K + k] == sg && bh0[j * K + k] == sh;
      }
    }
  }
  c.expect(all_equal, "SS/CRP/HEP bit-identical");
  c.expect(oracle_equal, "matches plaintext accumulation");
  double dt = now_s() - t0;
  c.expect(dt < 300.0, "runtime under 5 min");
  report(3, c, dt);
}

// ---------------------------------------------------------------------------
// Criterion 4: end-to-end structural equivalence with the oracle
// ---------------------------------------------------------------------------

struct StitchedSplit {
  std::string feature;
  bool all_left = false;
  double threshold = 0;
  friend bool operator==(const StitchedSplit&, const StitchedSplit&) = default;
};

std::vector<StitchedSplit> stitch(const ModelHalf& a, const ModelHalf& b, std::size_t tree) {
  std::vector<StitchedSplit> out;
  for (std::size_t n = 0; n < a.trees[tree].internal.size(); ++n) {
    const SecureNode& owner =
        a.trees[tree].internal[n].self_owned ? a.trees[tree].internal[n]
                                             : b.trees[tree].internal[n];
    out.push_back({owner.feature, !owner.threshold.has_value(), owner.threshold.value_or(0)});
  }
  return out;
}

void criterion_4() {
  double t0 = now_s();
  Check c;
  RingConfig rc;
  const std::size_t M = 2000, N = 10, NA = 5, K = 8;
  double worst_weight_diff = 0, worst_rmse_diff = 0;
  double slowest = 0;

  for (int ds = 0; ds < 10; ++ds) {
    for (Objective obj : {Objective::kSquaredError, Objective::kLogistic}) {
      double run0 = now_s();
      auto full = make_synthetic({.rows = M, .features = N,
                                  .classification = obj == Objective::kLogistic,
                                  .seed = 9100 + (std::uint64_t)ds});
      TrainConfig cfg;
      cfg.trees = 5;
      cfg.max_depth = 3;
      cfg.buckets = K;
      cfg.objective = obj;
      cfg.variant = Variant::kCRP;

      auto oracle = plain_train(cfg, full, NA);
      auto [da, db] = vertical_split(full, NA);

      struct Out {
        ModelHalf model;
        std::vector<double> scores;
      };
      auto r = run_pair(
          [&](Proto& p) {
            const Dataset& mine = p.ctx().is_a() ? da : db;
            Out o;
            o.model = secure_train(p, cfg, mine);
            o.scores = secure_predict(p, o.model, mine, Role::PartyA);
            return o;
          },
          rc, 9500 + ds);

      // identical (feature, bucket) at every node
      for (std::size_t t = 0; t < oracle.trees.size(); ++t) {
        auto got = stitch(r.a.model, r.b.model, t);
        for (std::size_t n = 0; n < got.size(); ++n) {
          const SplitRef& s = oracle.trees[t].splits[n];
          std::size_t feature = s.party == 0 ? (std::size_t)s.slot : NA + s.slot;
          const auto& thr = oracle.thresholds[feature];
          StitchedSplit want{full.feature_names[feature],
                             (std::size_t)s.bucket >= thr.size(),
                             (std::size_t)s.bucket < thr.size() ? thr[s.bucket] : 0};
          if (!(got[n] == want)) {
            c.expect(false, "ds " + std::to_string(ds) + " tree " + std::to_string(t) +
                                " node " + std::to_string(n) + " split differs");
          }
        }
        for (std::size_t l = 0; l < cfg.leaves(); ++l) {
          double w = decode(reconstruct(r.a.model.trees[t].leaf_weight_shares[l],
                                        r.b.model.trees[t].leaf_weight_shares[l], rc),
                            rc);
          worst_weight_diff =
              std::max(worst_weight_diff, std::fabs(w - oracle.trees[t].leaf_weights[l]));
        }
      }
      auto want_scores = plain_predict(oracle, full);
      worst_rmse_diff = std::max(worst_rmse_diff, rmse(r.a.scores, want_scores));
      slowest = std::max(slowest, now_s() - run0);
    }
  }
  c.expect(worst_weight_diff <= 2e-3,
           "worst leaf-weight diff " + std::to_string(worst_weight_diff));
  c.expect(worst_rmse_diff <= 1e-3, "worst prediction RMSE diff " + std::to_string(worst_rmse_diff));
  c.expect(slowest < 600.0, "runtime under 10 min per dataset");
  report(4, c, now_s() - t0);
}

// ---------------------------------------------------------------------------
// Criterion 5: accuracy reproduction on the credit-default dataset
// ---------------------------------------------------------------------------

bool credit_present(std::string& path) {
  for (const char* p : {"data/credit.csv", "../data/credit.csv", "../../data/credit.csv"}) {
    std::ifstream f(p);
    if (f) {
      path = p;
      return true;
    }
  }
  return false;
}

void criterion_5(bool full_run) {
  double t0 = now_s();
  std::string path;
  if (!credit_present(path)) {
    std::printf(
        "CRITERION 5: SKIP — data/credit.csv not found; fetch it with "
        "tools/fetch_credit.py (requires network access)\n");
    g_skipped = true;
    return;
  }
  Check c;
  Dataset all = Dataset::from_csv(path, "label");
  // deterministic shuffle, 80/20 split
  Prg prg(20260810);
  std::vector<std::size_t> order(all.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), prg.engine());
  Dataset shuffled;
  shuffled.feature_names = all.feature_names;
  shuffled.has_labels = true;
  shuffled.columns.resize(all.columns.size());
  for (std::size_t j = 0; j < all.columns.size(); ++j) {
    for (auto i : order) shuffled.columns[j].push_back(all.columns[j][i]);
  }
  for (auto i : order) shuffled.labels.push_back(all.labels[i]);

  std::size_t limit = full_run ? shuffled.rows() : 5000;
  Dataset use = shuffled.slice_rows(0, std::min(limit, shuffled.rows()));
  std::size_t train_n = use.rows() * 8 / 10;
  Dataset train = use.slice_rows(0, train_n);
  Dataset test = use.slice_rows(train_n, use.rows());

  TrainConfig cfg;
  cfg.trees = 20;
  cfg.max_depth = 5;
  cfg.buckets = 33;
  cfg.objective = Objective::kLogistic;
  cfg.variant = Variant::kCRP;
  cfg.learning_rate = 0.3;

  auto oracle = plain_train(cfg, train, 12);
  double oracle_auc = auc(plain_predict(oracle, test), test.labels);
  std::printf("  oracle auc = %.5f (%zu train rows)\n", oracle_auc, train.rows());

  auto [da, db] = vertical_split(train, 12);
  auto [qa, qb] = vertical_split(test, 12);
  std::vector<double> secure_scores;
  auto r = run_pair(
      [&](Proto& p) {
        const Dataset& mine = p.ctx().is_a() ? da : db;
        ModelHalf model = secure_train(p, cfg, mine);
        return secure_predict(p, model, p.ctx().is_a() ? qa : qb, Role::PartyA);
      },
      RingConfig{}, 515151);
  double secure_auc = auc(r.a, test.labels);
  std::printf("  crp-secure auc = %.5f\n", secure_auc);

  if (full_run) {
    c.expect(std::fabs(oracle_auc - 0.78302) <= 0.01,
             "oracle auc " + std::to_string(oracle_auc) + " vs 0.78302 +- 0.01");
  }
  c.expect(std::fabs(secure_auc - oracle_auc) <= 0.005,
           "secure-vs-oracle auc gap " + std::to_string(std::fabs(secure_auc - oracle_auc)));
  double dt = now_s() - t0;
  if (!full_run) c.expect(dt < 1800.0, "subsample runtime under 30 min");
  report(5, c, dt);
}

// ---------------------------------------------------------------------------
// Criterion 6: communication accounting
// ---------------------------------------------------------------------------

void criterion_6() {
  double t0 = now_s();
  Check c;
  RingConfig rc;
  const std::size_t M = 1000, N = 10, K = 16;
  // All features at Party B: the single-owner layout of the complexity
  // analysis (2M + 2NK HE ciphertexts, one s2h direction).
  auto full = make_synthetic({.rows = M, .features = N, .classification = false, .seed = 606});
  auto [da, db] = vertical_split(full, 0);
  Prg prg(607);
  RingVec g = prg.ring_vec(M, rc), h = prg.ring_vec(M, rc);

  struct Out {
    std::uint64_t ss_bytes, crp_bytes, hep_cts;
  };
  auto r = run_pair([&](Proto& p) {
    const Dataset& mine = p.ctx().is_a() ? da : db;
    auto bins = bin_dataset(mine, K);
    RingVec gsh = p.share_vec(g, Role::PartyA);
    RingVec hsh = p.share_vec(h, Role::PartyA);
    HeSession he(p.ctx(), 1024);
    auto& meter = p.ctx().ep->meter;
    Out o{};
    std::uint64_t b0 = meter.bytes_sent(p.ctx().peer());
    {
      SumGradientsBackend ss(p, Variant::kSS, M, bins, mine.n_features(), N - mine.n_features(),
                             K, &he);
      ss.run(gsh, hsh);
    }
    std::uint64_t b1 = meter.bytes_sent(p.ctx().peer());
    {
      SumGradientsBackend crp(p, Variant::kCRP, M, bins, mine.n_features(),
                              N - mine.n_features(), K, &he);
      crp.run(gsh, hsh);
    }
    std::uint64_t b2 = meter.bytes_sent(p.ctx().peer());
    std::uint64_t cts0 = he.ciphertexts_sent();
    {
      SumGradientsBackend hep(p, Variant::kHEP, M, bins, mine.n_features(), N - mine.n_features(),
                              K, &he);
      hep.run(gsh, hsh);
    }
    o.ss_bytes = b1 - b0;
    o.crp_bytes = b2 - b1;
    o.hep_cts = he.ciphertexts_sent() - cts0;
    return o;
  });

  double sb = rc.share_bytes();
  double ss_formula = (double)(M * N * K + 2 * M) * sb;
  double crp_formula = 2.0 * M * N * (4.0 + sb);  // u32 permutation indices + ring shares
  // measured link traffic: bytes sent by both parties during the phase
  double ss_meas = (double)(r.a.ss_bytes + r.b.ss_bytes);
  double crp_meas = (double)(r.a.crp_bytes + r.b.crp_bytes);
  std::uint64_t hep_cts = r.a.hep_cts + r.b.hep_cts;

  std::printf("  SS   measured %.0f vs (MNK+2M)*share_bytes = %.0f  (%+.1f%%)\n", ss_meas,
              ss_formula, 100.0 * (ss_meas / ss_formula - 1.0));
  std::printf("  CRP  measured %.0f vs 2MN*(plain+share)    = %.0f  (%+.1f%%)\n", crp_meas,
              crp_formula, 100.0 * (crp_meas / crp_formula - 1.0));
  std::printf("  HEP  ciphertexts %llu vs 2M+2NK = %zu\n", (unsigned long long)hep_cts,
              2 * M + 2 * N * K);
  std::printf("  SS/CRP byte ratio = %.2f\n", ss_meas / crp_meas);

  c.expect(std::fabs(ss_meas / ss_formula - 1.0) <= 0.30, "SS within +-30% of (MNK+2M)*sb");
  c.expect(std::fabs(crp_meas / crp_formula - 1.0) <= 0.30, "CRP within +-30% of 2MN*(pb+sb)");
  c.expect(hep_cts == 2 * M + 2 * N * K, "HEP ciphertext count exact");
  // Note: at K=16 the analyzed formulas bound this ratio by about K/2 (~6.5
  // measured); 10 is reachable only for K around 25 or more (e.g. the
  // paper-default K=33 gives ~13). Reported honestly; see the informational
  // line below and the decisions ledger.
  double ratio = ss_meas / crp_meas;
  c.expect(ratio >= 10.0, "SS/CRP ratio " + std::to_string(ratio) + " >= 10 (unreachable at K=16; formulas cap it at ~K/2)");

  {  // informational: the ratio at the paper-default bucket count
    const std::size_t K33 = 33;
    double ss33 = (double)(M * N * K33 + 2 * M) * sb;
    double crp33 = 2.0 * M * N * (4.0 + sb);
    std::printf("  [INFO] at K=33 the same formulas give SS/CRP = %.2f (>= 10)\n", ss33 / crp33);
  }

  report(6, c, now_s() - t0);
}

// ---------------------------------------------------------------------------
// Criterion 7: secure prediction (one-hot invariant + plaintext traversal)
// ---------------------------------------------------------------------------

void criterion_7() {
  double t0 = now_s();
  Check c;
  RingConfig rc;
  const std::size_t M = 600, N = 6, NA = 3, kQuery = 200;
  auto full = make_synthetic({.rows = M + kQuery, .features = N, .classification = true,
                              .seed = 777});
  Dataset train = full.slice_rows(0, M);
  Dataset query = full.slice_rows(M, M + kQuery);

  TrainConfig cfg;
  cfg.trees = 5;
  cfg.max_depth = 3;
  cfg.buckets = 8;
  cfg.objective = Objective::kLogistic;
  cfg.variant = Variant::kCRP;

  auto [da, db] = vertical_split(train, NA);
  auto [qa, qb] = vertical_split(query, NA);

  struct Out {
    ModelHalf model;
    std::vector<double> scores;
    std::vector<std::vector<std::uint64_t>> onehot;
  };
  auto r = run_pair(
      [&](Proto& p) {
        const Dataset& mine = p.ctx().is_a() ? da : db;
        Out o;
        o.model = secure_train(p, cfg, mine);
        o.scores = secure_predict(p, o.model, p.ctx().is_a() ? qa : qb, Role::PartyA, &o.onehot);
        return o;
      },
      rc, 787878);

  // one-hot: exactly one 1 per (tree, instance)
  bool onehot_ok = true;
  std::size_t leaves = cfg.leaves();
  for (const auto& tree_bits : r.a.onehot) {
    for (std::size_t i = 0; i < kQuery; ++i) {
      std::uint64_t ones = 0;
      for (std::size_t l = 0; l < leaves; ++l) ones += tree_bits[i * leaves + l];
      onehot_ok &= ones == 1;
    }
  }
  c.expect(onehot_ok, "one-hot invariant per (tree, instance)");

  // plaintext traversal over the stitched model
  double base = decode(reconstruct(r.a.model.base_share, r.b.model.base_share, rc), rc);
  std::vector<double> want(kQuery, base);
  for (std::size_t t = 0; t < r.a.model.trees.size(); ++t) {
    auto splits = stitch(r.a.model, r.b.model, t);
    for (std::size_t i = 0; i < kQuery; ++i) {
      std::size_t pos = 0;
      for (int d = 0; d < cfg.max_depth; ++d) {
        std::size_t node = (((std::size_t)1 << d) - 1) + pos;
        bool left = true;
        if (!splits[node].all_left) {
          std::size_t feature = 0;
          while (query.feature_names[feature] != splits[node].feature) ++feature;
          left = query.columns[feature][i] <= splits[node].threshold;
        }
        pos = pos * 2 + (left ? 0 : 1);
      }
      double w = decode(reconstruct(r.a.model.trees[t].leaf_weight_shares[pos],
                                    r.b.model.trees[t].leaf_weight_shares[pos], rc),
                        rc);
      want[i] += w;
    }
  }
  double worst = 0;
  for (std::size_t i = 0; i < kQuery; ++i) {
    worst = std::max(worst, std::fabs(r.a.scores[i] - want[i]));
  }
  c.expect(worst <= 1e-3, "secure vs plaintext traversal, worst diff " + std::to_string(worst));
  report(7, c, now_s() - t0);
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;
  bool credit_full = std::getenv("SGB_CREDIT_FULL") != nullptr;
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--criterion=", 12) == 0) which = std::atoi(argv[i] + 12);
    if (std::strcmp(argv[i], "--credit-full") == 0) credit_full = true;
  }
  auto run = [&](int n, std::function<void()> fn) {
    if (which == 0 || which == n) fn();
  };
  run(1, criterion_1);
  run(2, criterion_2);
  run(3, criterion_3);
  run(4, criterion_4);
  run(5, [&] { criterion_5(credit_full); });
  run(6, criterion_6);
  run(7, criterion_7);
  if (g_failures > 0) return 1;
  if (g_skipped && which == 5) return 125;
  return 0;
}
