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

#include "sgb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sgb/protocols.hpp"

namespace sgb {

Objective objective_from_string(const std::string& s) {
  if (s == "squared-error" || s == "squared_error" || s == "reg") return Objective::kSquaredError;
  if (s == "logistic" || s == "binary") return Objective::kLogistic;
  throw DataError("unknown objective '" + s + "'");
}

Variant variant_from_string(const std::string& s) {
  if (s == "ss") return Variant::kSS;
  if (s == "crp") return Variant::kCRP;
  if (s == "hep") return Variant::kHEP;
  throw DataError("unknown variant '" + s + "'");
}

std::string to_string(Objective o) {
  return o == Objective::kLogistic ? "logistic" : "squared-error";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kSS: return "ss";
    case Variant::kCRP: return "crp";
    default: return "hep";
  }
}

void TrainConfig::validate() const {
  if (trees < 1) throw DataError("tree count must be >= 1");
  if (max_depth < 1) throw DataError("max_depth must be >= 1");
  if (lambda <= 0) throw DataError("lambda must be positive (division safety)");
  if (buckets < 2) throw DataError("bucket count must be >= 2");
  if (learning_rate <= 0) throw DataError("learning rate must be positive");
}

// ---------------------------------------------------------------------------
// fixed-point simulator
// ---------------------------------------------------------------------------

double FxSim::q(double x) const {
  return (double)(std::nearbyintl((long double)x * std::exp2l(f)) / std::exp2l(f));
}

double FxSim::mul_impl(double a, double b) const {
  return (double)(std::nearbyintl((long double)a * (long double)b * std::exp2l(f)) /
                  std::exp2l(f));
}

double FxSim::div(double num, double den, double den_bound, int iterations) const {
  double d = mul(den, q(1.0 / den_bound));
  double y = q(2.9142) - 2.0 * d;
  double D = mul(d, y);
  for (int it = 0; it < iterations; ++it) {
    double F = 2.0 - D;
    y = mul(y, F);
    if (it + 1 < iterations) D = mul(D, F);
  }
  double t = mul(num, y);
  return mul(t, q(1.0 / den_bound));
}

double FxSim::div_precise(double num, double den, double den_bound) const {
  double t = mul(num, den_bound / den);
  return mul(t, q(1.0 / den_bound));
}

double FxSim::sigmoid(double x, double x_bound) const {
  double absx = std::fabs(x);
  double den = absx + 1.0;
  double bound = 1.0 + x_bound;
  double ratio = div_precise(x, den, bound);
  return mul(ratio, 0.5) + 0.5;
}

double gain_div_bound(const TrainConfig& cfg, std::size_t rows) {
  double raw = cfg.h_max() * (double)rows + cfg.lambda;
  return std::exp2(std::ceil(std::log2(raw)));
}

// ---------------------------------------------------------------------------
// flat candidate index
// ---------------------------------------------------------------------------

std::size_t flat_candidate_count(std::size_t n_a, std::size_t n_b, std::size_t k_buckets) {
  return (n_a + n_b) * (k_buckets - 1);
}

SplitRef split_from_flat(std::size_t flat, std::size_t n_a, std::size_t n_b,
                         std::size_t k_buckets) {
  std::size_t per = k_buckets - 1;
  std::size_t feature = flat / per;
  SplitRef s;
  s.bucket = (int)(flat % per);
  if (feature < n_a) {
    s.party = 0;
    s.slot = (int)feature;
  } else {
    if (feature >= n_a + n_b) throw ProtocolError("flat split index out of range");
    s.party = 1;
    s.slot = (int)(feature - n_a);
  }
  return s;
}

std::size_t flat_from_split(const SplitRef& s, std::size_t n_a, std::size_t n_b,
                            std::size_t k_buckets) {
  (void)n_b;
  std::size_t feature = s.party == 0 ? (std::size_t)s.slot : n_a + (std::size_t)s.slot;
  return feature * (k_buckets - 1) + (std::size_t)s.bucket;
}

// ---------------------------------------------------------------------------
// plaintext trainer
// ---------------------------------------------------------------------------

namespace {

struct NodeVecs {
  std::vector<double> g, h;
  std::vector<std::uint8_t> mask;
};

// Mirrors the secure gain pipeline over the fixed-point grid: bucket sums ->
// prefix sums -> three normalized divisions -> 0.5 * (L + R - P) - gamma.
std::vector<double> gains_from_sums(const FxSim& fx, const TrainConfig& cfg,
                                    const std::vector<std::vector<double>>& bg,
                                    const std::vector<std::vector<double>>& bh,
                                    double div_bound) {
  std::size_t n_features = bg.size();
  std::size_t K = bg.empty() ? 0 : bg[0].size();
  double G = 0, H = 0;
  for (std::size_t k = 0; k < K; ++k) {
    G += bg[0][k];
    H += bh[0][k];
  }
  double tP = fx.div_precise(fx.mul(G, G), H + cfg.lambda, div_bound);
  std::vector<double> gains;
  gains.reserve(n_features * (K - 1));
  for (std::size_t j = 0; j < n_features; ++j) {
    double gl = 0, hl = 0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      gl += bg[j][k];
      hl += bh[j][k];
      double gr = G - gl, hr = H - hl;
      double tL = fx.div_precise(fx.mul(gl, gl), hl + cfg.lambda, div_bound);
      double tR = fx.div_precise(fx.mul(gr, gr), hr + cfg.lambda, div_bound);
      double s = tL + tR - tP;
      gains.push_back(fx.mul(s, 0.5) - fx.q(cfg.gamma));
    }
  }
  return gains;
}

}  // namespace

PlainModel plain_train(const TrainConfig& cfg, const Dataset& full, std::size_t n_features_a) {
  cfg.validate();
  if (!full.has_labels) throw DataError("training data has no labels");
  FxSim fx;
  std::size_t M = full.rows();
  std::size_t N = full.n_features();
  std::size_t K = cfg.buckets;

  PlainModel model;
  model.cfg = cfg;
  model.n_features_a = n_features_a;
  model.n_features_b = N - n_features_a;

  auto bins = bin_dataset(full, K);
  for (const auto& b : bins) model.thresholds.push_back(b.thresholds);

  std::vector<double> y(M);
  for (std::size_t i = 0; i < M; ++i) y[i] = fx.q(full.labels[i]);

  if (cfg.objective == Objective::kSquaredError) {
    double sum = 0;
    for (double v : y) sum += v;
    model.base_score = fx.mul(sum, fx.q(1.0 / (double)M));
  } else {
    model.base_score = 0.0;
  }
  std::vector<double> p(M, model.base_score);

  double div_bound = gain_div_bound(cfg, M);

  for (int t = 0; t < cfg.trees; ++t) {
    // gradients from up-to-date predictions
    NodeVecs root;
    root.g.resize(M);
    root.h.resize(M);
    root.mask.assign(M, 1);
    if (cfg.objective == Objective::kSquaredError) {
      for (std::size_t i = 0; i < M; ++i) {
        root.g[i] = p[i] - y[i];
        root.h[i] = 1.0;
      }
    } else {
      for (std::size_t i = 0; i < M; ++i) {
        double yh = fx.sigmoid(p[i], cfg.sigmoid_bound);
        root.g[i] = yh - y[i];
        root.h[i] = fx.mul(yh, 1.0 - yh);
      }
    }

    PlainTree tree;
    std::vector<NodeVecs> level{std::move(root)};
    for (int depth = 0; depth < cfg.max_depth; ++depth) {
      std::vector<NodeVecs> next;
      next.reserve(level.size() * 2);
      for (auto& node : level) {
        // bucket sums over every feature
        std::vector<std::vector<double>> bg(N, std::vector<double>(K, 0.0));
        std::vector<std::vector<double>> bh(N, std::vector<double>(K, 0.0));
        for (std::size_t j = 0; j < N; ++j) {
          for (std::size_t i = 0; i < M; ++i) {
            bg[j][bins[j].bucket_of[i]] += node.g[i];
            bh[j][bins[j].bucket_of[i]] += node.h[i];
          }
        }
        auto gains = gains_from_sums(fx, cfg, bg, bh, div_bound);
        std::size_t best = 0;
        double bias = split_tie_bias();
        double best_v = gains[0] + (double)gains.size() * bias;
        for (std::size_t i = 1; i < gains.size(); ++i) {
          double v = gains[i] + (double)(gains.size() - i) * bias;
          if (v > best_v) {
            best = i;
            best_v = v;
          }
        }
        SplitRef ref = split_from_flat(best, n_features_a, N - n_features_a, K);
        tree.splits.push_back(ref);

        std::size_t feature = ref.party == 0 ? ref.slot : n_features_a + ref.slot;
        NodeVecs left, right;
        left.g.resize(M);
        left.h.resize(M);
        left.mask.resize(M);
        right.g.resize(M);
        right.h.resize(M);
        right.mask.resize(M);
        for (std::size_t i = 0; i < M; ++i) {
          bool goes_left = bins[feature].bucket_of[i] <= (std::uint32_t)ref.bucket;
          left.g[i] = goes_left ? node.g[i] : 0.0;
          left.h[i] = goes_left ? node.h[i] : 0.0;
          left.mask[i] = goes_left ? node.mask[i] : 0;
          right.g[i] = node.g[i] - left.g[i];
          right.h[i] = node.h[i] - left.h[i];
          right.mask[i] = node.mask[i] - left.mask[i];
        }
        next.push_back(std::move(left));
        next.push_back(std::move(right));
      }
      level = std::move(next);
    }

    // leaves
    for (auto& leaf : level) {
      double G = 0, H = 0;
      for (std::size_t i = 0; i < M; ++i) {
        G += leaf.g[i];
        H += leaf.h[i];
      }
      double w = fx.div_precise(-G, H + cfg.lambda, div_bound);
      tree.leaf_weights.push_back(w);
      double wl = cfg.learning_rate == 1.0 ? w : fx.mul(w, fx.q(cfg.learning_rate));
      for (std::size_t i = 0; i < M; ++i) {
        if (leaf.mask[i]) p[i] += wl;
      }
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

namespace {

// position of instance i's leaf in tree t
std::size_t leaf_index(const PlainModel& model, const PlainTree& tree,
                       const Dataset& instances, std::size_t i) {
  std::size_t node = 0;  // breadth-first internal index
  int depth = 0;
  std::size_t pos = 0;  // index within the level
  for (; depth < model.cfg.max_depth; ++depth) {
    const SplitRef& s = tree.splits[node];
    std::size_t feature =
        s.party == 0 ? (std::size_t)s.slot : model.n_features_a + (std::size_t)s.slot;
    double v = instances.columns[feature][i];
    const auto& thr = model.thresholds[feature];
    // bucket_for(v) <= k  <=>  v <= thr[k] (when k is within range)
    bool left = (std::size_t)s.bucket < thr.size() ? (v <= thr[s.bucket]) : true;
    pos = pos * 2 + (left ? 0 : 1);
    node = ((std::size_t)1 << (depth + 1)) - 1 + pos;
  }
  return pos;
}

}  // namespace

std::vector<double> plain_predict(const PlainModel& model, const Dataset& instances) {
  FxSim fx;
  std::vector<double> out(instances.rows(), model.base_score);
  for (const auto& tree : model.trees) {
    for (std::size_t i = 0; i < instances.rows(); ++i) {
      double w = tree.leaf_weights[leaf_index(model, tree, instances, i)];
      out[i] += model.cfg.learning_rate == 1.0 ? w : fx.mul(w, fx.q(model.cfg.learning_rate));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw DataError("auc: length mismatch");
  std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * (double)(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] > 0.5) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auc: need both classes");
  return (pos_rank_sum - (double)n_pos * (double)(n_pos + 1) / 2.0) /
         ((double)n_pos * (double)n_neg);
}

double rmse(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw DataError("rmse: length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double d = scores[i] - labels[i];
    s += d * d;
  }
  return std::sqrt(s / (double)scores.size());
}

// ---------------------------------------------------------------------------
// model JSON (single-file plaintext variant)
// ---------------------------------------------------------------------------

void PlainModel::save_json(const std::string& path) const {
  nlohmann::json j;
  j["kind"] = "plain";
  j["config"] = {{"trees", cfg.trees},
                 {"max_depth", cfg.max_depth},
                 {"lambda", cfg.lambda},
                 {"gamma", cfg.gamma},
                 {"buckets", cfg.buckets},
                 {"objective", to_string(cfg.objective)},
                 {"learning_rate", cfg.learning_rate}};
  j["n_features_a"] = n_features_a;
  j["n_features_b"] = n_features_b;
  j["base_score"] = base_score;
  j["thresholds"] = thresholds;
  nlohmann::json trees_j = nlohmann::json::array();
  for (const auto& t : trees) {
    nlohmann::json tj;
    tj["leaf_weights"] = t.leaf_weights;
    nlohmann::json splits = nlohmann::json::array();
    for (const auto& s : t.splits) {
      splits.push_back({{"party", s.party}, {"slot", s.slot}, {"bucket", s.bucket}});
    }
    tj["splits"] = splits;
    trees_j.push_back(tj);
  }
  j["trees"] = trees_j;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

PlainModel PlainModel::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  PlainModel m;
  m.cfg.trees = j["config"]["trees"];
  m.cfg.max_depth = j["config"]["max_depth"];
  m.cfg.lambda = j["config"]["lambda"];
  m.cfg.gamma = j["config"]["gamma"];
  m.cfg.buckets = j["config"]["buckets"];
  m.cfg.objective = objective_from_string(j["config"]["objective"]);
  m.cfg.learning_rate = j["config"]["learning_rate"];
  m.n_features_a = j["n_features_a"];
  m.n_features_b = j["n_features_b"];
  m.base_score = j["base_score"];
  m.thresholds = j["thresholds"].get<std::vector<std::vector<double>>>();
  for (const auto& tj : j["trees"]) {
    PlainTree t;
    t.leaf_weights = tj["leaf_weights"].get<std::vector<double>>();
    for (const auto& sj : tj["splits"]) {
      t.splits.push_back({sj["party"], sj["slot"], sj["bucket"]});
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

}  // namespace sgb
