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

#include "sgb/runconfig.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sgb {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string strip_quotes(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

TcpAddress parse_addr(const std::string& s) {
  auto pos = s.rfind(':');
  if (pos == std::string::npos) throw ConfigError("address must be host:port, got " + s);
  TcpAddress a;
  a.host = s.substr(0, pos);
  a.port = (std::uint16_t)std::stoul(s.substr(pos + 1));
  return a;
}

Role parse_role(const std::string& s) {
  if (s == "party_a" || s == "a") return Role::PartyA;
  if (s == "party_b" || s == "b") return Role::PartyB;
  if (s == "dealer" || s == "c") return Role::Dealer;
  throw ConfigError("unknown role '" + s + "'");
}

class KvView {
 public:
  explicit KvView(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  std::string str(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }
  double num(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    try {
      std::size_t used = 0;
      double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError("key '" + key + "': expected a number, got '" + it->second + "'");
    }
  }

 private:
  const std::map<std::string, std::string>& kv_;
};

}  // namespace

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    kv[key] = strip_quotes(value);
  }
  return kv;
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  static const std::set<std::string> known{
      "role",          "transport",     "addr_a",        "addr_b",
      "addr_c",        "bandwidth_mbps", "latency_ms",   "realtime",
      "seed",          "ring_bits",     "fraction_bits", "sigma_bits",
      "trees",         "max_depth",     "lambda",        "gamma",
      "buckets",       "objective",     "variant",       "learning_rate",
      "sigmoid_bound", "he_key_bits",   "data_a",        "data_b",
      "test_data_a",   "test_data_b",   "label_column",  "model_a",
      "model_b",       "scores_out",    "report",        "recipient",
      "job",           "sweep",         "sweep_values",  "bench_rows",
      "bench_features", "bench_features_a"};
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

  KvView v(kv);
  RunConfig c;
  c.role = parse_role(v.str("role", "party_a"));
  c.transport = v.str("transport", "sim");
  if (c.transport != "sim" && c.transport != "tcp") {
    throw ConfigError("transport must be sim or tcp");
  }
  if (kv.count("addr_a")) c.addrs[0] = parse_addr(kv.at("addr_a"));
  if (kv.count("addr_b")) c.addrs[1] = parse_addr(kv.at("addr_b"));
  if (kv.count("addr_c")) c.addrs[2] = parse_addr(kv.at("addr_c"));
  if (c.transport == "tcp") {
    for (int i = 0; i < 3; ++i) {
      if (c.addrs[i].port == 0) throw ConfigError("tcp mode requires addr_a, addr_b, addr_c");
    }
  }
  c.net.bandwidth_bps = v.num("bandwidth_mbps", 0) * 1e6;
  c.net.latency_s = v.num("latency_ms", 0) / 1e3;
  c.net.validate();
  c.realtime = v.str("realtime", "false") == "true";
  c.seed = (std::uint64_t)v.num("seed", 0);

  c.ring.l = (int)v.num("ring_bits", 128);
  c.ring.f = (int)v.num("fraction_bits", 20);
  c.ring.sigma = (int)v.num("sigma_bits", 40);
  try {
    c.ring.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("ring config: ") + e.what());
  }

  c.train.trees = (int)v.num("trees", 5);
  c.train.max_depth = (int)v.num("max_depth", 3);
  c.train.lambda = v.num("lambda", 1.0);
  c.train.gamma = v.num("gamma", 0.0);
  c.train.buckets = (std::size_t)v.num("buckets", 33);
  c.train.objective = objective_from_string(v.str("objective", "squared-error"));
  c.train.variant = variant_from_string(v.str("variant", "crp"));
  c.train.learning_rate = v.num("learning_rate", 1.0);
  c.train.sigmoid_bound = v.num("sigmoid_bound", 8.0);
  c.train.he_key_bits = (int)v.num("he_key_bits", 2048);
  try {
    c.train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }

  c.data_a = v.str("data_a", "");
  c.data_b = v.str("data_b", "");
  c.test_data_a = v.str("test_data_a", "");
  c.test_data_b = v.str("test_data_b", "");
  c.label_column = v.str("label_column", "label");
  c.model_a = v.str("model_a", "model_a.json");
  c.model_b = v.str("model_b", "model_b.json");
  c.scores_out = v.str("scores_out", "scores.csv");
  c.report_path = v.str("report", "");
  c.recipient = parse_role(v.str("recipient", "party_a"));
  c.job = v.str("job", "train");

  c.sweep = v.str("sweep", "M");
  if (kv.count("sweep_values")) {
    std::stringstream ss(kv.at("sweep_values"));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!trim(tok).empty()) c.sweep_values.push_back(std::stod(trim(tok)));
    }
  }
  c.bench_rows = (std::size_t)v.num("bench_rows", 1000);
  c.bench_features = (std::size_t)v.num("bench_features", 10);
  c.bench_features_a = (std::size_t)v.num("bench_features_a", 0);
  return c;
}

}  // namespace sgb
