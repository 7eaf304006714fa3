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

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "sgb/runconfig.hpp"
#include "sgb/synth.hpp"
#include "sgb/train.hpp"

namespace sgb {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// small helpers
// ---------------------------------------------------------------------------

std::uint64_t effective_seed(const RunConfig& cfg) {
  if (cfg.seed != 0) return cfg.seed;
  return std::random_device{}();
}

bool csv_has_column(const std::string& path, const std::string& col) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::stringstream ss(header);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    if (cell == col) return true;
  }
  return false;
}

Dataset load_party_data(const std::string& path, const std::string& label_col, bool want_label) {
  if (path.empty()) throw ConfigError("missing dataset path");
  if (want_label && csv_has_column(path, label_col)) {
    return Dataset::from_csv(path, label_col);
  }
  return Dataset::from_csv(path, "");
}

void write_scores_csv(const std::string& path, const std::vector<double>& scores) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "row,score\n";
  out.precision(10);
  for (std::size_t i = 0; i < scores.size(); ++i) out << i << ',' << scores[i] << '\n';
}

json phases_json(const CostMeter& a, const CostMeter& b) {
  json out = json::array();
  std::set<std::string> names;
  for (const auto& [n, _] : a.phases()) names.insert(n);
  for (const auto& [n, _] : b.phases()) names.insert(n);
  for (const auto& name : names) {
    PhaseCounters pa, pb;
    if (auto it = a.phases().find(name); it != a.phases().end()) pa = it->second;
    if (auto it = b.phases().find(name); it != b.phases().end()) pb = it->second;
    out.push_back({{"name", name},
                   {"bytes", pa.bytes_sent + pb.bytes_sent},
                   {"bytes_party_a", pa.bytes_sent},
                   {"bytes_party_b", pb.bytes_sent},
                   {"dealer_bytes", pa.bytes_sent_dealer + pb.bytes_sent_dealer},
                   {"rounds", std::max(pa.rounds, pb.rounds)},
                   {"messages", pa.messages_sent + pb.messages_sent},
                   {"virtual_seconds", pa.seconds}});
  }
  return out;
}

json config_echo(const RunConfig& cfg) {
  return {{"variant", to_string(cfg.train.variant)},
          {"objective", to_string(cfg.train.objective)},
          {"trees", cfg.train.trees},
          {"max_depth", cfg.train.max_depth},
          {"buckets", cfg.train.buckets},
          {"lambda", cfg.train.lambda},
          {"gamma", cfg.train.gamma},
          {"learning_rate", cfg.train.learning_rate},
          {"ring_bits", cfg.ring.l},
          {"fraction_bits", cfg.ring.f},
          {"bandwidth_mbps", cfg.net.bandwidth_bps / 1e6},
          {"latency_ms", cfg.net.latency_s * 1e3},
          {"seed", cfg.seed}};
}

json metrics_json(const TrainConfig& train, const std::vector<double>& scores,
                  const std::vector<double>& labels) {
  json m;
  if (!scores.empty() && scores.size() == labels.size()) {
    if (train.objective == Objective::kLogistic) {
      m["auc"] = auc(scores, labels);
    } else {
      m["rmse"] = rmse(scores, labels);
    }
  }
  return m;
}

void write_report(const std::string& path, const json& report) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << report.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// sim-mode orchestration: three roles in one process
// ---------------------------------------------------------------------------

struct SimResult {
  ModelHalf model_a, model_b;
  std::vector<double> scores;  // at the recipient
  json report;
};

template <typename FnA, typename FnB>
json run_sim(const RunConfig& cfg, FnA&& fa, FnB&& fb) {
  auto net = make_inproc_network(cfg.net);
  net->clock.realtime = cfg.realtime;
  for (Role r : {Role::PartyA, Role::PartyB}) {
    net->endpoint(r).meter.set_clock([c = &net->clock] { return c->elapsed(); });
  }
  std::uint64_t seed = effective_seed(cfg);
  DealerService dealer(&net->endpoint(Role::Dealer), cfg.ring, derive_seed(seed, 1000));
  std::thread dealer_thread([&] { dealer.serve(); });

  std::exception_ptr ea, eb;
  auto wrap = [&](auto&& fn, Role role, std::exception_ptr& err) {
    try {
      PartyCtx ctx(role, &net->endpoint(role), cfg.ring, derive_seed(seed, (std::uint64_t)role));
      Proto p(ctx);
      fn(p);
      ctx.ep->meter.set_phase("");  // flush the last phase window
    } catch (...) {
      err = std::current_exception();
    }
  };
  std::thread ta([&] { wrap(fa, Role::PartyA, ea); });
  std::thread tb([&] { wrap(fb, Role::PartyB, eb); });
  ta.join();
  tb.join();
  shutdown_dealer(net->endpoint(Role::PartyA));
  dealer_thread.join();
  if (ea) std::rethrow_exception(ea);
  if (eb) std::rethrow_exception(eb);

  json report;
  report["config"] = config_echo(cfg);
  report["phases"] =
      phases_json(net->endpoint(Role::PartyA).meter, net->endpoint(Role::PartyB).meter);
  auto& ma = net->endpoint(Role::PartyA).meter;
  auto& mb = net->endpoint(Role::PartyB).meter;
  report["totals"] = {
      {"bytes_ab", ma.bytes_sent(Role::PartyB) + mb.bytes_sent(Role::PartyA)},
      {"bytes_party_a", ma.bytes_sent(Role::PartyB)},
      {"bytes_party_b", mb.bytes_sent(Role::PartyA)},
      {"dealer_bytes", ma.bytes_sent(Role::Dealer) + mb.bytes_sent(Role::Dealer)},
      {"rounds", std::max(ma.rounds(), mb.rounds())},
      {"virtual_seconds", net->clock.elapsed()}};
  return report;
}

int cmd_train_sim(const RunConfig& cfg) {
  Dataset da = load_party_data(cfg.data_a, cfg.label_column, true);
  Dataset db = load_party_data(cfg.data_b, cfg.label_column, false);
  if (!da.has_labels) throw ConfigError("training data for Party A needs column '" +
                                        cfg.label_column + "'");
  bool with_test = !cfg.test_data_a.empty();
  Dataset ta, tb;
  if (with_test) {
    ta = load_party_data(cfg.test_data_a, cfg.label_column, true);
    tb = load_party_data(cfg.test_data_b, cfg.label_column, false);
  }

  ModelHalf model_a, model_b;
  std::vector<double> scores;
  auto t0 = std::chrono::steady_clock::now();
  json report = run_sim(
      cfg,
      [&](Proto& p) {
        model_a = secure_train(p, cfg.train, da);
        if (with_test) scores = secure_predict(p, model_a, ta, cfg.recipient);
      },
      [&](Proto& p) {
        model_b = secure_train(p, cfg.train, db);
        if (with_test) {
          auto s = secure_predict(p, model_b, tb, cfg.recipient);
          if (cfg.recipient == Role::PartyB) scores = std::move(s);
        }
      });
  auto t1 = std::chrono::steady_clock::now();

  model_a.save_json(cfg.model_a);
  model_b.save_json(cfg.model_b);
  report["wall_seconds"] = std::chrono::duration<double>(t1 - t0).count();
  if (with_test && ta.has_labels && cfg.recipient == Role::PartyA) {
    report["metrics"] = metrics_json(cfg.train, scores, ta.labels);
  }
  write_report(cfg.report_path, report);
  std::cout << report.dump(2) << "\n";
  std::cerr << "model halves written to " << cfg.model_a << " and " << cfg.model_b << "\n";
  return 0;
}

int cmd_predict_sim(const RunConfig& cfg) {
  ModelHalf half_a = ModelHalf::load_json(cfg.model_a);
  ModelHalf half_b = ModelHalf::load_json(cfg.model_b);
  Dataset da = load_party_data(cfg.data_a, cfg.label_column, true);
  Dataset db = load_party_data(cfg.data_b, cfg.label_column, false);

  std::vector<double> scores;
  json report = run_sim(
      cfg,
      [&](Proto& p) {
        auto s = secure_predict(p, half_a, da, cfg.recipient);
        if (cfg.recipient == Role::PartyA) scores = std::move(s);
      },
      [&](Proto& p) {
        auto s = secure_predict(p, half_b, db, cfg.recipient);
        if (cfg.recipient == Role::PartyB) scores = std::move(s);
      });

  write_scores_csv(cfg.scores_out, scores);
  if (da.has_labels && cfg.recipient == Role::PartyA) {
    report["metrics"] = metrics_json(half_a.cfg, scores, da.labels);
  }
  write_report(cfg.report_path, report);
  std::cout << report.dump(2) << "\n";
  std::cerr << "scores written to " << cfg.scores_out << "\n";
  return 0;
}

int cmd_bench(const RunConfig& base) {
  std::vector<double> values = base.sweep_values;
  if (values.empty()) throw ConfigError("bench needs sweep_values");
  json rows = json::array();
  for (double value : values) {
    RunConfig cfg = base;
    SynthSpec spec;
    spec.rows = cfg.bench_rows;
    spec.features = cfg.bench_features;
    spec.classification = cfg.train.objective == Objective::kLogistic;
    spec.seed = effective_seed(base) + (std::uint64_t)value;
    if (cfg.sweep == "M") {
      spec.rows = (std::size_t)value;
    } else if (cfg.sweep == "N") {
      spec.features = (std::size_t)value;
    } else if (cfg.sweep == "K") {
      cfg.train.buckets = (std::size_t)value;
    } else if (cfg.sweep == "bandwidth") {
      cfg.net.bandwidth_bps = value * 1e6;
    } else if (cfg.sweep == "latency") {
      cfg.net.latency_s = value / 1e3;
    } else {
      throw ConfigError("sweep must be one of M, N, K, bandwidth, latency");
    }

    Dataset full = make_synthetic(spec);
    std::size_t n_a = cfg.bench_features_a > 0 ? cfg.bench_features_a : spec.features / 2;
    auto [da, db] = vertical_split(full, n_a);

    json report = run_sim(
        cfg, [&](Proto& p) { secure_train(p, cfg.train, da); },
        [&](Proto& p) { secure_train(p, cfg.train, db); });
    report["sweep"] = {{"param", cfg.sweep}, {"value", value},
                       {"rows", spec.rows},  {"features", spec.features}};
    rows.push_back(report);

    std::cout << cfg.sweep << "=" << value << "  bytes_ab="
              << report["totals"]["bytes_ab"].get<std::uint64_t>()
              << "  virtual_s=" << report["totals"]["virtual_seconds"].get<double>() << "\n";
  }
  json out = {{"kind", "bench"}, {"rows", rows}};
  write_report(base.report_path, out);
  if (base.report_path.empty()) std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// tcp mode: one role per process
// ---------------------------------------------------------------------------

int cmd_dealer(const RunConfig& cfg) {
  Endpoint ep = make_tcp_endpoint(Role::Dealer, cfg.addrs);
  DealerService dealer(&ep, cfg.ring, derive_seed(effective_seed(cfg), 1000));
  std::cerr << "dealer serving on " << cfg.addrs[2].host << ":" << cfg.addrs[2].port << "\n";
  dealer.serve();
  return 0;
}

int cmd_party_tcp(const RunConfig& cfg) {
  if (cfg.role == Role::Dealer) return cmd_dealer(cfg);
  bool is_a = cfg.role == Role::PartyA;
  Endpoint ep = make_tcp_endpoint(cfg.role, cfg.addrs);
  auto wall0 = std::chrono::steady_clock::now();
  ep.meter.set_clock([wall0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  });
  PartyCtx ctx(cfg.role, &ep, cfg.ring, derive_seed(effective_seed(cfg), (std::uint64_t)cfg.role));
  Proto p(ctx);

  if (cfg.job == "train") {
    Dataset d = load_party_data(is_a ? cfg.data_a : cfg.data_b, cfg.label_column, is_a);
    ModelHalf model = secure_train(p, cfg.train, d);
    model.save_json(is_a ? cfg.model_a : cfg.model_b);
    std::cerr << "model half written to " << (is_a ? cfg.model_a : cfg.model_b) << "\n";
  } else if (cfg.job == "predict") {
    ModelHalf model = ModelHalf::load_json(is_a ? cfg.model_a : cfg.model_b);
    Dataset d = load_party_data(is_a ? cfg.data_a : cfg.data_b, cfg.label_column, is_a);
    auto scores = secure_predict(p, model, d, cfg.recipient);
    if (cfg.role == cfg.recipient) {
      write_scores_csv(cfg.scores_out, scores);
      std::cerr << "scores written to " << cfg.scores_out << "\n";
    }
  } else {
    throw ConfigError("job must be train or predict");
  }
  ctx.ep->meter.set_phase("");
  if (is_a) shutdown_dealer(ep);

  json report;
  report["config"] = config_echo(cfg);
  report["role"] = role_name(cfg.role);
  report["phases"] = phases_json(ep.meter, CostMeter{});
  report["totals"] = {{"bytes_sent", ep.meter.bytes_sent(other_party(cfg.role))},
                      {"rounds", ep.meter.rounds()}};
  write_report(cfg.report_path, report);
  return 0;
}

// ---------------------------------------------------------------------------

RunConfig build_config(const std::string& config_path, const std::vector<std::string>& sets) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = load_config_file(config_path);
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + s);
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return RunConfig::from_map(kv);
}

int dispatch(const std::string& cmd, const RunConfig& cfg) {
  if (cmd == "train") {
    if (cfg.transport == "sim") return cmd_train_sim(cfg);
    RunConfig c = cfg;
    c.job = "train";
    return cmd_party_tcp(c);
  }
  if (cmd == "predict") {
    if (cfg.transport == "sim") return cmd_predict_sim(cfg);
    RunConfig c = cfg;
    c.job = "predict";
    return cmd_party_tcp(c);
  }
  if (cmd == "bench") return cmd_bench(cfg);
  if (cmd == "dealer") return cmd_dealer(cfg);
  if (cmd == "party") return cmd_party_tcp(cfg);
  throw ConfigError("unknown command " + cmd);
}

}  // namespace
}  // namespace sgb

int main(int argc, char** argv) {
  CLI::App app{"two-party secure gradient boosted trees"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string active;
  for (const char* name : {"train", "predict", "bench", "dealer", "party"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "config file (key = value lines)");
    sub->add_option("--set,-D", sets, "override a config key (key=value)")->take_all();
    sub->callback([&active, name] { active = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    sgb::RunConfig cfg = sgb::build_config(config_path, sets);
    return sgb::dispatch(active, cfg);
  } catch (const sgb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sgb::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const sgb::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 4;
  } catch (const sgb::ChannelError& e) {
    std::cerr << "channel error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
