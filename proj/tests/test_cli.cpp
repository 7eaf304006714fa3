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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sgb/oracle.hpp"
#include "sgb/synth.hpp"

using namespace sgb;
using nlohmann::json;

namespace {

const std::string kBin = SGB_BIN;
const std::string kDir = "/tmp/sgb_cli_test";

int run(const std::string& args) {
  std::string cmd = "cd " + kDir + " && " + kBin + " " + args + " >stdout.txt 2>stderr.txt";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_json(const std::string& name) {
  std::ifstream in(kDir + "/" + name);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

std::vector<double> read_scores(const std::string& name) {
  std::ifstream in(kDir + "/" + name);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> out;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    out.push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

struct Fixture {
  Fixture() {
    REQUIRE(std::system(("rm -rf " + kDir + " && mkdir -p " + kDir).c_str()) == 0);
    auto full = make_synthetic({.rows = 200, .features = 6, .classification = true, .seed = 99});
    auto [da, db] = vertical_split(full, 3);
    da.to_csv(kDir + "/train_a.csv");
    db.to_csv(kDir + "/train_b.csv");
    std::ofstream cfg(kDir + "/cfg.ini");
    cfg << "transport = sim\nseed = 42\ntrees = 2\nmax_depth = 2\nbuckets = 6\n"
           "objective = logistic\nvariant = crp\n"
           "data_a = train_a.csv\ndata_b = train_b.csv\n"
           "test_data_a = train_a.csv\ntest_data_b = train_b.csv\n"
           "bandwidth_mbps = 100\nlatency_ms = 5\nreport = report.json\n";
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("train smoke: exit 0, two model halves, nonzero bytes, profile echo") {
  fixture();
  CHECK(run("train --config cfg.ini") == 0);
  CHECK(std::ifstream(kDir + "/model_a.json").good());
  CHECK(std::ifstream(kDir + "/model_b.json").good());
  json r = read_json("report.json");
  CHECK(r["totals"]["bytes_ab"].get<std::uint64_t>() > 0);
  CHECK(r["config"]["bandwidth_mbps"].get<double>() == 100.0);
  CHECK(r["config"]["latency_ms"].get<double>() == 5.0);
  CHECK(r["metrics"].contains("auc"));
  CHECK(r["totals"]["virtual_seconds"].get<double>() > 0);
}

TEST_CASE("predict reproduces training-session predictions within 1e-3") {
  fixture();
  REQUIRE(run("train --config cfg.ini") == 0);
  json train_report = read_json("report.json");
  REQUIRE(run("predict --config cfg.ini --set scores_out=s1.csv --set report=p1.json") == 0);
  REQUIRE(run("predict --config cfg.ini --set scores_out=s2.csv --set report=p2.json "
              "--set seed=77") == 0);
  auto s1 = read_scores("s1.csv");
  auto s2 = read_scores("s2.csv");
  REQUIRE(s1.size() == 200);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(std::fabs(s1[i] - s2[i]) <= 1e-3);  // fresh share randomness, same scores
  }
  json p1 = read_json("p1.json");
  CHECK(std::fabs(p1["metrics"]["auc"].get<double>() -
                  train_report["metrics"]["auc"].get<double>()) <= 1e-9);
}

TEST_CASE("empty instance file: empty output, exit 0") {
  fixture();
  REQUIRE(run("train --config cfg.ini") == 0);
  {
    std::ofstream a(kDir + "/empty_a.csv"), b(kDir + "/empty_b.csv");
    a << "f0,f1,f2,label\n";
    b << "f3,f4,f5\n";
  }
  CHECK(run("predict --config cfg.ini --set data_a=empty_a.csv --set data_b=empty_b.csv "
            "--set scores_out=empty_scores.csv") == 0);
  CHECK(read_scores("empty_scores.csv").empty());
}

TEST_CASE("mismatched model halves exit with code 4") {
  fixture();
  REQUIRE(run("train --config cfg.ini") == 0);
  REQUIRE(run("train --config cfg.ini --set trees=3 --set model_a=model_a3.json "
              "--set model_b=model_b3.json") == 0);
  CHECK(run("predict --config cfg.ini --set model_b=model_b3.json") == 4);
}

TEST_CASE("config and io error exit codes") {
  fixture();
  CHECK(run("train --config cfg.ini --set nonsense_key=1") == 2);
  CHECK(run("train --config cfg.ini --set transport=tcp") == 2);  // missing addresses
  CHECK(run("train --config cfg.ini --set data_a=missing.csv") == 3);
  CHECK(run("train --config does_not_exist.ini") == 2);
}

TEST_CASE("bench: ss grows with K, crp flat, all linear in M, single point matches train") {
  fixture();
  // sweep K with the ss back-end
  REQUIRE(run("bench --config cfg.ini --set variant=ss --set sweep=K "
              "--set sweep_values=8,32 --set bench_rows=300 --set bench_features=6 "
              "--set report=bench_ss_k.json --set trees=1 --set max_depth=1") == 0);
  json ssk = read_json("bench_ss_k.json");
  auto phase_bytes = [](const json& row, const std::string& name) -> double {
    for (const auto& p : row["phases"]) {
      if (p["name"] == name) return p["bytes"].get<double>();
    }
    return 0;
  };
  double ss8 = phase_bytes(ssk["rows"][0], "sum_gradients");
  double ss32 = phase_bytes(ssk["rows"][1], "sum_gradients");
  CHECK(ss32 / ss8 > 3.0);  // close to the ideal (32*N+2)/(8*N+2)
  CHECK(ss32 / ss8 < 4.4);

  REQUIRE(run("bench --config cfg.ini --set variant=crp --set sweep=K "
              "--set sweep_values=8,32 --set bench_rows=300 --set bench_features=6 "
              "--set report=bench_crp_k.json --set trees=1 --set max_depth=1") == 0);
  json crpk = read_json("bench_crp_k.json");
  double crp8 = phase_bytes(crpk["rows"][0], "sum_gradients");
  double crp32 = phase_bytes(crpk["rows"][1], "sum_gradients");
  CHECK(crp32 / crp8 == doctest::Approx(1.0).epsilon(0.05));

  // sweep M: linear for both back-ends
  for (std::string variant : {"ss", "crp"}) {
    REQUIRE(run("bench --config cfg.ini --set variant=" + variant +
                " --set sweep=M --set sweep_values=200,400 --set bench_features=6 "
                "--set report=bench_m.json --set trees=1 --set max_depth=1") == 0);
    json bm = read_json("bench_m.json");
    double m200 = phase_bytes(bm["rows"][0], "sum_gradients");
    double m400 = phase_bytes(bm["rows"][1], "sum_gradients");
    CHECK(m400 / m200 == doctest::Approx(2.0).epsilon(0.15));
  }

  // single-point sweep reproduces a train run on the same data and seed
  REQUIRE(run("bench --config cfg.ini --set sweep=M --set sweep_values=240 "
              "--set bench_features=6 --set report=bench_single.json") == 0);
  json single = read_json("bench_single.json")["rows"][0];
  auto full = make_synthetic(
      {.rows = 240, .features = 6, .classification = true, .seed = 42 + 240});
  auto [da, db] = vertical_split(full, 3);
  da.to_csv(kDir + "/bench_a.csv");
  db.to_csv(kDir + "/bench_b.csv");
  REQUIRE(run("train --config cfg.ini --set data_a=bench_a.csv --set data_b=bench_b.csv "
              "--set test_data_a= --set test_data_b= --set report=train_single.json") == 0);
  json train_single = read_json("train_single.json");
  CHECK(single["totals"]["bytes_ab"].get<std::uint64_t>() ==
        train_single["totals"]["bytes_ab"].get<std::uint64_t>());
}

TEST_CASE("tcp mode: three processes train and write model halves") {
  fixture();
  std::string tcp =
      " --set transport=tcp --set addr_a=127.0.0.1:47501 --set addr_b=127.0.0.1:47502 "
      "--set addr_c=127.0.0.1:47503";
  std::string cmd = "cd " + kDir + " && (" + kBin + " dealer --config cfg.ini" + tcp +
                    " --set role=dealer & " + kBin + " train --config cfg.ini" + tcp +
                    " --set role=party_b --set model_b=tcp_model_b.json & " + kBin +
                    " train --config cfg.ini" + tcp +
                    " --set role=party_a --set model_a=tcp_model_a.json "
                    "--set report=tcp_report.json; status=$?; wait; exit $status) "
                    ">tcp_out.txt 2>tcp_err.txt";
  int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  CHECK(WEXITSTATUS(rc) == 0);
  CHECK(std::ifstream(kDir + "/tcp_model_a.json").good());
  CHECK(std::ifstream(kDir + "/tcp_model_b.json").good());

  // the tcp halves predict together with the sim-trained data flow
  std::string tcp2 =
      " --set transport=tcp --set addr_a=127.0.0.1:47511 --set addr_b=127.0.0.1:47512 "
      "--set addr_c=127.0.0.1:47513 --set model_a=tcp_model_a.json "
      "--set model_b=tcp_model_b.json";
  std::string pcmd = "cd " + kDir + " && (" + kBin + " dealer --config cfg.ini" + tcp2 +
                     " --set role=dealer & " + kBin + " predict --config cfg.ini" + tcp2 +
                     " --set role=party_b & " + kBin + " predict --config cfg.ini" + tcp2 +
                     " --set role=party_a --set scores_out=tcp_scores.csv; status=$?; wait; "
                     "exit $status) >tcp_out2.txt 2>tcp_err2.txt";
  rc = std::system(pcmd.c_str());
  REQUIRE(WIFEXITED(rc));
  CHECK(WEXITSTATUS(rc) == 0);
  CHECK(read_scores("tcp_scores.csv").size() == 200);
}
