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

#include <map>
#include <string>

#include "sgb/oracle.hpp"
#include "sgb/transport.hpp"

namespace sgb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration: a config file provides the base map, -D
// flags override individual keys.
struct RunConfig {
  Role role = Role::PartyA;
  std::string transport = "sim";  // sim | tcp
  std::array<TcpAddress, 3> addrs{};
  NetProfile net;
  bool realtime = false;
  std::uint64_t seed = 0;  // 0: OS entropy

  RingConfig ring;
  TrainConfig train;

  std::string data_a, data_b;
  std::string test_data_a, test_data_b;
  std::string label_column = "label";
  std::string model_a = "model_a.json";
  std::string model_b = "model_b.json";
  std::string scores_out = "scores.csv";
  std::string report_path;
  Role recipient = Role::PartyA;
  std::string job = "train";  // for the party subcommand

  // bench
  std::string sweep = "M";
  std::vector<double> sweep_values;
  std::size_t bench_rows = 1000;
  std::size_t bench_features = 10;
  std::size_t bench_features_a = 0;  // 0: features evenly split

  static RunConfig from_map(const std::map<std::string, std::string>& kv);
};

std::map<std::string, std::string> load_config_file(const std::string& path);

}  // namespace sgb
