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

#include <cstdio>
#include <fstream>

#include "harness.hpp"
#include "sgb/binning.hpp"
#include "sgb/synth.hpp"

using namespace sgb;
using namespace sgb::testing;

TEST_CASE("nearest-rank quantile binning") {
  SUBCASE("1..9 with K=3") {
    std::vector<double> col{1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto fb = quantile_bin(col, 3);
    CHECK(fb.thresholds == std::vector<double>{3, 6});
    std::vector<int> sizes(3, 0);
    for (auto b : fb.bucket_of) ++sizes[b];
    CHECK(sizes == std::vector<int>{3, 3, 3});
  }
  SUBCASE("constant column collapses to one bucket") {
    std::vector<double> col(12, 4.5);
    auto fb = quantile_bin(col, 4);
    CHECK(fb.n_buckets() == 1);
    for (auto b : fb.bucket_of) CHECK(b == 0);
  }
  SUBCASE("K=2 on two values") {
    auto fb = quantile_bin({1, 2}, 2);
    CHECK(fb.thresholds == std::vector<double>{1});
    CHECK(fb.bucket_of == std::vector<std::uint32_t>{0, 1});
  }
  SUBCASE("monotonicity: larger values never land lower") {
    Prg prg(3);
    std::vector<double> col(501);
    for (auto& v : col) v = std::floor(prg.real(-50, 50) * 16) / 16;
    auto fb = quantile_bin(col, 9);
    for (std::size_t i = 0; i < col.size(); ++i) {
      for (std::size_t j = 0; j < col.size(); ++j) {
        if (col[i] < col[j]) CHECK(fb.bucket_of[i] <= fb.bucket_of[j]);
        if (col[i] == col[j]) CHECK(fb.bucket_of[i] == fb.bucket_of[j]);
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(quantile_bin({}, 4), DataError);
    CHECK_THROWS_AS(quantile_bin({1, 2}, 1), DataError);
  }
}

TEST_CASE("shared indicators reconstruct to the partition") {
  RingConfig cfg;
  Prg prg(5);
  std::vector<double> col(40);
  for (auto& v : col) v = prg.real(0, 10);
  const std::size_t K = 4;
  auto fb = quantile_bin(col, K);
  auto r = run_pair([&](Proto& p) {
    std::vector<FeatureBuckets> local;
    if (p.ctx().is_a()) local = {fb};
    return share_indicators(p, local, 1, K, col.size(), Role::PartyA);
  });
  std::vector<std::uint64_t> ones(col.size(), 0);
  for (std::size_t k = 0; k < K; ++k) {
    RingVec s = reconstruct(r.a[k], r.b[k], cfg);
    for (std::size_t i = 0; i < col.size(); ++i) {
      std::uint64_t bit = (std::uint64_t)s[i].raw;
      CHECK((bit == 0 || bit == 1));
      CHECK(bit == (fb.bucket_of[i] == k ? 1u : 0u));
      ones[i] += bit;
    }
  }
  for (auto total : ones) CHECK(total == 1);  // each row in exactly one bucket
}

TEST_CASE("one-bucket feature shares to all-ones") {
  RingConfig cfg;
  std::vector<double> col(10, 3.0);
  auto fb = quantile_bin(col, 3);
  auto r = run_pair([&](Proto& p) {
    std::vector<FeatureBuckets> local;
    if (!p.ctx().is_a()) local = {fb};
    return share_indicators(p, local, 1, 3, col.size(), Role::PartyB);
  });
  RingVec s0 = reconstruct(r.a[0], r.b[0], cfg);
  for (auto v : s0) CHECK(v.raw == (u128)1);
  for (std::size_t k = 1; k < 3; ++k) {
    for (auto v : reconstruct(r.a[k], r.b[k], cfg)) CHECK(v.raw == (u128)0);
  }
}

TEST_CASE("csv roundtrip and validation") {
  auto d = make_synthetic({.rows = 25, .features = 3, .classification = false, .seed = 7});
  std::string path = "/tmp/sgb_test_data.csv";
  d.to_csv(path);
  auto back = Dataset::from_csv(path, "label");
  REQUIRE(back.rows() == d.rows());
  REQUIRE(back.has_labels);
  CHECK(back.feature_names == d.feature_names);
  for (std::size_t j = 0; j < d.columns.size(); ++j) {
    for (std::size_t i = 0; i < d.rows(); ++i) {
      CHECK(back.columns[j][i] == doctest::Approx(d.columns[j][i]).epsilon(1e-12));
    }
  }
  std::remove(path.c_str());

  SUBCASE("missing values are rejected") {
    std::string bad = "/tmp/sgb_bad.csv";
    {
      std::ofstream out(bad);
      out << "a,b\n1.0,\n";
    }
    CHECK_THROWS_AS(Dataset::from_csv(bad, ""), DataError);
    std::remove(bad.c_str());
  }
  SUBCASE("unknown label column is rejected") {
    std::string f = "/tmp/sgb_nolabel.csv";
    {
      std::ofstream out(f);
      out << "a,b\n1.0,2.0\n";
    }
    CHECK_THROWS_AS(Dataset::from_csv(f, "target"), DataError);
    std::remove(f.c_str());
  }
}
