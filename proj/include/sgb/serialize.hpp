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

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgb/ring.hpp"

namespace sgb {

using Bytes = std::vector<std::uint8_t>;

// All multi-byte integers on the wire are little-endian; ring elements are
// l/8 bytes.
class Writer {
 public:
  Bytes out;

  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
  }
  void ring(RingValue v, const RingConfig& cfg) {
    u128 r = v.raw;
    for (int i = 0; i < cfg.share_bytes(); ++i) {
      out.push_back((std::uint8_t)(r & 0xff));
      r >>= 8;
    }
  }
  void ring_vec(const RingVec& v, const RingConfig& cfg) {
    out.reserve(out.size() + v.size() * cfg.share_bytes());
    for (auto x : v) ring(x, cfg);
  }
  void bytes(std::span<const std::uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }
  void str(const std::string& s) {
    u32((std::uint32_t)s.size());
    out.insert(out.end(), s.begin(), s.end());
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= (std::uint32_t)b[i] << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= (std::uint64_t)b[i] << (8 * i);
    return v;
  }
  RingValue ring(const RingConfig& cfg) {
    auto b = take(cfg.share_bytes());
    u128 r = 0;
    for (int i = cfg.share_bytes() - 1; i >= 0; --i) r = (r << 8) | b[i];
    return {r};
  }
  RingVec ring_vec(std::size_t n, const RingConfig& cfg) {
    RingVec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = ring(cfg);
    return v;
  }
  std::string str() {
    auto n = u32();
    auto b = take(n);
    return std::string(b.begin(), b.end());
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > data_.size()) throw std::runtime_error("frame underflow");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace sgb
