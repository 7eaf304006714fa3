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

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sgb/serialize.hpp"

namespace sgb {

enum class Role : std::uint8_t { PartyA = 0, PartyB = 1, Dealer = 2 };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::PartyA: return "party_a";
    case Role::PartyB: return "party_b";
    default: return "dealer";
  }
}

inline Role other_party(Role r) {
  return r == Role::PartyA ? Role::PartyB : Role::PartyA;
}

struct NetProfile {
  double bandwidth_bps = 0.0;  // 0 = unlimited
  double latency_s = 0.0;

  void validate() const {
    if (bandwidth_bps < 0 || latency_s < 0) throw std::invalid_argument("bad net profile");
  }
};

class ChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every message is framed as a 4-byte little-endian length plus payload; the
// meter charges payload + header so byte totals agree across transports.
constexpr std::size_t kFrameHeaderBytes = 4;

struct PhaseCounters {
  std::uint64_t bytes_sent = 0;         // to the other party
  std::uint64_t bytes_sent_dealer = 0;  // randomness-channel traffic
  std::uint64_t messages_sent = 0;
  std::uint64_t rounds = 0;
  double seconds = 0.0;  // virtual (sim) or wall (tcp) when a clock is set
};

// Byte/message/round accounting for one endpoint. A round increments when a
// send follows a receive (or opens the session) on this endpoint.
class CostMeter {
 public:
  void on_send(Role peer, std::size_t payload_bytes) {
    auto& c = per_peer_[idx(peer)];
    std::uint64_t framed = payload_bytes + kFrameHeaderBytes;
    c.bytes_sent += framed;
    c.messages_sent += 1;
    if (last_op_ != Op::Send) {
      ++rounds_;
      if (!phase_.empty()) ++phases_[phase_].rounds;
    }
    last_op_ = Op::Send;
    if (!phase_.empty()) {
      auto& p = phases_[phase_];
      if (peer == Role::Dealer) {
        p.bytes_sent_dealer += framed;
      } else {
        p.bytes_sent += framed;
      }
      p.messages_sent += 1;
    }
  }

  void on_recv(Role peer, std::size_t payload_bytes) {
    auto& c = per_peer_[idx(peer)];
    c.bytes_recv += payload_bytes + kFrameHeaderBytes;
    c.messages_recv += 1;
    last_op_ = Op::Recv;
  }

  void transcript_update(std::span<const std::uint8_t> payload) {
    for (auto b : payload) {
      transcript_hash_ ^= b;
      transcript_hash_ *= 0x100000001b3ULL;  // FNV-1a
    }
  }

  std::uint64_t bytes_sent(Role peer) const { return per_peer_[idx(peer)].bytes_sent; }
  std::uint64_t bytes_recv(Role peer) const { return per_peer_[idx(peer)].bytes_recv; }
  std::uint64_t messages_sent(Role peer) const { return per_peer_[idx(peer)].messages_sent; }
  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t transcript_hash() const { return transcript_hash_; }

  void set_phase(const std::string& name) {
    if (clock_fn_) {
      double now = clock_fn_();
      if (!phase_.empty()) phases_[phase_].seconds += now - phase_start_;
      phase_start_ = now;
    }
    phase_ = name;
  }
  const std::string& phase() const { return phase_; }
  const std::map<std::string, PhaseCounters>& phases() const { return phases_; }

  // Optional time source for per-phase elapsed accounting.
  void set_clock(std::function<double()> fn) { clock_fn_ = std::move(fn); }

  void reset() {
    per_peer_ = {};
    rounds_ = 0;
    last_op_ = Op::None;
    phases_.clear();
    phase_.clear();
  }

 private:
  enum class Op { None, Send, Recv };
  struct Counters {
    std::uint64_t bytes_sent = 0, messages_sent = 0;
    std::uint64_t bytes_recv = 0, messages_recv = 0;
  };
  static std::size_t idx(Role r) { return (std::size_t)r; }

  std::array<Counters, 3> per_peer_{};
  std::uint64_t rounds_ = 0;
  Op last_op_ = Op::None;
  std::uint64_t transcript_hash_ = 0xcbf29ce484222325ULL;
  std::string phase_;
  double phase_start_ = 0.0;
  std::function<double()> clock_fn_;
  std::map<std::string, PhaseCounters> phases_;
};

// RAII phase label for one endpoint's meter.
class PhaseScope {
 public:
  PhaseScope(CostMeter& m, std::string name) : m_(m), prev_(m.phase()) {
    m_.set_phase(std::move(name));
  }
  ~PhaseScope() { m_.set_phase(prev_); }

 private:
  CostMeter& m_;
  std::string prev_;
};

// One duplex channel bound to a fixed peer.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send_raw(const Bytes& payload) = 0;
  virtual Bytes recv_raw() = 0;
};

// Discrete-event virtual time shared by the in-process roles: sending
// occupies the sender's link for bits/bandwidth, the message becomes visible
// to the receiver one latency later, and receiving advances the receiver's
// clock to that point.
struct SimClock {
  std::mutex mu;
  std::array<double, 3> t{0.0, 0.0, 0.0};
  NetProfile profile;
  bool realtime = false;

  double wire_time(std::size_t framed_bytes) const {
    if (profile.bandwidth_bps <= 0) return 0.0;
    return (double)framed_bytes * 8.0 / profile.bandwidth_bps;
  }
  double message_cost(std::size_t framed_bytes) const {
    return profile.latency_s + wire_time(framed_bytes);
  }
  double elapsed() {
    std::scoped_lock lk(mu);
    return std::max(t[0], std::max(t[1], t[2]));
  }
};

// One role's view of the network: channels to the other two roles plus the
// meter. recv blocks; a configurable timeout guards against lost peers.
class Endpoint {
 public:
  Role self;
  CostMeter meter;

  void attach(Role peer, std::unique_ptr<Channel> ch) { chans_[(std::size_t)peer] = std::move(ch); }

  void send(Role peer, const Bytes& payload) {
    auto* ch = chans_[(std::size_t)peer].get();
    if (!ch) throw ChannelError("channel not established");
    meter.on_send(peer, payload.size());
    meter.transcript_update(payload);
    ch->send_raw(payload);
  }

  Bytes recv(Role peer) {
    auto* ch = chans_[(std::size_t)peer].get();
    if (!ch) throw ChannelError("channel not established");
    Bytes b = ch->recv_raw();
    meter.on_recv(peer, b.size());
    return b;
  }

 private:
  std::array<std::unique_ptr<Channel>, 3> chans_{};
};

// In-process transport: paired blocking queues, optional virtual clock.
struct InProcNetwork {
  SimClock clock;
  std::array<Endpoint, 3> ends;  // indexed by Role

  Endpoint& endpoint(Role r) { return ends[(std::size_t)r]; }
};

std::unique_ptr<InProcNetwork> make_inproc_network(NetProfile profile = {});

// TCP transport. Every role listens on its own address; the pair (r1, r2)
// is connected by the higher-numbered role dialing the lower-numbered one.
struct TcpAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

std::unique_ptr<Channel> tcp_channel_pair_listen(std::uint16_t port, Role expect_peer);
std::unique_ptr<Channel> tcp_channel_pair_connect(const TcpAddress& addr, Role self);

// Builds one role's endpoint of a three-role TCP mesh.
Endpoint make_tcp_endpoint(Role self, const std::array<TcpAddress, 3>& addrs);

// Default receive timeout (seconds) for blocking recv on both transports.
void set_recv_timeout(double seconds);
double recv_timeout();

}  // namespace sgb
