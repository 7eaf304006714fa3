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

#include "sgb/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>

namespace sgb {

namespace {
std::atomic<double> g_recv_timeout{120.0};
}

void set_recv_timeout(double seconds) { g_recv_timeout = seconds; }
double recv_timeout() { return g_recv_timeout; }

// ---------------------------------------------------------------------------
// In-process transport
// ---------------------------------------------------------------------------

namespace {

struct TimedMessage {
  Bytes payload;
  double ready = 0.0;
};

struct InProcQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<TimedMessage> q;

  void push(TimedMessage m) {
    {
      std::scoped_lock lk(mu);
      q.push_back(std::move(m));
    }
    cv.notify_one();
  }

  TimedMessage pop() {
    std::unique_lock lk(mu);
    if (!cv.wait_for(lk, std::chrono::duration<double>(recv_timeout()),
                     [&] { return !q.empty(); })) {
      throw ChannelError("recv timeout");
    }
    TimedMessage m = std::move(q.front());
    q.pop_front();
    return m;
  }
};

class InProcChannel : public Channel {
 public:
  InProcChannel(Role self, std::shared_ptr<InProcQueue> tx, std::shared_ptr<InProcQueue> rx,
                SimClock* clock)
      : self_(self), tx_(std::move(tx)), rx_(std::move(rx)), clock_(clock) {}

  void send_raw(const Bytes& payload) override {
    TimedMessage m{payload, 0.0};
    {
      std::scoped_lock lk(clock_->mu);
      auto& t = clock_->t[(std::size_t)self_];
      t += clock_->wire_time(payload.size() + kFrameHeaderBytes);
      m.ready = t + clock_->profile.latency_s;
    }
    tx_->push(std::move(m));
  }

  Bytes recv_raw() override {
    TimedMessage m = rx_->pop();
    {
      std::scoped_lock lk(clock_->mu);
      auto& t = clock_->t[(std::size_t)self_];
      if (m.ready > t) t = m.ready;
    }
    if (clock_->realtime) {
      double cost = clock_->message_cost(m.payload.size() + kFrameHeaderBytes);
      std::this_thread::sleep_for(std::chrono::duration<double>(cost));
    }
    return std::move(m.payload);
  }

 private:
  Role self_;
  std::shared_ptr<InProcQueue> tx_, rx_;
  SimClock* clock_;
};

}  // namespace

std::unique_ptr<InProcNetwork> make_inproc_network(NetProfile profile) {
  profile.validate();
  auto net = std::make_unique<InProcNetwork>();
  net->clock.profile = profile;
  const Role roles[3] = {Role::PartyA, Role::PartyB, Role::Dealer};
  for (int i = 0; i < 3; ++i) net->ends[i].self = roles[i];
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      auto q_ij = std::make_shared<InProcQueue>();
      auto q_ji = std::make_shared<InProcQueue>();
      net->ends[i].attach(roles[j],
                          std::make_unique<InProcChannel>(roles[i], q_ij, q_ji, &net->clock));
      net->ends[j].attach(roles[i],
                          std::make_unique<InProcChannel>(roles[j], q_ji, q_ij, &net->clock));
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// TCP transport
// ---------------------------------------------------------------------------

namespace {

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w <= 0) throw ChannelError("socket write failed (channel closed?)");
    p += w;
    n -= (std::size_t)w;
  }
}

bool read_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, p, n, 0);
    if (r == 0) return false;
    if (r < 0) throw ChannelError("socket read failed");
    p += r;
    n -= (std::size_t)r;
  }
  return true;
}

// Writes are spooled through a queue so both sides can push large frames
// concurrently without deadlocking on full kernel buffers.
class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    writer_ = std::thread([this] { writer_loop(); });
  }

  ~TcpChannel() override {
    {
      std::scoped_lock lk(mu_);
      closing_ = true;
    }
    cv_.notify_one();
    if (writer_.joinable()) writer_.join();
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
  }

  void send_raw(const Bytes& payload) override {
    {
      std::scoped_lock lk(mu_);
      if (closing_) throw ChannelError("channel closed");
      outbox_.push_back(payload);
    }
    cv_.notify_one();
  }

  Bytes recv_raw() override {
    struct timeval tv;
    double to = recv_timeout();
    tv.tv_sec = (time_t)to;
    tv.tv_usec = (suseconds_t)((to - (double)tv.tv_sec) * 1e6);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    std::uint8_t hdr[4];
    if (!read_all(fd_, hdr, 4)) throw ChannelError("channel closed by peer");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= (std::uint32_t)hdr[i] << (8 * i);
    Bytes payload(len);
    if (len > 0 && !read_all(fd_, payload.data(), len)) {
      throw ChannelError("channel closed mid-frame");
    }
    return payload;
  }

 private:
  void writer_loop() {
    for (;;) {
      Bytes msg;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return closing_ || !outbox_.empty(); });
        if (outbox_.empty()) return;
        msg = std::move(outbox_.front());
        outbox_.pop_front();
      }
      std::uint8_t hdr[4];
      for (int i = 0; i < 4; ++i) hdr[i] = (msg.size() >> (8 * i)) & 0xff;
      write_all(fd_, hdr, 4);
      if (!msg.empty()) write_all(fd_, msg.data(), msg.size());
    }
  }

  int fd_;
  std::thread writer_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> outbox_;
  bool closing_ = false;
};

int listen_on(std::uint16_t port) {
  int ls = ::socket(AF_INET, SOCK_STREAM, 0);
  if (ls < 0) throw ChannelError("socket() failed");
  int one = 1;
  ::setsockopt(ls, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  if (::bind(ls, (sockaddr*)&addr, sizeof addr) != 0) {
    ::close(ls);
    throw ChannelError("bind failed on port " + std::to_string(port));
  }
  if (::listen(ls, 4) != 0) {
    ::close(ls);
    throw ChannelError("listen failed");
  }
  return ls;
}

int connect_to(const TcpAddress& a) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ChannelError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(a.port);
    if (::inet_pton(AF_INET, a.host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw ChannelError("bad address " + a.host);
    }
    if (::connect(fd, (sockaddr*)&addr, sizeof addr) == 0) return fd;
    ::close(fd);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  throw ChannelError("connect failed to " + a.host + ":" + std::to_string(a.port));
}

}  // namespace

std::unique_ptr<Channel> tcp_channel_pair_listen(std::uint16_t port, Role expect_peer) {
  int ls = listen_on(port);
  for (;;) {
    int fd = ::accept(ls, nullptr, nullptr);
    if (fd < 0) {
      ::close(ls);
      throw ChannelError("accept failed");
    }
    std::uint8_t hello = 0xff;
    if (!read_all(fd, &hello, 1) || hello != (std::uint8_t)expect_peer) {
      ::close(fd);
      continue;
    }
    ::close(ls);
    return std::make_unique<TcpChannel>(fd);
  }
}

std::unique_ptr<Channel> tcp_channel_pair_connect(const TcpAddress& addr, Role self) {
  int fd = connect_to(addr);
  std::uint8_t hello = (std::uint8_t)self;
  write_all(fd, &hello, 1);
  return std::make_unique<TcpChannel>(fd);
}

Endpoint make_tcp_endpoint(Role self, const std::array<TcpAddress, 3>& addrs) {
  Endpoint ep;
  ep.self = self;
  // Each pair is connected by the higher-numbered role dialing the lower one;
  // the dialer identifies itself with a one-byte hello.
  int expected_accepts = 0;
  for (int r = (int)self + 1; r < 3; ++r) ++expected_accepts;

  int ls = -1;
  if (expected_accepts > 0) ls = listen_on(addrs[(std::size_t)self].port);

  for (int r = 0; r < (int)self; ++r) {
    ep.attach((Role)r, tcp_channel_pair_connect(addrs[(std::size_t)r], self));
  }
  while (expected_accepts > 0) {
    int fd = ::accept(ls, nullptr, nullptr);
    if (fd < 0) throw ChannelError("accept failed");
    std::uint8_t hello = 0xff;
    if (!read_all(fd, &hello, 1) || hello <= (std::uint8_t)self || hello > 2) {
      ::close(fd);
      continue;
    }
    ep.attach((Role)hello, std::make_unique<TcpChannel>(fd));
    --expected_accepts;
  }
  if (ls >= 0) ::close(ls);
  return ep;
}

}  // namespace sgb
