// Copyright 2026 The pvwm Authors
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

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/wire/wire.hpp"

namespace pvwm::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  // "host:port"; host may be a name or an IPv4 literal.
  static Endpoint parse(std::string_view text);
  std::string str() const;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

// Owning file descriptor for a stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  int release() noexcept { return std::exchange(fd_, -1); }
  void close() noexcept;
  void shutdown_write() noexcept;

  void send_all(ByteView data);
  // Returns 0 on orderly shutdown.
  std::size_t recv_some(std::span<std::uint8_t> out);
  void set_timeout(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
};

// Accepts stream connections without retaining peer addresses, so nothing
// above the transport can learn who connected.
class Listener {
 public:
  static Listener bind(const Endpoint& ep, int backlog = 64);
  Socket accept();
  std::uint16_t port() const noexcept { return port_; }
  void close() noexcept { sock_.close(); }
  // Unblocks a thread sitting in accept().
  void shutdown() noexcept;
  int fd() const noexcept { return sock_.fd(); }

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

Socket connect(const Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::seconds(10));
std::pair<Socket, Socket> socket_pair();

// Outbound connection policy for clients.
class Dialer {
 public:
  virtual ~Dialer() = default;
  virtual Socket dial(const Endpoint& ep) = 0;
};

class TcpDialer : public Dialer {
 public:
  Socket dial(const Endpoint& ep) override { return connect(ep); }
};

// Records every endpoint dialled before delegating to TCP.
class RecordingDialer : public Dialer {
 public:
  Socket dial(const Endpoint& ep) override;
  std::vector<Endpoint> dialled() const;

 private:
  mutable std::mutex mu_;
  std::vector<Endpoint> log_;
};

// Frame transport over a socket with byte counters.
class FramedChannel : public wire::Channel {
 public:
  explicit FramedChannel(Socket sock, std::uint32_t max_frame = wire::kMaxFrameLength)
      : sock_(std::move(sock)), decoder_(max_frame) {}

  using wire::Channel::send;
  void send(const wire::Frame& frame) override;
  wire::Frame recv() override;

  Socket& socket() noexcept { return sock_; }
  std::uint64_t bytes_sent() const noexcept { return sent_; }
  std::uint64_t bytes_received() const noexcept { return received_; }

 private:
  Socket sock_;
  wire::FrameDecoder decoder_;
  std::uint64_t sent_ = 0;
  std::uint64_t received_ = 0;
};

}  // namespace pvwm::net
