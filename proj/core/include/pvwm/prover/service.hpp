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

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "pvwm/cache/cache.hpp"
#include "pvwm/gc/circuit.hpp"
#include "pvwm/gc/protocol.hpp"
#include "pvwm/gc/verify_circuit.hpp"
#include "pvwm/net/net.hpp"
#include "pvwm/prover/config.hpp"
#include "pvwm/prover/host_support.hpp"
#include "pvwm/prover/token_store.hpp"
#include "pvwm/tee/enclave.hpp"

namespace pvwm::prover {

struct ServiceStats {
  std::atomic<std::uint64_t> registrations{0};
  std::atomic<std::uint64_t> enclave_calls{0};
  std::atomic<std::uint64_t> verifications{0};
  std::atomic<std::uint64_t> cache_queries{0};
  std::atomic<std::uint64_t> cache_hits{0};
  std::atomic<std::uint64_t> cache_puts{0};
  std::atomic<std::uint64_t> aborts{0};
  std::atomic<std::uint64_t> errors{0};
};

// State shared by all sessions of one prover process.
class ProverCore {
 public:
  // `enclave` may be null in 2pc mode.
  ProverCore(ServiceConfig config, std::unique_ptr<tee::Enclave> enclave);

  const ServiceConfig& config() const noexcept { return config_; }
  TokenStore& store() noexcept { return store_; }
  tee::Enclave* enclave() noexcept { return enclave_.get(); }
  RateLimiter& limiter() noexcept { return limiter_; }
  HostLog& log() noexcept { return log_; }
  ServiceStats& stats() noexcept { return stats_; }

  bool cache_enabled() const noexcept { return cache_ != nullptr; }
  std::optional<bool> cache_get(const cache::PHashValue& h, const crypto::AssetId& id, double sim);
  // True when the entry is in the cache afterwards with this result.
  bool cache_put(const cache::CacheEntry& entry);
  std::string cache_snapshot() const;

  // Verify circuits are built once per distinct parameter block.
  std::shared_ptr<const gc::Circuit> circuit_for(const gc::VerifyCircuitParams& params);

  std::uint64_t next_session_id() noexcept { return ++session_counter_; }

 private:
  ServiceConfig config_;
  std::unique_ptr<tee::Enclave> enclave_;
  TokenStore store_;
  RateLimiter limiter_;
  HostLog log_;
  ServiceStats stats_;
  mutable std::mutex cache_mu_;
  std::unique_ptr<cache::ProportionalCache> cache_;
  std::mutex circuit_mu_;
  std::map<Bytes, std::shared_ptr<const gc::Circuit>> circuits_;
  std::atomic<std::uint64_t> session_counter_{0};
};

// Builds the enclave for a config: a child process or an in-process context.
std::unique_ptr<tee::Enclave> make_enclave(const ServiceConfig& config,
                                           std::optional<std::string> exec_path = std::nullopt);

// Per-connection protocol state machine. Frames in, frames out; no I/O.
class SessionHandler : private tee::Host {
 public:
  SessionHandler(ProverCore& core);
  ~SessionHandler() override;
  SessionHandler(const SessionHandler&) = delete;
  SessionHandler& operator=(const SessionHandler&) = delete;

  std::vector<wire::Frame> on_frame(const wire::Frame& frame);
  // Frames that could not be decoded at the transport level.
  std::vector<wire::Frame> on_transport_error(wire::ErrCode code);
  // The connection should be closed once the returned frames are sent.
  bool finished() const noexcept { return state_ == State::kDone; }
  std::uint64_t id() const noexcept { return sid_; }

 private:
  enum class State : std::uint8_t { kIdle, kAwaitFinish, kEstablished, kAwaitChoices, kDone };

  tee::FetchResult fetch(const crypto::AssetId& id) override;

  std::vector<wire::Frame> on_register(const wire::Frame& f);
  std::vector<wire::Frame> on_cache_query(const wire::Frame& f);
  std::vector<wire::Frame> on_hello(const wire::Frame& f);
  std::vector<wire::Frame> on_finish(const wire::Frame& f);
  std::vector<wire::Frame> on_verify(const wire::Frame& f);
  std::vector<wire::Frame> on_gc_hello(const wire::Frame& f);
  std::vector<wire::Frame> on_choices(const wire::Frame& f);

  std::vector<wire::Frame> err(wire::ErrCode code);
  std::vector<wire::Frame> abort(wire::AbortCode code);
  void close_enclave_session() noexcept;

  ProverCore& core_;
  std::uint64_t sid_;
  State state_ = State::kIdle;
  bool enclave_session_ = false;
  std::optional<cache::CacheEntry> pending_put_;
  std::optional<crypto::AssetId> fetched_;
  std::shared_ptr<const gc::Circuit> circuit_;
  std::unique_ptr<gc::GarblerSession> garbler_;
};

// TCP front end: one thread per connection.
class Server {
 public:
  Server(ProverCore& core, const net::Endpoint& listen);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }
  void start();
  // Stops accepting and joins every connection thread.
  void stop();

 private:
  void accept_loop();
  void serve(net::Socket sock);

  ProverCore& core_;
  net::Listener listener_;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  struct Connection {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
    int fd;
  };
  void reap(bool all);

  std::mutex conn_mu_;
  std::vector<Connection> connections_;
};

}  // namespace pvwm::prover
