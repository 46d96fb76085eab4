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

#include "pvwm/prover/service.hpp"

#include <sys/socket.h>

#include <chrono>
#include <cstdio>

#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"

namespace pvwm::prover {

namespace {

std::string short_id(const crypto::AssetId& id) { return to_hex(ByteView(id.digest).first(8)); }

bool scheme_allowed(ServiceMode mode, wire::Scheme scheme) {
  if (mode == ServiceMode::kTwoPc) return scheme == wire::Scheme::kFreqyWm2pc;
  return scheme == wire::Scheme::kFreqyWm || scheme == wire::Scheme::kObt;
}

}  // namespace

ProverCore::ProverCore(ServiceConfig config, std::unique_ptr<tee::Enclave> enclave)
    : config_(std::move(config)),
      enclave_(std::move(enclave)),
      store_(config_.store),
      limiter_(config_.rate_limit),
      log_(config_.log) {
  if (config_.mode != ServiceMode::kTwoPc && !enclave_) {
    throw InvalidArgument("tee modes need an enclave");
  }
  if (config_.cache_capacity > 0) {
    cache_ = std::make_unique<cache::ProportionalCache>(config_.cache_capacity,
                                                       config_.cache_threshold, config_.serve_rule);
  }
}

std::optional<bool> ProverCore::cache_get(const cache::PHashValue& h, const crypto::AssetId& id,
                                          double sim) {
  if (!cache_) return std::nullopt;
  std::lock_guard lock(cache_mu_);
  return cache_->get(h, id, sim);
}

bool ProverCore::cache_put(const cache::CacheEntry& entry) {
  if (!cache_) return false;
  std::lock_guard lock(cache_mu_);
  cache_->put(entry);
  const auto* e = cache_->find(entry.h, entry.id);
  return e != nullptr && e->res == entry.res && e->sim == entry.sim;
}

std::string ProverCore::cache_snapshot() const {
  if (!cache_) return {};
  std::lock_guard lock(cache_mu_);
  return cache_->snapshot_csv();
}

std::shared_ptr<const gc::Circuit> ProverCore::circuit_for(const gc::VerifyCircuitParams& params) {
  const Bytes key = params.encode();
  std::lock_guard lock(circuit_mu_);
  auto it = circuits_.find(key);
  if (it != circuits_.end()) return it->second;
  auto c = std::make_shared<const gc::Circuit>(gc::build_verify_circuit(params));
  circuits_.emplace(key, c);
  return c;
}

std::unique_ptr<tee::Enclave> make_enclave(const ServiceConfig& config,
                                           std::optional<std::string> exec_path) {
  if (config.mode == ServiceMode::kTwoPc) return nullptr;
  const tee::ProgramConfig program = program_for(config.mode, config.check_idgen);
  if (program.attested && config.manufacturer_key.empty()) {
    throw InvalidArgument("manufacturer_key is required in mode " + std::string(mode_name(config.mode)));
  }
  const std::size_t arena = config.arena_mb << 20;
  if (config.enclave == EnclaveKind::kInline) {
    tee::RuntimeOptions o;
    o.program = program;
    o.arena_size = arena;
    if (program.attested) o.manufacturer = tee::load_signing_key(config.manufacturer_key);
    return std::make_unique<tee::InlineEnclave>(std::move(o));
  }
  tee::ProcessOptions o;
  o.program = program;
  o.manufacturer_key_path = config.manufacturer_key;
  o.arena_size = arena;
  o.exec_path = std::move(exec_path);
  return tee::ProcessEnclave::spawn(o);
}

SessionHandler::SessionHandler(ProverCore& core) : core_(core), sid_(core.next_session_id()) {}

SessionHandler::~SessionHandler() { close_enclave_session(); }

void SessionHandler::close_enclave_session() noexcept {
  if (!enclave_session_) return;
  enclave_session_ = false;
  try {
    Bytes in;
    put_u64(in, sid_);
    core_.enclave()->call(tee::kCloseSession, in, *this);
  } catch (...) {
  }
}

std::vector<wire::Frame> SessionHandler::err(wire::ErrCode code) {
  ++core_.stats().errors;
  state_ = State::kDone;
  return {{wire::MsgType::kErr, wire::Err{code}.encode()}};
}

std::vector<wire::Frame> SessionHandler::abort(wire::AbortCode code) {
  ++core_.stats().aborts;
  close_enclave_session();
  garbler_.reset();
  state_ = State::kDone;
  core_.log().write("session=" + std::to_string(sid_) + " abort=" + wire::abort_name(code));
  return {{wire::MsgType::kAbort, wire::Abort{code}.encode()}};
}

std::vector<wire::Frame> SessionHandler::on_transport_error(wire::ErrCode code) {
  close_enclave_session();
  return err(code);
}

tee::FetchResult SessionHandler::fetch(const crypto::AssetId& id) {
  fetched_ = id;
  tee::FetchResult r;
  const auto rec = core_.store().get(id);
  core_.log().write("session=" + std::to_string(sid_) + " fetch id=" + short_id(id) +
                    (rec ? " found" : " unknown"));
  if (!rec) return r;
  if (!core_.limiter().allow(id)) {
    r.status = tee::FetchResult::Status::kRateLimited;
    return r;
  }
  r.status = tee::FetchResult::Status::kFound;
  r.scheme = rec->scheme;
  r.share = rec->share;
  r.csec = rec->csec;
  return r;
}

std::vector<wire::Frame> SessionHandler::on_frame(const wire::Frame& frame) {
  using wire::MsgType;
  if (state_ == State::kDone) return {};
  if (!wire::is_known(static_cast<std::uint8_t>(frame.type))) return err(wire::ErrCode::kMalformed);
  try {
    switch (frame.type) {
      case MsgType::kRegister:
        if (state_ != State::kIdle) break;
        return on_register(frame);
      case MsgType::kCacheQry:
        if (state_ != State::kIdle) break;
        return on_cache_query(frame);
      case MsgType::kRaHello:
        if (state_ != State::kIdle) break;
        return on_hello(frame);
      case MsgType::kRaFinish:
        if (state_ != State::kAwaitFinish) break;
        return on_finish(frame);
      case MsgType::kVerifyReq:
        if (state_ != State::kEstablished) break;
        return on_verify(frame);
      case MsgType::kGcHello:
        if (state_ != State::kIdle) break;
        return on_gc_hello(frame);
      case MsgType::kOtChoices:
        if (state_ != State::kAwaitChoices) break;
        return on_choices(frame);
      default:
        break;
    }
  } catch (const ParseError&) {
    return abort(wire::AbortCode::kMalformed);
  } catch (const ProtocolError&) {
    return abort(wire::AbortCode::kMalformed);
  } catch (const std::exception& e) {
    core_.log().write("session=" + std::to_string(sid_) + " internal error");
    return abort(wire::AbortCode::kInternal);
  }
  return abort(wire::AbortCode::kBadSession);
}

std::vector<wire::Frame> SessionHandler::on_register(const wire::Frame& f) {
  wire::Register m;
  try {
    m = wire::Register::decode(f.payload);
  } catch (const ParseError&) {
    return err(wire::ErrCode::kMalformed);
  }
  if (const auto& psk = core_.config().owner_psk) {
    const crypto::Digest expected = crypto::hmac_sha256(*psk, m.body());
    if (!m.mac || !ct_equal(expected, *m.mac)) return err(wire::ErrCode::kUnauthorized);
  }
  if (!scheme_allowed(core_.config().mode, m.scheme)) return err(wire::ErrCode::kUnsupported);
  if (m.scheme != wire::Scheme::kFreqyWm2pc && core_.config().mode == ServiceMode::kTee &&
      m.csec.empty()) {
    return err(wire::ErrCode::kMalformed);
  }
  TokenStore::PutResult r;
  try {
    r = core_.store().put({m.id, m.scheme, std::move(m.share), std::move(m.csec)});
  } catch (const IoError&) {
    ++core_.stats().errors;
    return {{wire::MsgType::kErr, wire::Err{wire::ErrCode::kStorage}.encode()}};
  }
  if (r == TokenStore::PutResult::kDuplicate) {
    ++core_.stats().errors;
    return {{wire::MsgType::kErr, wire::Err{wire::ErrCode::kDuplicate}.encode()}};
  }
  ++core_.stats().registrations;
  core_.log().write("session=" + std::to_string(sid_) + " register id=" + short_id(m.id) +
                    " bytes=" + std::to_string(f.payload.size()));
  return {{wire::MsgType::kAck, {}}};
}

std::vector<wire::Frame> SessionHandler::on_cache_query(const wire::Frame& f) {
  const auto q = wire::CacheQry::decode(f.payload);
  ++core_.stats().cache_queries;
  const auto hit = core_.cache_get(q.h, q.id, q.sim);
  core_.log().write("session=" + std::to_string(sid_) + " cache id=" + short_id(q.id) +
                    (hit ? " hit" : " miss"));
  if (hit) {
    ++core_.stats().cache_hits;
    return {{wire::MsgType::kCacheRes, wire::CacheRes{true, static_cast<std::uint8_t>(*hit)}.encode()}};
  }
  // Remember the query so a following verification in this connection can
  // be memoised.
  if (core_.cache_enabled() && core_.config().mode != ServiceMode::kTwoPc) {
    pending_put_ = cache::CacheEntry{q.h, q.id, false, q.sim};
  }
  return {{wire::MsgType::kCacheRes, wire::CacheRes{false, 0}.encode()}};
}

std::vector<wire::Frame> SessionHandler::on_hello(const wire::Frame& f) {
  if (core_.config().mode == ServiceMode::kTwoPc) return abort(wire::AbortCode::kUnsupportedMode);
  const auto hello = wire::RaHello::decode(f.payload);
  const tee::OpenSessionIn in{sid_, hello};
  ++core_.stats().enclave_calls;
  const auto r = core_.enclave()->call(tee::kOpenSession, in.encode(), *this);
  if (!r.ok) return abort(r.code);
  enclave_session_ = true;
  state_ = State::kAwaitFinish;
  return {{wire::MsgType::kRaReport, r.payload}};
}

std::vector<wire::Frame> SessionHandler::on_finish(const wire::Frame& f) {
  const tee::FinishSessionIn in{sid_, wire::RaFinish::decode(f.payload)};
  ++core_.stats().enclave_calls;
  const auto r = core_.enclave()->call(tee::kFinishSession, in.encode(), *this);
  if (!r.ok) {
    enclave_session_ = false;  // the enclave already erased it
    return abort(r.code);
  }
  state_ = State::kEstablished;
  return {};
}

std::vector<wire::Frame> SessionHandler::on_verify(const wire::Frame& f) {
  const auto t0 = std::chrono::steady_clock::now();
  tee::VerifyIn in;
  in.sid = sid_;
  in.disclose = pending_put_.has_value();
  in.sealed = f.payload;
  fetched_.reset();
  ++core_.stats().enclave_calls;
  const auto r = core_.enclave()->call(tee::kVerify, in.encode(), *this);
  enclave_session_ = false;  // verify always ends the enclave session
  ++core_.stats().verifications;
  if (!r.ok) return abort(r.code);
  const auto out = tee::VerifyOut::decode(r.payload);
  if (pending_put_ && out.disclosed && fetched_ && *fetched_ == pending_put_->id) {
    pending_put_->res = *out.disclosed;
    if (core_.cache_put(*pending_put_)) ++core_.stats().cache_puts;
  }
  pending_put_.reset();
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  core_.log().write("session=" + std::to_string(sid_) + " verify in=" +
                    std::to_string(f.payload.size()) + " out=" + std::to_string(out.sealed.size()) +
                    " us=" + std::to_string(us));
  state_ = State::kDone;
  return {{wire::MsgType::kVerifyRes, out.sealed}};
}

std::vector<wire::Frame> SessionHandler::on_gc_hello(const wire::Frame& f) {
  if (core_.config().mode != ServiceMode::kTwoPc) return abort(wire::AbortCode::kUnsupportedMode);
  const auto hello = wire::GcHello::decode(f.payload);
  const auto rec = core_.store().get(hello.id);
  core_.log().write("session=" + std::to_string(sid_) + " gc id=" + short_id(hello.id) +
                    (rec ? " found" : " unknown"));
  if (!rec) return abort(wire::AbortCode::kUnknownId);
  if (!core_.limiter().allow(hello.id)) return abort(wire::AbortCode::kRateLimited);
  if (rec->scheme != wire::Scheme::kFreqyWm2pc) return abort(wire::AbortCode::kUnsupportedMode);
  gc::VerifyCircuitParams params;
  try {
    params = gc::VerifyCircuitParams::decode(rec->csec);
  } catch (const Error&) {
    return abort(wire::AbortCode::kInternal);
  }
  circuit_ = core_.circuit_for(params);
  if (gc::circuit_hash(*circuit_) != hello.circuit_hash) {
    return abort(wire::AbortCode::kCircuitMismatch);
  }
  if (rec->share.size() * 8 < circuit_->garbler_inputs) return abort(wire::AbortCode::kInternal);
  const gc::BitVector bits = gc::unpack_bits(rec->share, circuit_->garbler_inputs);
  garbler_ = std::make_unique<gc::GarblerSession>(*circuit_, bits);
  state_ = State::kAwaitChoices;
  return garbler_->start();
}

std::vector<wire::Frame> SessionHandler::on_choices(const wire::Frame& f) {
  wire::Frame reply = garbler_->on_choices(f.payload);
  garbler_.reset();
  ++core_.stats().verifications;
  core_.log().write("session=" + std::to_string(sid_) + " gc done in=" +
                    std::to_string(f.payload.size()) + " out=" + std::to_string(reply.payload.size()));
  state_ = State::kDone;
  return {std::move(reply)};
}

Server::Server(ProverCore& core, const net::Endpoint& listen)
    : core_(core), listener_(net::Listener::bind(listen)) {}

Server::~Server() { stop(); }

void Server::start() {
  if (running_.exchange(true)) return;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conn_mu_);
    for (auto& c : connections_) {
      if (!c.done->load()) ::shutdown(c.fd, SHUT_RDWR);
    }
  }
  reap(true);
}

void Server::reap(bool all) {
  std::vector<Connection> finished;
  {
    std::lock_guard lock(conn_mu_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (all || it->done->load()) {
        finished.push_back(std::move(*it));
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : finished) c.thread.join();
}

void Server::accept_loop() {
  while (running_.load()) {
    net::Socket sock;
    try {
      sock = listener_.accept();
    } catch (const Error&) {
      if (!running_.load()) break;
      continue;
    }
    if (!sock.valid()) continue;
    reap(false);
    auto done = std::make_shared<std::atomic<bool>>(false);
    const int fd = sock.fd();
    std::lock_guard lock(conn_mu_);
    connections_.push_back({std::thread([this, s = std::move(sock), done]() mutable {
                              serve(std::move(s));
                              done->store(true);
                            }),
                            done, fd});
  }
}

void Server::serve(net::Socket sock) {
  sock.set_timeout(std::chrono::seconds(60));
  net::FramedChannel ch(std::move(sock));
  SessionHandler handler(core_);
  try {
    while (!handler.finished()) {
      std::vector<wire::Frame> out;
      try {
        out = handler.on_frame(ch.recv());
      } catch (const wire::FrameTooLarge&) {
        out = handler.on_transport_error(wire::ErrCode::kTooLarge);
      } catch (const ParseError&) {
        // Zero length field: the stream cannot be resynchronised.
        out = handler.on_transport_error(wire::ErrCode::kMalformed);
      }
      for (const auto& f : out) ch.send(f);
    }
    ch.socket().shutdown_write();
  } catch (const Error&) {
    // Peer went away or timed out.
  }
}

}  // namespace pvwm::prover
