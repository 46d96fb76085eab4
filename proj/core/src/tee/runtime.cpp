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

#include "pvwm/tee/runtime.hpp"

#include <chrono>

#include "pvwm/common/error.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"

namespace pvwm::tee {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point since) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count());
}

// Copies bytes onto the host heap so they outlive the session arena.
Bytes to_host(ByteView v) {
  HostScope host;
  return Bytes(v.begin(), v.end());
}

template <class Binding>
void check_binding(const std::optional<Binding>& binding, const crypto::AssetId& id) {
  if (!binding || binding->id() != id) throw VerifyAbort(wire::AbortCode::kIdMismatch);
}

}  // namespace

Bytes FetchResult::encode() const {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(status));
  out.push_back(static_cast<std::uint8_t>(scheme));
  wire::put_var(out, share);
  wire::put_var(out, csec);
  return out;
}

FetchResult FetchResult::decode(ByteView data) {
  wire::Reader r(data);
  FetchResult f;
  const std::uint8_t status = r.u8();
  if (status > 2) throw ParseError("bad fetch status");
  f.status = static_cast<Status>(status);
  f.scheme = static_cast<wire::Scheme>(r.u8());
  f.share = r.var();
  f.csec = r.var();
  r.expect_end();
  return f;
}

Bytes EcallResult::encode() const {
  Bytes out;
  if (ok) {
    out.reserve(1 + payload.size());
    out.push_back(0);
    append(out, payload);
  } else {
    out = {1, static_cast<std::uint8_t>(code)};
  }
  return out;
}

EcallResult EcallResult::decode(ByteView data) {
  if (data.empty()) throw ParseError("empty ecall result");
  if (data[0] == 0) return success(Bytes(data.begin() + 1, data.end()));
  if (data[0] != 1 || data.size() != 2) throw ParseError("bad ecall result");
  return abort(static_cast<wire::AbortCode>(data[1]));
}

Bytes OpenSessionIn::encode() const {
  Bytes out;
  put_u64(out, sid);
  append(out, hello.encode());
  return out;
}

OpenSessionIn OpenSessionIn::decode(ByteView data) {
  wire::Reader r(data);
  OpenSessionIn in;
  in.sid = r.u64();
  in.hello = wire::RaHello::decode(r.take(r.remaining()));
  return in;
}

Bytes FinishSessionIn::encode() const {
  Bytes out;
  put_u64(out, sid);
  append(out, finish.encode());
  return out;
}

FinishSessionIn FinishSessionIn::decode(ByteView data) {
  wire::Reader r(data);
  FinishSessionIn in;
  in.sid = r.u64();
  in.finish = wire::RaFinish::decode(r.take(r.remaining()));
  return in;
}

Bytes VerifyIn::encode() const {
  Bytes out;
  put_u64(out, sid);
  out.push_back(disclose ? 1 : 0);
  append(out, sealed);
  return out;
}

VerifyIn VerifyIn::decode(ByteView data) {
  wire::Reader r(data);
  VerifyIn in;
  in.sid = r.u64();
  const std::uint8_t d = r.u8();
  if (d > 1) throw ParseError("bad disclose flag");
  in.disclose = d == 1;
  const ByteView rest = r.take(r.remaining());
  in.sealed.assign(rest.begin(), rest.end());
  return in;
}

Bytes VerifyOut::encode() const {
  Bytes out;
  out.push_back(disclosed ? static_cast<std::uint8_t>(*disclosed) : 0xff);
  append(out, sealed);
  return out;
}

VerifyOut VerifyOut::decode(ByteView data) {
  if (data.empty()) throw ParseError("empty verify output");
  VerifyOut out;
  if (data[0] == 0 || data[0] == 1) {
    out.disclosed = data[0] == 1;
  } else if (data[0] != 0xff) {
    throw ParseError("bad disclosure byte");
  }
  out.sealed.assign(data.begin() + 1, data.end());
  return out;
}

VerifyAbort::VerifyAbort(wire::AbortCode code)
    : Error(std::string("verification aborted: ") + wire::abort_name(code)), code_(code) {}

bool run_verify_program(const ProgramConfig& program, const wire::VerifyReq& req,
                        const FetchResult& token, VerifyStageTimes* times,
                        const std::function<void(std::string_view)>& fault) {
  using wire::AbortCode;
  if (token.status == FetchResult::Status::kUnknown) throw VerifyAbort(AbortCode::kUnknownId);
  if (token.status == FetchResult::Status::kRateLimited) throw VerifyAbort(AbortCode::kRateLimited);
  if (token.scheme != wire::Scheme::kFreqyWm && token.scheme != wire::Scheme::kObt) {
    throw VerifyAbort(AbortCode::kUnsupportedMode);
  }

  if (fault) fault("reconstruct");
  auto t = Clock::now();
  Bytes sec;
  try {
    sec = open_secret(program.form, req.id, req.tkh, token.share, token.csec);
  } catch (const Error&) {
    throw VerifyAbort(AbortCode::kDecryptFailed);
  }

  bool res = false;
  if (token.scheme == wire::Scheme::kFreqyWm) {
    freqywm::FreqySecret secret;
    try {
      secret = freqywm::secret_from_json(as_chars(sec));
    } catch (const Error&) {
      secure_zero(sec);
      throw VerifyAbort(AbortCode::kDecryptFailed);
    }
    secure_zero(sec);
    if (program.check_idgen) check_binding(secret.binding, req.id);
    if (times) times->reconstruct_ns = elapsed_ns(t);

    if (fault) fault("detect");
    t = Clock::now();
    const auto dataset = freqywm::parse_dataset(as_chars(req.dw));
    res = freqywm::detect(dataset, secret, freqywm::default_params(secret));
  } else {
    obt::ObtSecret secret;
    try {
      secret = obt::secret_from_json(as_chars(sec));
    } catch (const Error&) {
      secure_zero(sec);
      throw VerifyAbort(AbortCode::kDecryptFailed);
    }
    secure_zero(sec);
    if (program.check_idgen) check_binding(secret.binding, req.id);
    if (times) times->reconstruct_ns = elapsed_ns(t);

    if (fault) fault("detect");
    t = Clock::now();
    obt::NumericTable table;
    try {
      table = obt::parse_table(as_chars(req.dw));
    } catch (const ParseError&) {
      throw VerifyAbort(AbortCode::kMalformed);
    }
    res = obt::detect(table, secret);
  }
  if (times) times->detect_ns = elapsed_ns(t);
  return res;
}

struct EnclaveRuntime::Session {
  explicit Session(const FixedBytes<32>& n) : nonce(n), dh(crypto::DhKeypair::generate()) {}

  bool established = false;
  FixedBytes<32> nonce;
  crypto::DhKeypair dh;
  wire::RaReport report;
  std::optional<SecureChannel> channel;
};

struct EnclaveRuntime::Slot {
  std::mutex mu;
  std::unique_ptr<Arena> arena;
  Session* state = nullptr;  // allocated inside `arena`
};

EnclaveRuntime::EnclaveRuntime(RuntimeOptions options) : options_(std::move(options)) {
  if (options_.program.attested && !options_.manufacturer) {
    throw InvalidArgument("attested enclave needs a manufacturer key");
  }
  measurement_ = options_.program.measurement();
}

EnclaveRuntime::~EnclaveRuntime() {
  std::vector<std::uint64_t> ids;
  {
    std::lock_guard lock(mu_);
    for (const auto& [sid, slot] : sessions_) ids.push_back(sid);
  }
  for (auto sid : ids) release(sid);
}

std::unique_ptr<Arena> EnclaveRuntime::take_arena() {
  std::lock_guard lock(mu_);
  if (!pool_.empty()) {
    auto a = std::move(pool_.back());
    pool_.pop_back();
    return a;
  }
  auto a = std::make_unique<Arena>(options_.arena_size);
  all_arenas_.push_back(a.get());
  return a;
}

std::shared_ptr<EnclaveRuntime::Slot> EnclaveRuntime::find(std::uint64_t sid) {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(sid);
  return it == sessions_.end() ? nullptr : it->second;
}

void EnclaveRuntime::release(std::uint64_t sid) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(sid);
    if (it == sessions_.end()) return;
    slot = std::move(it->second);
    sessions_.erase(it);
  }
  std::lock_guard slot_lock(slot->mu);
  if (!slot->arena) return;
  {
    ArenaScope scope(*slot->arena);
    delete slot->state;
    slot->state = nullptr;
  }
  if (options_.before_erase) {
    const Bytes image = slot->arena->snapshot();
    options_.before_erase(image);
  }
  slot->arena->erase();
  std::lock_guard lock(mu_);
  pool_.push_back(std::move(slot->arena));
}

std::size_t EnclaveRuntime::live_sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::uint64_t EnclaveRuntime::verify_count() const noexcept {
  std::lock_guard lock(mu_);
  return verifies_;
}

Bytes EnclaveRuntime::dump_state() const {
  std::lock_guard lock(mu_);
  Bytes out;
  for (const Arena* a : all_arenas_) append(out, a->snapshot());
  return out;
}

EcallResult EnclaveRuntime::ecall(std::string_view entry, ByteView input, Host& host) {
  try {
    if (entry == kOpenSession) return open_session(input);
    if (entry == kFinishSession) return finish_session(input);
    if (entry == kVerify) return verify(input, host);
    if (entry == kCloseSession) return close_session(input);
  } catch (const ParseError&) {
    return EcallResult::abort(wire::AbortCode::kMalformed);
  }
  return EcallResult::abort(wire::AbortCode::kUnsupportedMode);
}

EcallResult EnclaveRuntime::open_session(ByteView input) {
  const auto in = OpenSessionIn::decode(input);
  auto slot = std::make_shared<Slot>();
  {
    std::lock_guard lock(mu_);
    if (sessions_.contains(in.sid)) return EcallResult::abort(wire::AbortCode::kBadSession);
    sessions_.emplace(in.sid, slot);
  }
  std::lock_guard slot_lock(slot->mu);
  slot->arena = take_arena();
  Bytes out;
  {
    ArenaScope scope(*slot->arena);
    auto* s = new Session(in.hello.nonce);
    slot->state = s;
    if (options_.program.attested) {
      s->report = sign_report(*options_.manufacturer, measurement_, s->dh.public_key());
    } else {
      s->report.measurement = measurement_;
      s->report.epk = s->dh.public_key();
    }
    out = to_host(s->report.encode());
  }
  return EcallResult::success(std::move(out));
}

EcallResult EnclaveRuntime::finish_session(ByteView input) {
  const auto in = FinishSessionIn::decode(input);
  auto slot = find(in.sid);
  if (!slot) return EcallResult::abort(wire::AbortCode::kBadSession);
  bool ok = false;
  {
    std::lock_guard slot_lock(slot->mu);
    if (slot->state == nullptr || slot->state->established) {
      return EcallResult::abort(wire::AbortCode::kBadSession);
    }
    ArenaScope scope(*slot->arena);
    Session& s = *slot->state;
    FixedBytes<32> shared = s.dh.agree(in.finish.client_epk);
    const SessionKeys keys =
        derive_session_keys(shared, s.nonce, measurement_, s.dh.public_key(), in.finish.client_epk);
    secure_zero(shared);
    const auto mac = finish_mac(keys.confirm, s.nonce, s.report, in.finish.client_epk);
    ok = ct_equal(mac, in.finish.mac);
    if (ok) {
      s.channel.emplace(keys.session, Direction::kToHolder);
      s.established = true;
    }
  }
  if (!ok) {
    release(in.sid);
    return EcallResult::abort(wire::AbortCode::kBadFinish);
  }
  return EcallResult::success({});
}

EcallResult EnclaveRuntime::verify(ByteView input, Host& host) {
  const auto in = VerifyIn::decode(input);
  auto slot = find(in.sid);
  if (!slot) return EcallResult::abort(wire::AbortCode::kBadSession);

  std::optional<wire::AbortCode> abort;
  Bytes out;
  {
    std::lock_guard slot_lock(slot->mu);
    if (slot->state == nullptr || !slot->state->established) {
      abort = wire::AbortCode::kBadSession;
    } else {
      ArenaScope scope(*slot->arena);
      Session& s = *slot->state;
      try {
        const auto t0 = Clock::now();
        wire::VerifyReq req;
        try {
          const Bytes plain = s.channel->open(wire::MsgType::kVerifyReq, in.sealed);
          req = wire::VerifyReq::decode(plain);
        } catch (const ParseError&) {
          throw VerifyAbort(wire::AbortCode::kMalformed);
        } catch (const Error&) {
          throw VerifyAbort(wire::AbortCode::kBadSession);
        }
        wire::EnclaveTimings timings;
        timings.receive_ns = elapsed_ns(t0);

        if (options_.fault) options_.fault("fetch");
        FetchResult token;
        {
          FetchResult outside;
          {
            HostScope h;
            outside = host.fetch(req.id);
          }
          token.status = outside.status;
          token.scheme = outside.scheme;
          token.share.assign(outside.share.begin(), outside.share.end());
          token.csec.assign(outside.csec.begin(), outside.csec.end());
          HostScope h;
          outside = FetchResult{};
        }

        VerifyStageTimes stage;
        const bool res = run_verify_program(options_.program, req, token, &stage, options_.fault);
        timings.reconstruct_ns = stage.reconstruct_ns;
        timings.detect_ns = stage.detect_ns;

        const wire::VerifyRes vr{static_cast<std::uint8_t>(res ? 1 : 0), timings};
        VerifyOut vo;
        if (in.disclose) vo.disclosed = res;
        vo.sealed = s.channel->seal(wire::MsgType::kVerifyRes, vr.encode());
        out = to_host(vo.encode());
      } catch (const VerifyAbort& e) {
        abort = e.code();
      } catch (const std::exception&) {
        abort = wire::AbortCode::kInternal;
      }
    }
  }
  release(in.sid);
  {
    std::lock_guard lock(mu_);
    ++verifies_;
  }
  if (abort) return EcallResult::abort(*abort);
  return EcallResult::success(std::move(out));
}

EcallResult EnclaveRuntime::close_session(ByteView input) {
  wire::Reader r(input);
  const std::uint64_t sid = r.u64();
  r.expect_end();
  release(sid);
  return EcallResult::success({});
}

}  // namespace pvwm::tee
