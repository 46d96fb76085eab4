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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include "pvwm/crypto/crypto.hpp"
#include "pvwm/tee/attestation.hpp"
#include "pvwm/tee/enclave_heap.hpp"
#include "pvwm/tee/tokens.hpp"
#include "pvwm/wire/wire.hpp"

namespace pvwm::tee {

// Entry point names.
inline constexpr std::string_view kOpenSession = "open_session";
inline constexpr std::string_view kFinishSession = "finish_session";
inline constexpr std::string_view kVerify = "verify";
inline constexpr std::string_view kCloseSession = "close_session";

// Reply to the FETCH ocall.
struct FetchResult {
  enum class Status : std::uint8_t { kFound = 0, kUnknown = 1, kRateLimited = 2 };
  Status status = Status::kUnknown;
  wire::Scheme scheme = wire::Scheme::kFreqyWm;
  Bytes share;
  Bytes csec;

  Bytes encode() const;
  static FetchResult decode(ByteView data);
};

// Untrusted services the enclave may call out to.
class Host {
 public:
  virtual ~Host() = default;
  virtual FetchResult fetch(const crypto::AssetId& id) = 0;
};

// [u8 status][payload] on success, [u8 1][u8 abort code] on abort.
struct EcallResult {
  bool ok = true;
  wire::AbortCode code = wire::AbortCode::kInternal;
  Bytes payload;

  static EcallResult success(Bytes payload) { return {true, wire::AbortCode::kInternal, std::move(payload)}; }
  static EcallResult abort(wire::AbortCode code) { return {false, code, {}}; }
  Bytes encode() const;
  static EcallResult decode(ByteView data);
};

// Entry inputs and outputs.
struct OpenSessionIn {
  std::uint64_t sid = 0;
  wire::RaHello hello;
  Bytes encode() const;
  static OpenSessionIn decode(ByteView data);
};

struct FinishSessionIn {
  std::uint64_t sid = 0;
  wire::RaFinish finish;
  Bytes encode() const;
  static FinishSessionIn decode(ByteView data);
};

struct VerifyIn {
  std::uint64_t sid = 0;
  bool disclose = false;  // reveal res to the host for memoisation
  Bytes sealed;           // sealed VERIFY_REQ payload
  Bytes encode() const;
  static VerifyIn decode(ByteView data);
};

struct VerifyOut {
  std::optional<bool> disclosed;
  Bytes sealed;  // sealed VERIFY_RES payload
  Bytes encode() const;
  static VerifyOut decode(ByteView data);
};

struct RuntimeOptions {
  ProgramConfig program;
  // Required when program.attested is set.
  std::optional<crypto::SigningKeypair> manufacturer;
  std::size_t arena_size = Arena::kDefaultSize;
  // Test hooks. `fault` runs at named stages ("fetch", "reconstruct",
  // "detect") and may throw; `before_erase` sees the session arena just
  // before it is wiped.
  std::function<void(std::string_view stage)> fault;
  std::function<void(ByteView arena)> before_erase;
};

// The enclave program: registered entries, per-session state held in a
// private arena, erase on completion.
class EnclaveRuntime {
 public:
  explicit EnclaveRuntime(RuntimeOptions options);
  ~EnclaveRuntime();
  EnclaveRuntime(const EnclaveRuntime&) = delete;
  EnclaveRuntime& operator=(const EnclaveRuntime&) = delete;

  // Dispatches to a registered entry. Unknown names abort.
  EcallResult ecall(std::string_view entry, ByteView input, Host& host);

  const crypto::Digest& measurement() const noexcept { return measurement_; }
  std::size_t live_sessions() const;
  // Everything any session arena has ever held (residue probe).
  Bytes dump_state() const;
  // Number of completed verify entries (instrumentation).
  std::uint64_t verify_count() const noexcept;

 private:
  struct Session;
  struct Slot;

  EcallResult open_session(ByteView input);
  EcallResult finish_session(ByteView input);
  EcallResult verify(ByteView input, Host& host);
  EcallResult close_session(ByteView input);

  std::shared_ptr<Slot> find(std::uint64_t sid);
  void release(std::uint64_t sid);
  std::unique_ptr<Arena> take_arena();

  RuntimeOptions options_;
  crypto::Digest measurement_{};
  mutable std::mutex mu_;
  std::map<std::uint64_t, std::shared_ptr<Slot>> sessions_;
  std::vector<std::unique_ptr<Arena>> pool_;
  std::vector<const Arena*> all_arenas_;
  std::uint64_t verifies_ = 0;
};

// Runs the verify logic on already-opened inputs. Exposed for benchmarks;
// returns the detection bit or throws VerifyAbort.
class VerifyAbort : public Error {
 public:
  explicit VerifyAbort(wire::AbortCode code);
  wire::AbortCode code() const noexcept { return code_; }

 private:
  wire::AbortCode code_;
};

struct VerifyStageTimes {
  std::uint64_t reconstruct_ns = 0;
  std::uint64_t detect_ns = 0;
};

bool run_verify_program(const ProgramConfig& program, const wire::VerifyReq& req,
                        const FetchResult& token, VerifyStageTimes* times = nullptr,
                        const std::function<void(std::string_view)>& fault = {});

}  // namespace pvwm::tee
