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
#include <optional>
#include <string>
#include <string_view>

#include "pvwm/cache/cache.hpp"
#include "pvwm/crypto/crypto.hpp"
#include "pvwm/net/net.hpp"
#include "pvwm/tee/tokens.hpp"

namespace pvwm::prover {

enum class ServiceMode : std::uint8_t { kTee, kTeeDirect, kTwoPc, kPlain };

const char* mode_name(ServiceMode mode) noexcept;
ServiceMode parse_mode(std::string_view text);

// Enclave program configuration implied by a service mode. Not meaningful
// for kTwoPc.
tee::ProgramConfig program_for(ServiceMode mode, bool check_idgen);

enum class EnclaveKind : std::uint8_t { kProcess, kInline };

struct RateLimit {
  double rate = 0.0;   // verifications per second per id; 0 disables
  double burst = 1.0;
};

struct ServiceConfig {
  net::Endpoint listen{"127.0.0.1", 7400};
  ServiceMode mode = ServiceMode::kTee;
  std::size_t cache_capacity = 100;  // 0 disables the memoisation front-end
  double cache_threshold = 70.0;
  cache::ServeRule serve_rule = cache::ServeRule::literal;
  std::string manufacturer_key;  // signing key file, read by the enclave
  std::string store;             // token log path; empty keeps tokens in memory
  std::optional<FixedBytes<32>> owner_psk;
  bool check_idgen = true;
  EnclaveKind enclave = EnclaveKind::kProcess;
  std::size_t arena_mb = 64;
  RateLimit rate_limit;
  std::string log;  // host log path; empty logs to memory only
};

// Reads a JSON config. `PVWM_MODE`, when set, overrides the mode.
ServiceConfig load_config(const std::string& path);
ServiceConfig parse_config(std::string_view json);
void apply_env(ServiceConfig& config);

}  // namespace pvwm::prover
