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

#include "pvwm/prover/config.hpp"

#include <cstdlib>

#include "json.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"

namespace pvwm::prover {

const char* mode_name(ServiceMode mode) noexcept {
  switch (mode) {
    case ServiceMode::kTee: return "tee";
    case ServiceMode::kTeeDirect: return "tee-direct";
    case ServiceMode::kTwoPc: return "2pc";
    case ServiceMode::kPlain: return "plain";
  }
  return "unknown";
}

ServiceMode parse_mode(std::string_view text) {
  if (text == "tee") return ServiceMode::kTee;
  if (text == "tee-direct") return ServiceMode::kTeeDirect;
  if (text == "2pc") return ServiceMode::kTwoPc;
  if (text == "plain") return ServiceMode::kPlain;
  throw ParseError("unknown mode '" + std::string(text) + "'");
}

tee::ProgramConfig program_for(ServiceMode mode, bool check_idgen) {
  tee::ProgramConfig p;
  p.form = mode == ServiceMode::kTeeDirect ? tee::SecretForm::kDirect : tee::SecretForm::kEncrypted;
  p.attested = mode != ServiceMode::kPlain;
  p.check_idgen = check_idgen;
  return p;
}

ServiceConfig parse_config(std::string_view text) {
  using nlohmann::json;
  ServiceConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    if (j.contains("listen")) c.listen = net::Endpoint::parse(j.at("listen").get<std::string>());
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("cache_capacity")) c.cache_capacity = j.at("cache_capacity").get<std::size_t>();
    if (j.contains("cache_threshold")) c.cache_threshold = j.at("cache_threshold").get<double>();
    if (j.contains("serve_rule")) {
      const auto rule = j.at("serve_rule").get<std::string>();
      if (rule == "literal") {
        c.serve_rule = cache::ServeRule::literal;
      } else if (rule == "intuitive") {
        c.serve_rule = cache::ServeRule::intuitive;
      } else {
        throw ParseError("serve_rule must be literal or intuitive");
      }
    }
    if (j.contains("manufacturer_key")) c.manufacturer_key = j.at("manufacturer_key").get<std::string>();
    if (j.contains("store")) c.store = j.at("store").get<std::string>();
    if (j.contains("owner_psk")) c.owner_psk = fixed_from_hex<32>(j.at("owner_psk").get<std::string>());
    if (j.contains("check_idgen")) c.check_idgen = j.at("check_idgen").get<bool>();
    if (j.contains("enclave")) {
      const auto kind = j.at("enclave").get<std::string>();
      if (kind == "process") {
        c.enclave = EnclaveKind::kProcess;
      } else if (kind == "inline") {
        c.enclave = EnclaveKind::kInline;
      } else {
        throw ParseError("enclave must be process or inline");
      }
    }
    if (j.contains("arena_mb")) c.arena_mb = j.at("arena_mb").get<std::size_t>();
    if (j.contains("rate_limit")) {
      const auto& r = j.at("rate_limit");
      c.rate_limit.rate = r.value("rate", 0.0);
      c.rate_limit.burst = r.value("burst", 1.0);
    }
    if (j.contains("log")) c.log = j.at("log").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (c.cache_threshold < 0.0 || c.cache_threshold > 100.0) {
    throw ParseError("cache_threshold must be within [0, 100]");
  }
  if (c.arena_mb == 0) throw ParseError("arena_mb must be positive");
  return c;
}

void apply_env(ServiceConfig& config) {
  if (const char* m = std::getenv("PVWM_MODE"); m != nullptr && *m != '\0') {
    config.mode = parse_mode(m);
  }
}

ServiceConfig load_config(const std::string& path) {
  const Bytes raw = read_file(path);
  ServiceConfig c = parse_config(as_chars(raw));
  apply_env(c);
  return c;
}

}  // namespace pvwm::prover
