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

#include <filesystem>
#include <unordered_map>

#include "json.hpp"
#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"

namespace pvwm::client {

const char* scheme_name(wire::Scheme scheme) noexcept {
  switch (scheme) {
    case wire::Scheme::kFreqyWm: return "freqywm";
    case wire::Scheme::kObt: return "obt";
    case wire::Scheme::kFreqyWm2pc: return "freqywm-2pc";
  }
  return "unknown";
}

wire::Scheme parse_scheme(std::string_view text) {
  if (text == "freqywm") return wire::Scheme::kFreqyWm;
  if (text == "obt") return wire::Scheme::kObt;
  if (text == "freqywm-2pc") return wire::Scheme::kFreqyWm2pc;
  throw InvalidArgument("unknown scheme '" + std::string(text) + "'");
}

std::string Bundle::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["id"] = to_hex(id.digest);
  j["scheme"] = scheme_name(scheme);
  j["mode"] = prover::mode_name(mode);
  j["asset"] = asset;
  j["tk_h"] = to_base64(holder_token);
  j["prover"] = prover.str();
  j["measurement"] = to_hex(measurement);
  if (manufacturer) j["manufacturer"] = to_base64(*manufacturer);
  if (circuit) j["circuit"] = to_base64(circuit->encode());
  j["policy"] = policy;
  return j.dump(2) + "\n";
}

Bundle Bundle::from_json(std::string_view text) {
  Bundle b;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported bundle version");
    b.id.digest = fixed_from_hex<32>(j.at("id").get<std::string>());
    b.scheme = parse_scheme(j.at("scheme").get<std::string>());
    b.mode = prover::parse_mode(j.at("mode").get<std::string>());
    b.asset = j.at("asset").get<std::string>();
    b.holder_token = from_base64(j.at("tk_h").get<std::string>());
    b.prover = net::Endpoint::parse(j.at("prover").get<std::string>());
    b.measurement = fixed_from_hex<32>(j.at("measurement").get<std::string>());
    if (j.contains("manufacturer")) {
      const Bytes pk = from_base64(j.at("manufacturer").get<std::string>());
      if (pk.size() != 32) throw ParseError("manufacturer key must be 32 bytes");
      crypto::PublicKey key{};
      std::copy(pk.begin(), pk.end(), key.begin());
      b.manufacturer = key;
    }
    if (j.contains("circuit")) {
      b.circuit = gc::VerifyCircuitParams::decode(from_base64(j.at("circuit").get<std::string>()));
    }
    b.policy = j.value("policy", "");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  }
  if (b.scheme == wire::Scheme::kFreqyWm2pc) {
    if (b.mode != prover::ServiceMode::kTwoPc || !b.circuit) {
      throw ParseError("bundle: freqywm-2pc needs mode 2pc and circuit parameters");
    }
  } else if (b.mode == prover::ServiceMode::kTwoPc) {
    throw ParseError("bundle: mode 2pc needs scheme freqywm-2pc");
  }
  if ((b.mode == prover::ServiceMode::kTee || b.mode == prover::ServiceMode::kTeeDirect) &&
      !b.manufacturer) {
    throw ParseError("bundle: attested modes need a manufacturer key");
  }
  return b;
}

Bundle Bundle::load(const std::string& path) {
  const Bytes raw = read_file(path);
  return from_json(as_chars(raw));
}

std::vector<std::string> asset_tokens(wire::Scheme scheme, std::string_view asset) {
  std::vector<std::string> out = freqywm::parse_dataset(asset);
  if (scheme == wire::Scheme::kObt) {
    if (!out.empty()) out.erase(out.begin());  // header
    return out;
  }
  // k-th occurrence of a token becomes its own item, so set similarity
  // tracks frequencies.
  std::unordered_map<std::string, std::size_t> seen;
  seen.reserve(out.size());
  for (auto& t : out) {
    const std::size_t k = seen[t]++;
    t.push_back('\x1f');
    t += std::to_string(k);
  }
  return out;
}

}  // namespace pvwm::client
