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

#include "json.hpp"

#include "pvwm/common/encoding.hpp"
#include "pvwm/freqywm/freqywm.hpp"

namespace pvwm::freqywm {

using nlohmann::json;

namespace {
json binding_json(const crypto::IdBinding& b) {
  return {{"owner", b.owner}, {"metadata", b.metadata}, {"date", b.date}};
}
}  // namespace

std::string secret_to_json(const FreqySecret& secret) {
  json pairs = json::array();
  for (const auto& p : secret.pairs) {
    pairs.push_back({to_base64(as_bytes(p.first)), to_base64(as_bytes(p.second))});
  }
  json j = {{"version", 1},
            {"K", to_base64(secret.key)},
            {"z", secret.modulus},
            {"pairs", std::move(pairs)},
            {"t", secret.tolerance}};
  if (secret.min_pairs) j["k"] = *secret.min_pairs;
  if (secret.binding) j["binding"] = binding_json(*secret.binding);
  return j.dump();
}

FreqySecret secret_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported secret version");
    FreqySecret s;
    const Bytes key = from_base64(j.at("K").get<std::string>());
    if (key.size() != s.key.size()) throw ParseError("secret key must be 32 bytes");
    std::copy(key.begin(), key.end(), s.key.begin());
    s.modulus = j.at("z").get<std::uint64_t>();
    if (s.modulus < 2) throw ParseError("secret modulus must be >= 2");
    for (const auto& p : j.at("pairs")) {
      if (!p.is_array() || p.size() != 2) throw ParseError("pair must have two tokens");
      const Bytes a = from_base64(p[0].get<std::string>());
      const Bytes b = from_base64(p[1].get<std::string>());
      s.pairs.push_back({std::string(as_chars(a)), std::string(as_chars(b))});
    }
    if (j.contains("t")) s.tolerance = j["t"].get<std::uint64_t>();
    if (j.contains("k")) s.min_pairs = j["k"].get<std::size_t>();
    if (j.contains("binding")) {
      const auto& b = j["binding"];
      s.binding = crypto::IdBinding{b.at("owner").get<std::string>(),
                                    b.at("metadata").get<std::string>(),
                                    b.at("date").get<std::string>()};
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed freqywm secret: ") + e.what());
  }
}

}  // namespace pvwm::freqywm
