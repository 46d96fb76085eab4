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
#include "pvwm/obt/obt.hpp"

namespace pvwm::obt {

using nlohmann::json;

std::string secret_to_json(const ObtSecret& secret) {
  std::string bits;
  bits.reserve(secret.wm.size());
  for (bool b : secret.wm) bits += b ? '1' : '0';
  json j = {{"version", 1},
            {"K", to_base64(secret.key)},
            {"num_partitions", secret.num_partitions},
            {"wm", bits},
            {"delta", secret.delta}};
  if (secret.vote_threshold) j["vote"] = *secret.vote_threshold;
  if (secret.binding) {
    j["binding"] = {{"owner", secret.binding->owner},
                    {"metadata", secret.binding->metadata},
                    {"date", secret.binding->date}};
  }
  return j.dump();
}

ObtSecret secret_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported secret version");
    ObtSecret s;
    const Bytes key = from_base64(j.at("K").get<std::string>());
    if (key.size() != s.key.size()) throw ParseError("secret key must be 32 bytes");
    std::copy(key.begin(), key.end(), s.key.begin());
    s.num_partitions = j.at("num_partitions").get<std::size_t>();
    const auto bits = j.at("wm").get<std::string>();
    if (s.num_partitions == 0 || bits.size() != s.num_partitions) {
      throw ParseError("wm length must equal num_partitions");
    }
    for (char c : bits) {
      if (c != '0' && c != '1') throw ParseError("wm must be a bit string");
      s.wm.push_back(c == '1');
    }
    s.delta = j.at("delta").get<double>();
    if (j.contains("vote")) s.vote_threshold = j["vote"].get<double>();
    if (j.contains("binding")) {
      const auto& b = j["binding"];
      s.binding = crypto::IdBinding{b.at("owner").get<std::string>(),
                                    b.at("metadata").get<std::string>(),
                                    b.at("date").get<std::string>()};
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed obt secret: ") + e.what());
  }
}

}  // namespace pvwm::obt
