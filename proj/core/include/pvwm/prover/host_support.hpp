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
#include <deque>
#include <fstream>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "pvwm/crypto/crypto.hpp"
#include "pvwm/prover/config.hpp"

namespace pvwm::prover {

// Token bucket per asset id. A zero rate disables limiting.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(RateLimit limit) : limit_(limit) {}
  bool enabled() const noexcept { return limit_.rate > 0.0; }
  bool allow(const crypto::AssetId& id) { return allow(id, Clock::now()); }
  bool allow(const crypto::AssetId& id, Clock::time_point now);

 private:
  struct Bucket {
    double tokens;
    Clock::time_point last;
  };
  RateLimit limit_;
  std::mutex mu_;
  std::unordered_map<crypto::AssetId, Bucket, crypto::AssetIdHash> buckets_;
};

// Untrusted host log. Lines carry only ids, byte counts and timings.
class HostLog {
 public:
  // Empty path: keep lines in memory only.
  explicit HostLog(const std::string& path = {}, std::size_t keep = 4096);
  void write(const std::string& line);
  std::vector<std::string> recent() const;

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::deque<std::string> recent_;
  std::size_t keep_;
};

}  // namespace pvwm::prover
