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

#include "pvwm/prover/host_support.hpp"

#include <algorithm>
#include <ctime>

#include "pvwm/common/error.hpp"

namespace pvwm::prover {

bool RateLimiter::allow(const crypto::AssetId& id, Clock::time_point now) {
  if (!enabled()) return true;
  std::lock_guard lock(mu_);
  auto [it, fresh] = buckets_.try_emplace(id, Bucket{limit_.burst, now});
  Bucket& b = it->second;
  if (!fresh) {
    const double dt = std::chrono::duration<double>(now - b.last).count();
    b.tokens = std::min(limit_.burst, b.tokens + dt * limit_.rate);
    b.last = now;
  }
  if (b.tokens < 1.0) return false;
  b.tokens -= 1.0;
  return true;
}

HostLog::HostLog(const std::string& path, std::size_t keep) : keep_(keep) {
  if (!path.empty()) {
    out_.open(path, std::ios::app);
    if (!out_) throw IoError("cannot open log " + path);
  }
}

void HostLog::write(const std::string& line) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  std::string full = std::string(stamp) + " " + line;
  std::lock_guard lock(mu_);
  if (out_.is_open()) {
    out_ << full << '\n';
    out_.flush();
  }
  recent_.push_back(std::move(full));
  if (recent_.size() > keep_) recent_.pop_front();
}

std::vector<std::string> HostLog::recent() const {
  std::lock_guard lock(mu_);
  return {recent_.begin(), recent_.end()};
}

}  // namespace pvwm::prover
