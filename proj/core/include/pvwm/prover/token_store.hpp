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
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "pvwm/wire/wire.hpp"

namespace pvwm::prover {

// tk_P as stored by the prover.
struct TokenRecord {
  crypto::AssetId id;
  wire::Scheme scheme = wire::Scheme::kFreqyWm;
  Bytes share;
  Bytes csec;
  friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

// Durable keyed store: an append-only log of
//   [u32 length][REGISTER body][16-byte truncated SHA-256 of body]
// replayed into an in-memory index on open. A torn or corrupt tail is
// truncated away. Reads run concurrently; writes are serialised and fsync'd.
class TokenStore {
 public:
  // Empty path: memory only.
  explicit TokenStore(std::string path = {});
  ~TokenStore();
  TokenStore(const TokenStore&) = delete;
  TokenStore& operator=(const TokenStore&) = delete;

  enum class PutResult : std::uint8_t { kStored, kDuplicate };
  // Throws IoError when the record cannot be made durable.
  PutResult put(const TokenRecord& record);
  std::optional<TokenRecord> get(const crypto::AssetId& id) const;
  std::size_t size() const;
  // Bytes dropped from a corrupt tail when the log was opened.
  std::uint64_t truncated_bytes() const noexcept { return truncated_; }

 private:
  void replay();

  std::string path_;
  int fd_ = -1;
  mutable std::shared_mutex mu_;
  std::unordered_map<crypto::AssetId, TokenRecord, crypto::AssetIdHash> index_;
  std::uint64_t truncated_ = 0;
};

}  // namespace pvwm::prover
