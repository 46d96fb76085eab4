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
#include <list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/crypto/crypto.hpp"

namespace pvwm::cache {

// Bucket key of a MinHash signature.
using PHashValue = FixedBytes<32>;

struct MinHashConfig {
  std::size_t num_perm = 128;
  // Rows of the first band hashed into the bucket key.
  std::size_t band_rows = 1;
  std::uint64_t seed = 0x5eed'0f'a5'5e'75ULL;
};

// Per-permutation minimum over the token set. Empty input yields all-ones.
std::vector<std::uint64_t> minhash_signature(std::span<const std::string> dataset,
                                             const MinHashConfig& config = {});
// SHA-256 over the first band of the signature. Empty input yields all-zero.
PHashValue minhash(std::span<const std::string> dataset, const MinHashConfig& config = {});

// 100 * |A n B| / |A u B| over token sets; 100 when both are empty.
double jaccard(std::span<const std::string> a, std::span<const std::string> b);

// floor(f_res(sim)) clamped to [0, c-1], with
//   f_1(sim) = (c-1) * sim / 100 and f_0(sim) = c - (c-1) * sim / 100.
std::size_t position(bool res, double sim, std::size_t capacity);

struct CacheEntry {
  PHashValue h{};
  crypto::AssetId id;
  bool res = false;
  double sim = 0.0;
  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

enum class ServeRule : std::uint8_t {
  // res=1 served when sim_r >= sim', res=0 when sim_r <= sim'.
  literal,
  // res=1 served when sim_r <= sim', res=0 when sim_r >= sim'.
  intuitive,
};

bool serves(ServeRule rule, bool res_r, double sim_r, double sim_query) noexcept;

// Entries ordered head (index 0, most protected) to tail (next evicted).
// Not synchronised; callers serialise access.
class ProportionalCache {
 public:
  ProportionalCache(std::size_t capacity, double t_cache, ServeRule rule = ServeRule::literal);

  // On a served hit the entry moves to position(res_r, sim_r, c).
  std::optional<bool> get(const PHashValue& h, const crypto::AssetId& id, double sim_query);
  // Returns the evicted tail entry when a full cache admits a new key.
  std::optional<CacheEntry> put(const CacheEntry& entry);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  double threshold() const noexcept { return t_cache_; }
  const std::vector<CacheEntry>& entries() const noexcept { return entries_; }
  const CacheEntry* find(const PHashValue& h, const crypto::AssetId& id) const;

  // CSV "h_hex,id_hex,res,sim,position".
  std::string snapshot_csv() const;

 private:
  std::size_t index_of(const PHashValue& h, const crypto::AssetId& id) const;
  void place(CacheEntry entry);

  std::size_t capacity_;
  double t_cache_;
  ServeRule rule_;
  std::vector<CacheEntry> entries_;
};

// Classic LRU keyed on the full (h, id, sim) triple.
class LruCache {
 public:
  explicit LruCache(std::size_t capacity);

  std::optional<bool> get(const PHashValue& h, const crypto::AssetId& id, double sim);
  std::optional<CacheEntry> put(const CacheEntry& entry);

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  using Key = std::tuple<PHashValue, crypto::AssetId, double>;
  static Key key_of(const CacheEntry& e) { return {e.h, e.id, e.sim}; }

  std::size_t capacity_;
  std::list<CacheEntry> order_;
  std::map<Key, std::list<CacheEntry>::iterator> index_;
};

}  // namespace pvwm::cache
