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

#include "pvwm/cache/cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"

namespace pvwm::cache {

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<std::uint64_t> minhash_signature(std::span<const std::string> dataset,
                                             const MinHashConfig& config) {
  if (config.num_perm == 0) throw InvalidArgument("num_perm must be >= 1");
  std::vector<std::uint64_t> sig(config.num_perm, std::numeric_limits<std::uint64_t>::max());
  std::vector<std::uint64_t> salts(config.num_perm);
  for (std::size_t i = 0; i < config.num_perm; ++i) salts[i] = mix64(config.seed + i);

  std::unordered_set<std::string_view> seen;
  seen.reserve(dataset.size());
  for (const auto& token : dataset) {
    if (!seen.insert(token).second) continue;
    const std::uint64_t base = fnv1a(token);
    for (std::size_t i = 0; i < config.num_perm; ++i) {
      sig[i] = std::min(sig[i], mix64(base ^ salts[i]));
    }
  }
  return sig;
}

PHashValue minhash(std::span<const std::string> dataset, const MinHashConfig& config) {
  if (config.band_rows == 0 || config.band_rows > config.num_perm) {
    throw InvalidArgument("band_rows must be in [1, num_perm]");
  }
  if (dataset.empty()) return PHashValue{};
  const auto sig = minhash_signature(dataset, config);
  Bytes band;
  band.reserve(config.band_rows * 8);
  for (std::size_t i = 0; i < config.band_rows; ++i) put_u64(band, sig[i]);
  return crypto::sha256(band);
}

double jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  const std::unordered_set<std::string_view> sa(a.begin(), a.end());
  const std::unordered_set<std::string_view> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 100.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t position(bool res, double sim, std::size_t capacity) {
  if (capacity == 0) throw InvalidArgument("capacity must be >= 1");
  if (!(sim >= 0.0 && sim <= 100.0)) throw InvalidArgument("similarity must be in [0, 100]");
  const double scaled = static_cast<double>(capacity - 1) * sim / 100.0;
  const double f = res ? scaled : static_cast<double>(capacity) - scaled;
  const double hi = static_cast<double>(capacity - 1);
  return static_cast<std::size_t>(std::clamp(std::floor(f), 0.0, hi));
}

bool serves(ServeRule rule, bool res_r, double sim_r, double sim_query) noexcept {
  if (rule == ServeRule::literal) {
    return res_r ? sim_r >= sim_query : sim_r <= sim_query;
  }
  return res_r ? sim_r <= sim_query : sim_r >= sim_query;
}

ProportionalCache::ProportionalCache(std::size_t capacity, double t_cache, ServeRule rule)
    : capacity_(capacity), t_cache_(t_cache), rule_(rule) {
  if (capacity == 0) throw InvalidArgument("capacity must be >= 1");
  entries_.reserve(capacity);
}

std::size_t ProportionalCache::index_of(const PHashValue& h, const crypto::AssetId& id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id && entries_[i].h == h) return i;
  }
  return entries_.size();
}

const CacheEntry* ProportionalCache::find(const PHashValue& h, const crypto::AssetId& id) const {
  const std::size_t i = index_of(h, id);
  return i == entries_.size() ? nullptr : &entries_[i];
}

void ProportionalCache::place(CacheEntry entry) {
  const std::size_t pos = std::min(position(entry.res, entry.sim, capacity_), entries_.size());
  entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(entry));
}

std::optional<bool> ProportionalCache::get(const PHashValue& h, const crypto::AssetId& id,
                                           double sim_query) {
  const std::size_t i = index_of(h, id);
  if (i == entries_.size()) return std::nullopt;
  if (!serves(rule_, entries_[i].res, entries_[i].sim, sim_query)) return std::nullopt;
  CacheEntry hit = entries_[i];
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
  place(hit);
  return hit.res;
}

std::optional<CacheEntry> ProportionalCache::put(const CacheEntry& entry) {
  if (entry.sim < t_cache_) return std::nullopt;
  const std::size_t i = index_of(entry.h, entry.id);
  if (i != entries_.size()) {
    const double old_sim = entries_[i].sim;
    const bool replace = entry.res ? entry.sim < old_sim : entry.sim > old_sim;
    if (replace) {
      entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
      place(entry);
    }
    return std::nullopt;
  }
  std::optional<CacheEntry> evicted;
  if (entries_.size() == capacity_) {
    evicted = entries_.back();
    entries_.pop_back();
  }
  place(entry);
  return evicted;
}

std::string ProportionalCache::snapshot_csv() const {
  std::ostringstream out;
  out << "h_hex,id_hex,res,sim,position\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    out << to_hex(e.h) << ',' << to_hex(e.id.digest) << ',' << (e.res ? 1 : 0) << ','
        << e.sim << ',' << i << '\n';
  }
  return out.str();
}

LruCache::LruCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("capacity must be >= 1");
}

std::optional<bool> LruCache::get(const PHashValue& h, const crypto::AssetId& id, double sim) {
  const auto it = index_.find(Key{h, id, sim});
  if (it == index_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->res;
}

std::optional<CacheEntry> LruCache::put(const CacheEntry& entry) {
  const Key key = key_of(entry);
  if (const auto it = index_.find(key); it != index_.end()) {
    it->second->res = entry.res;
    order_.splice(order_.begin(), order_, it->second);
    return std::nullopt;
  }
  std::optional<CacheEntry> evicted;
  if (order_.size() == capacity_) {
    evicted = order_.back();
    index_.erase(key_of(order_.back()));
    order_.pop_back();
  }
  order_.push_front(entry);
  index_.emplace(key, order_.begin());
  return evicted;
}

}  // namespace pvwm::cache
