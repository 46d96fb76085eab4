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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "pvwm/common/error.hpp"
#include "pvwm/harness/harness.hpp"

namespace pvwm::harness {

const char* policy_name(Policy p) noexcept {
  switch (p) {
    case Policy::kLruBase: return "LRU-Base";
    case Policy::kLruBaseR: return "LRU-Base-R";
    case Policy::kLruProp: return "LRU-Prop";
  }
  return "unknown";
}

Policy parse_policy(std::string_view text) {
  if (text == "LRU-Base") return Policy::kLruBase;
  if (text == "LRU-Base-R") return Policy::kLruBaseR;
  if (text == "LRU-Prop") return Policy::kLruProp;
  throw InvalidArgument("unknown policy '" + std::string(text) + "'");
}

namespace {

std::vector<cache::CacheEntry> make_pairs(std::mt19937_64& rng, const CacheExperimentConfig& c) {
  std::uniform_int_distribution<int> admissible(static_cast<int>(std::ceil(c.t_cache)), 100);
  std::bernoulli_distribution coin(0.5);
  std::vector<cache::CacheEntry> out(c.pairs);
  for (auto& e : out) {
    for (auto& b : e.h) b = static_cast<std::uint8_t>(rng());
    for (auto& b : e.id.digest) b = static_cast<std::uint8_t>(rng());
    e.res = coin(rng);
    e.sim = admissible(rng);
  }
  return out;
}

}  // namespace

double run_cache_trial(Policy policy, std::size_t capacity, const CacheExperimentConfig& c,
                       std::uint64_t trial_seed) {
  if (capacity == 0) throw InvalidArgument("capacity must be >= 1");
  std::mt19937_64 rng(trial_seed);
  const auto pairs = make_pairs(rng, c);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::uniform_int_distribution<int> any_sim(0, 100);

  cache::LruCache lru(capacity);
  cache::ProportionalCache prop(capacity, c.t_cache, c.rule);
  for (const auto& e : pairs) {
    if (policy == Policy::kLruProp) {
      prop.put(e);
    } else {
      lru.put(e);
    }
  }

  std::size_t hits = 0;
  for (std::size_t r = 0; r < c.requests; ++r) {
    const cache::CacheEntry& base = pairs[pick(rng)];
    double sim = base.sim;
    if (policy != Policy::kLruBase) sim = any_sim(rng);
    std::optional<bool> got;
    if (policy == Policy::kLruProp) {
      got = prop.get(base.h, base.id, sim);
    } else {
      got = lru.get(base.h, base.id, sim);
    }
    if (got) {
      ++hits;
    } else if (c.admit_on_miss) {
      cache::CacheEntry fresh = base;
      fresh.sim = sim;
      if (policy == Policy::kLruProp) {
        prop.put(fresh);
      } else {
        lru.put(fresh);
      }
    }
  }
  return c.requests == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(c.requests);
}

CacheResults run_cache_experiment(const CacheExperimentConfig& c, const std::vector<Policy>& policies) {
  CacheResults out;
  for (const Policy p : policies) {
    for (const std::size_t cap : c.capacities) {
      CacheCell cell;
      cell.policy = p;
      cell.capacity = cap;
      cell.min_hr = 1.0;
      double sum = 0.0;
      for (std::size_t t = 0; t < c.trials; ++t) {
        // Policies see the same workload for a given trial.
        const double hr = run_cache_trial(p, cap, c, c.seed * 1'000'003ULL + t);
        sum += hr;
        cell.min_hr = std::min(cell.min_hr, hr);
        cell.max_hr = std::max(cell.max_hr, hr);
      }
      cell.mean_hr = c.trials == 0 ? 0.0 : sum / static_cast<double>(c.trials);
      if (c.trials == 0) cell.min_hr = 0.0;
      out.cells.push_back(cell);
    }
  }
  return out;
}

double CacheResults::mean_hr(Policy p) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : cells) {
    if (c.policy != p) continue;
    sum += c.mean_hr;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

const CacheCell* CacheResults::find(Policy p, std::size_t capacity) const {
  for (const auto& c : cells) {
    if (c.policy == p && c.capacity == capacity) return &c;
  }
  return nullptr;
}

std::string CacheResults::to_csv() const {
  std::ostringstream os;
  os << "policy,capacity,mean_hr,min_hr,max_hr\n";
  char buf[128];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f\n", policy_name(c.policy), c.capacity,
                  c.mean_hr, c.min_hr, c.max_hr);
    os << buf;
  }
  return os.str();
}

}  // namespace pvwm::harness
