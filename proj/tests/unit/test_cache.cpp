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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pvwm/cache/cache.hpp"
#include "pvwm/common/error.hpp"

using namespace pvwm;
using namespace pvwm::cache;

namespace {

// Integer-only evaluation of the position law for integer sim.
std::size_t position_oracle(bool res, std::uint64_t sim, std::uint64_t c) {
  const std::uint64_t num = (c - 1) * sim;
  std::int64_t f;
  if (res) {
    f = static_cast<std::int64_t>(num / 100);
  } else {
    f = static_cast<std::int64_t>(c) - static_cast<std::int64_t>((num + 99) / 100);
  }
  return static_cast<std::size_t>(std::clamp<std::int64_t>(f, 0, static_cast<std::int64_t>(c) - 1));
}

std::vector<std::string> tokens(int from, int to) {
  std::vector<std::string> out;
  for (int i = from; i < to; ++i) out.push_back("t" + std::to_string(i));
  return out;
}

PHashValue hv(std::uint8_t v) {
  PHashValue h{};
  h[0] = v;
  return h;
}

crypto::AssetId idv(std::uint8_t v) {
  crypto::AssetId id;
  id.digest[0] = v;
  return id;
}

// Straightforward model of the proportional cache.
class ModelCache {
 public:
  ModelCache(std::size_t c, double t, ServeRule rule) : c_(c), t_(t), rule_(rule) {}

  std::optional<bool> get(const PHashValue& h, const crypto::AssetId& id, double q) {
    auto it = find(h, id);
    if (it == v_.end()) return std::nullopt;
    const bool ok = rule_ == ServeRule::literal
                        ? (it->res ? it->sim >= q : it->sim <= q)
                        : (it->res ? it->sim <= q : it->sim >= q);
    if (!ok) return std::nullopt;
    CacheEntry e = *it;
    v_.erase(it);
    insert_at(e);
    return e.res;
  }

  void put(const CacheEntry& e) {
    if (e.sim < t_) return;
    auto it = find(e.h, e.id);
    if (it != v_.end()) {
      if ((e.res && e.sim < it->sim) || (!e.res && e.sim > it->sim)) {
        v_.erase(it);
        insert_at(e);
      }
      return;
    }
    if (v_.size() == c_) v_.pop_back();
    insert_at(e);
  }

  const std::vector<CacheEntry>& entries() const { return v_; }

 private:
  std::vector<CacheEntry>::iterator find(const PHashValue& h, const crypto::AssetId& id) {
    return std::find_if(v_.begin(), v_.end(),
                        [&](const CacheEntry& x) { return x.h == h && x.id == id; });
  }
  void insert_at(const CacheEntry& e) {
    double f = static_cast<double>(c_ - 1) * e.sim / 100.0;
    if (!e.res) f = static_cast<double>(c_) - f;
    auto p = static_cast<std::size_t>(std::clamp(std::floor(f), 0.0, double(c_ - 1)));
    p = std::min(p, v_.size());
    v_.insert(v_.begin() + static_cast<std::ptrdiff_t>(p), e);
  }

  std::size_t c_;
  double t_;
  ServeRule rule_;
  std::vector<CacheEntry> v_;
};

}  // namespace

TEST(Position, DocumentedExamples) {
  EXPECT_EQ(position(true, 98, 100), 97u);
  EXPECT_EQ(position(true, 98.5, 100), 97u);
  EXPECT_EQ(position(true, 98, 100), position(true, 98.5, 100));
  EXPECT_EQ(position(true, 0, 100), 0u);
  EXPECT_EQ(position(false, 100, 100), 1u);
  EXPECT_EQ(position(false, 0, 100), 99u);
}

TEST(Position, ExhaustiveSweepMatchesIntegerOracle) {
  std::size_t violations = 0;
  for (std::uint64_t c = 1; c <= 256; ++c) {
    for (std::uint64_t sim = 0; sim <= 100; ++sim) {
      for (bool res : {false, true}) {
        const auto got = position(res, static_cast<double>(sim), c);
        violations += got != position_oracle(res, sim, c);
        violations += got >= c;
      }
    }
  }
  EXPECT_EQ(violations, 0u);
}

TEST(Position, BoundaryAndMonotoneLaws) {
  for (std::size_t c = 2; c <= 256; ++c) {
    EXPECT_EQ(position(true, 0, c), 0u);
    EXPECT_EQ(position(true, 100, c), c - 1);
    EXPECT_LE(position(false, 100, c), position(false, 0, c));
    for (int sim = 1; sim <= 100; ++sim) {
      ASSERT_GE(position(true, sim, c), position(true, sim - 1, c));
      ASSERT_LE(position(false, sim, c), position(false, sim - 1, c));
    }
  }
}

TEST(Position, RejectsOutOfRange) {
  EXPECT_THROW(position(true, 50, 0), InvalidArgument);
  EXPECT_THROW(position(true, -1, 10), InvalidArgument);
  EXPECT_THROW(position(true, 100.5, 10), InvalidArgument);
  EXPECT_THROW(position(true, std::nan(""), 10), InvalidArgument);
}

TEST(Jaccard, Examples) {
  const std::vector<std::string> abc{"a", "b", "c"};
  const std::vector<std::string> bcd{"b", "c", "d"};
  EXPECT_DOUBLE_EQ(jaccard(abc, bcd), 50.0);
  EXPECT_DOUBLE_EQ(jaccard(abc, abc), 100.0);
  EXPECT_DOUBLE_EQ(jaccard(abc, std::vector<std::string>{"x"}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(std::vector<std::string>{}, std::vector<std::string>{}), 100.0);
  EXPECT_DOUBLE_EQ(jaccard(std::vector<std::string>{"a", "a", "b"}, abc), jaccard(abc, abc) * 2 / 3);
}

TEST(Jaccard, SymmetricProperty) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = tokens(0, 1 + rng() % 50);
    const auto b = tokens(rng() % 30, 30 + rng() % 50);
    ASSERT_DOUBLE_EQ(jaccard(a, b), jaccard(b, a));
  }
}

TEST(MinHash, IdenticalAndEmpty) {
  const auto d = tokens(0, 100);
  EXPECT_EQ(minhash(d), minhash(d));
  auto shuffled = d;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(2));
  EXPECT_EQ(minhash(d), minhash(shuffled));
  EXPECT_EQ(minhash(std::vector<std::string>{}), PHashValue{});
  MinHashConfig bad;
  bad.band_rows = 0;
  EXPECT_THROW(minhash(d, bad), InvalidArgument);
  bad.band_rows = 1;
  bad.num_perm = 0;
  EXPECT_THROW(minhash_signature(d, bad), InvalidArgument);
}

TEST(MinHash, BucketCollisionTracksBandingFormula) {
  // Sets of 400 sharing 390: Jaccard 390/410 ~ 0.951.
  const auto a = tokens(0, 400);
  const auto b = tokens(10, 410);
  const double j = jaccard(a, b) / 100.0;
  const auto c = tokens(1000, 1400);
  constexpr int kTrials = 100;
  for (std::size_t rows : {std::size_t{1}, std::size_t{2}}) {
    int similar = 0;
    int disjoint = 0;
    for (int t = 0; t < kTrials; ++t) {
      MinHashConfig cfg;
      cfg.seed = 1000 + t;
      cfg.band_rows = rows;
      similar += minhash(a, cfg) == minhash(b, cfg);
      disjoint += minhash(a, cfg) == minhash(c, cfg);
    }
    // Expected rate J^rows; allow 4 binomial standard deviations.
    const double p = std::pow(j, static_cast<double>(rows));
    const double sd = std::sqrt(p * (1 - p) / kTrials);
    EXPECT_NEAR(similar / double(kTrials), p, 4 * sd + 0.01) << rows;
    EXPECT_LE(disjoint, kTrials / 20);
  }
}

TEST(MinHash, DefaultBandingMeetsNinetyPercent) {
  const auto a = tokens(0, 400);
  const auto b = tokens(10, 410);
  int equal = 0;
  for (int t = 0; t < 100; ++t) {
    MinHashConfig cfg;
    cfg.seed = 77 + t;
    equal += minhash(a, cfg) == minhash(b, cfg);
  }
  EXPECT_GE(equal, 90);
}

TEST(MinHash, SignatureEstimatesJaccard) {
  const auto a = tokens(0, 300);
  const auto b = tokens(100, 400);  // J = 0.5
  MinHashConfig cfg;
  cfg.num_perm = 512;
  const auto sa = minhash_signature(a, cfg);
  const auto sb = minhash_signature(b, cfg);
  int eq = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) eq += sa[i] == sb[i];
  EXPECT_NEAR(eq / 512.0, 0.5, 0.1);
}

TEST(Serve, ProtocolExamples) {
  ProportionalCache c(10, 0.0);
  c.put({hv(1), idv(1), true, 90});
  c.put({hv(2), idv(2), false, 60});
  c.put({hv(3), idv(3), true, 60});
  EXPECT_EQ(c.get(hv(1), idv(1), 80), std::optional<bool>(true));
  EXPECT_EQ(c.get(hv(2), idv(2), 70), std::optional<bool>(false));
  EXPECT_EQ(c.get(hv(3), idv(3), 70), std::nullopt);
  EXPECT_EQ(c.get(hv(9), idv(9), 70), std::nullopt);
}

TEST(Serve, PredicateTruthTable) {
  for (double r : {0.0, 50.0, 100.0}) {
    for (double q : {0.0, 50.0, 100.0}) {
      EXPECT_EQ(serves(ServeRule::literal, true, r, q), r >= q);
      EXPECT_EQ(serves(ServeRule::literal, false, r, q), r <= q);
      EXPECT_EQ(serves(ServeRule::intuitive, true, r, q), r <= q);
      EXPECT_EQ(serves(ServeRule::intuitive, false, r, q), r >= q);
    }
  }
}

TEST(Put, ThresholdAndDuplicates) {
  ProportionalCache c(4, 70.0);
  EXPECT_EQ(c.put({hv(1), idv(1), true, 69.9}), std::nullopt);
  EXPECT_EQ(c.size(), 0u);
  c.put({hv(1), idv(1), true, 80});
  c.put({hv(1), idv(1), true, 75});
  EXPECT_EQ(c.find(hv(1), idv(1))->sim, 75);
  c.put({hv(1), idv(1), true, 90});
  EXPECT_EQ(c.find(hv(1), idv(1))->sim, 75);
  c.put({hv(2), idv(2), false, 80});
  c.put({hv(2), idv(2), false, 90});
  EXPECT_EQ(c.find(hv(2), idv(2))->sim, 90);
  c.put({hv(2), idv(2), false, 85});
  EXPECT_EQ(c.find(hv(2), idv(2))->sim, 90);
  EXPECT_EQ(c.size(), 2u);
}

TEST(Put, FullCacheEvictsTail) {
  ProportionalCache c(3, 0.0);
  c.put({hv(1), idv(1), true, 0});    // head
  c.put({hv(2), idv(2), true, 100});  // tail
  c.put({hv(3), idv(3), true, 50});
  ASSERT_EQ(c.size(), 3u);
  const auto evicted = c.put({hv(4), idv(4), true, 40});
  ASSERT_TRUE(evicted);
  EXPECT_EQ(evicted->id, idv(2));
  EXPECT_EQ(c.size(), 3u);
  // floor(2 * 0.4) = 0: the new entry goes to the head.
  EXPECT_EQ(c.entries()[0].id, idv(4));
  EXPECT_EQ(c.entries()[1].id, idv(1));
  EXPECT_EQ(c.entries()[2].id, idv(3));
}

TEST(Put, SnapshotCsv) {
  ProportionalCache c(2, 0.0);
  c.put({hv(1), idv(2), false, 70});
  const std::string csv = c.snapshot_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "h_hex,id_hex,res,sim,position");
  EXPECT_NE(csv.find(",0,70,0\n"), std::string::npos);
}

TEST(ProportionalCacheProperty, StatefulAgainstModel) {
  std::mt19937_64 rng(3);
  for (int run = 0; run < 200; ++run) {
    const std::size_t cap = 1 + rng() % 12;
    const double t = static_cast<double>(rng() % 80);
    const ServeRule rule = run % 2 ? ServeRule::literal : ServeRule::intuitive;
    ProportionalCache real(cap, t, rule);
    ModelCache model(cap, t, rule);
    for (int op = 0; op < 300; ++op) {
      const auto k = static_cast<std::uint8_t>(rng() % 20);
      const double sim = static_cast<double>(rng() % 201) / 2.0;
      if (rng() % 2) {
        const CacheEntry e{hv(k), idv(k % 7), static_cast<bool>(rng() & 1), sim};
        real.put(e);
        model.put(e);
      } else {
        ASSERT_EQ(real.get(hv(k), idv(k % 7), sim), model.get(hv(k), idv(k % 7), sim));
      }
      ASSERT_LE(real.size(), cap);
      ASSERT_EQ(real.entries(), model.entries());
      std::set<std::pair<PHashValue, crypto::AssetId>> keys;
      for (const auto& e : real.entries()) keys.emplace(e.h, e.id);
      ASSERT_EQ(keys.size(), real.size());
    }
  }
}

TEST(ProportionalCacheProperty, GetOnlyServesWhenBranchHolds) {
  std::mt19937_64 rng(4);
  ProportionalCache c(50, 0.0);
  for (int i = 0; i < 50; ++i) {
    c.put({hv(static_cast<std::uint8_t>(i)), idv(0), static_cast<bool>(rng() & 1),
           static_cast<double>(rng() % 101)});
  }
  for (int i = 0; i < 20000; ++i) {
    const auto k = hv(static_cast<std::uint8_t>(rng() % 60));
    const double q = static_cast<double>(rng() % 101);
    const CacheEntry* e = c.find(k, idv(0));
    const std::optional<CacheEntry> before = e ? std::optional(*e) : std::nullopt;
    const auto got = c.get(k, idv(0), q);
    if (!before) {
      ASSERT_FALSE(got);
      continue;
    }
    const bool branch = before->res ? before->sim >= q : before->sim <= q;
    ASSERT_EQ(got.has_value(), branch);
    if (got) ASSERT_EQ(*got, before->res);
  }
}

TEST(Lru, Examples) {
  LruCache c(2);
  c.put({hv(1), idv(1), true, 80});
  EXPECT_EQ(c.get(hv(1), idv(1), 80), std::optional<bool>(true));
  EXPECT_EQ(c.get(hv(1), idv(1), 81), std::nullopt);

  LruCache one(1);
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    const auto k = static_cast<std::uint8_t>(i % 2);
    if (one.get(hv(k), idv(k), 50)) {
      ++hits;
    } else {
      one.put({hv(k), idv(k), true, 50});
    }
  }
  EXPECT_EQ(hits, 0);
}

TEST(Lru, EvictsLeastRecentlyUsed) {
  LruCache c(2);
  c.put({hv(1), idv(1), true, 1});
  c.put({hv(2), idv(2), true, 2});
  c.get(hv(1), idv(1), 1);
  const auto ev = c.put({hv(3), idv(3), false, 3});
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->id, idv(2));
  EXPECT_TRUE(c.get(hv(1), idv(1), 1));
  EXPECT_EQ(c.size(), 2u);
  EXPECT_THROW(LruCache(0), InvalidArgument);
}
