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

#include "pvwm/common/error.hpp"
#include "pvwm/data/synthetic.hpp"
#include "pvwm/freqywm/freqywm.hpp"

using namespace pvwm;
using namespace pvwm::freqywm;

namespace {

FixedBytes<32> counting_key() {
  FixedBytes<32> k{};
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = static_cast<std::uint8_t>(i);
  return k;
}

FixedBytes<32> random_key(std::mt19937_64& rng) {
  FixedBytes<32> k{};
  for (auto& b : k) b = static_cast<std::uint8_t>(rng());
  return k;
}

TokenDataset dataset(std::mt19937_64& rng, std::size_t distinct = 1000, std::size_t length = 20000) {
  data::ZipfOptions o;
  o.distinct = distinct;
  o.length = length;
  return data::zipf_dataset(rng, o);
}

InsertResult watermark(std::mt19937_64& rng, const TokenDataset& d, std::uint64_t t = 0) {
  InsertOptions io;
  io.tolerance = t;
  io.seed = rng();
  return insert(d, random_key(rng), io);
}

}  // namespace

// Reference values from an independent SHA-256 implementation.
TEST(PairSelector, GoldenValues) {
  const auto k = counting_key();
  EXPECT_EQ(pair_selector("apple", "banana", k, 257), 224u);
  EXPECT_EQ(pair_selector("banana", "apple", k, 257), 30u);
  EXPECT_EQ(pair_selector("tok1", "tok2", k, 17), 6u);
  // Residue 0 maps to z.
  EXPECT_EQ(pair_selector("x", "y", k, 2), 2u);
}

TEST(PairSelector, RangeIsOneToZAndUniform) {
  constexpr std::uint64_t z = 17;
  std::mt19937_64 rng(1);
  const auto k = random_key(rng);
  std::vector<std::uint64_t> counts(z + 1, 0);
  constexpr int kDraws = 17000;
  for (int i = 0; i < kDraws; ++i) {
    const auto s = pair_selector("a" + std::to_string(i), "b" + std::to_string(rng()), k, z);
    ASSERT_GE(s, 1u);
    ASSERT_LE(s, z);
    ++counts[s];
  }
  EXPECT_EQ(counts[0], 0u);
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / z;
  for (std::uint64_t v = 1; v <= z; ++v) {
    const double d = static_cast<double>(counts[v]) - expected;
    chi2 += d * d / expected;
  }
  EXPECT_LT(chi2, 39.25);  // chi-square, 16 dof, alpha 0.001
}

TEST(PairSelector, RejectsDegenerateModulus) {
  EXPECT_THROW(pair_selector("a", "b", counting_key(), 1), InvalidArgument);
}

TEST(ModularDifference, MatchesSignedOracle) {
  for (std::int64_t fi = 0; fi < 60; ++fi) {
    for (std::int64_t fj = 0; fj < 60; ++fj) {
      for (std::int64_t s = 1; s < 20; ++s) {
        const std::int64_t want = ((fi - fj) % s + s) % s;
        ASSERT_EQ(modular_difference(fi, fj, s), static_cast<std::uint64_t>(want));
      }
    }
  }
  EXPECT_THROW(modular_difference(1, 2, 0), InvalidArgument);
}

TEST(Preprocess, CountsOccurrences) {
  const TokenDataset d{"a", "b", "a", "c", "a"};
  const auto h = preprocess(d);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(h.at("a"), 3u);
  EXPECT_EQ(h.at("c"), 1u);
}

TEST(DefaultParams, SixtyPercentRoundedUp) {
  EXPECT_EQ(default_min_pairs(30), 18u);
  EXPECT_EQ(default_min_pairs(8), 5u);
  EXPECT_EQ(default_min_pairs(1), 1u);
  FreqySecret s;
  s.pairs.resize(10);
  s.tolerance = 2;
  EXPECT_EQ(default_params(s).min_pairs, 6u);
  EXPECT_EQ(default_params(s).tolerance, 2u);
  s.min_pairs = 9;
  EXPECT_EQ(default_params(s).min_pairs, 9u);
}

TEST(Detect, HandBuiltHistogram) {
  FreqySecret s;
  s.key = counting_key();
  s.modulus = 257;
  s.pairs = {{"apple", "banana"}};
  TokenHistogram h{{"apple", 224 + 5}, {"banana", 5}};
  EXPECT_EQ(detect_count(h, s, 0), 1u);
  h["banana"] = 6;
  EXPECT_EQ(detect_count(h, s, 0), 0u);
  EXPECT_EQ(detect_count(h, s, 256), 1u);
  // Both tokens must be present.
  h.erase("banana");
  EXPECT_EQ(detect_count(h, s, 256), 0u);
}

TEST(Insert, WatermarkedDatasetAlwaysDetects) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const auto d = dataset(rng);
    const auto r = watermark(rng, d, trial % 3);
    ASSERT_EQ(r.secret.pairs.size(), kDefaultNumPairs);
    const auto p = DetectParams{r.secret.tolerance, r.secret.pairs.size()};
    EXPECT_TRUE(detect(r.watermarked, r.secret, p)) << "trial " << trial;
    EXPECT_LE(r.edits, d.size() / 10);
    const auto delta = static_cast<std::int64_t>(r.watermarked.size()) -
                       static_cast<std::int64_t>(d.size());
    EXPECT_LE(static_cast<std::size_t>(std::llabs(delta)), r.edits);
  }
}

TEST(Insert, PairsAreDisjointAndNonTrivial) {
  std::mt19937_64 rng(9);
  const auto r = watermark(rng, dataset(rng), 1);
  std::vector<std::string> seen;
  for (const auto& p : r.secret.pairs) {
    seen.push_back(p.first);
    seen.push_back(p.second);
    EXPECT_GT(pair_selector(p.first, p.second, r.secret.key, r.secret.modulus), 2u);
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
}

TEST(Insert, DeterministicForFixedSeed) {
  std::mt19937_64 rng(4);
  const auto d = dataset(rng, 200, 4000);
  InsertOptions io;
  io.seed = 77;
  const auto k = counting_key();
  EXPECT_EQ(insert(d, k, io).watermarked, insert(d, k, io).watermarked);
}

TEST(Insert, RejectsSmallVocabularyAndTightBudget) {
  std::mt19937_64 rng(5);
  InsertOptions io;
  io.seed = 1;
  EXPECT_THROW(insert(dataset(rng, 40, 400), counting_key(), io), InvalidArgument);
  // Zero budget admits only pairs whose residue is already 0.
  io.budget = 0;
  io.num_pairs = 150;
  EXPECT_THROW(insert(dataset(rng, 400, 4000), counting_key(), io), BudgetExhausted);
}

TEST(DetectProperty, PermutationInvariant) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = watermark(rng, dataset(rng, 300, 6000));
    auto shuffled = r.watermarked;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::uint64_t t : {0u, 1u, 5u}) {
      EXPECT_EQ(detect_count(preprocess(shuffled), r.secret, t),
                detect_count(preprocess(r.watermarked), r.secret, t));
    }
  }
}

TEST(DetectProperty, MonotoneInToleranceAndThreshold) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    const auto r = watermark(rng, dataset(rng, 300, 6000));
    // Mix watermarked, perturbed and unrelated inputs.
    TokenDataset input = trial % 3 == 0 ? dataset(rng, 300, 6000) : r.watermarked;
    if (trial % 3 == 1) input.resize(input.size() - input.size() / 50);
    const auto hist = preprocess(input);
    for (std::uint64_t t = 0; t < 12; ++t) {
      for (std::size_t k = 1; k <= r.secret.pairs.size(); ++k) {
        if (!detect(hist, r.secret, {t, k})) continue;
        ASSERT_TRUE(detect(hist, r.secret, {t + 1, k}));
        ASSERT_TRUE(detect(hist, r.secret, {t, k - 1}));
      }
    }
  }
}

TEST(DetectProperty, RobustToRandomDeletion) {
  // Delete r = 1% of tokens uniformly at random and detect with k = 60%.
  std::mt19937_64 rng(8);
  int accepted = 0;
  constexpr int kTrials = 40;
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto r = watermark(rng, dataset(rng));
    auto attacked = r.watermarked;
    std::shuffle(attacked.begin(), attacked.end(), rng);
    attacked.resize(attacked.size() - attacked.size() / 100);
    accepted += detect(attacked, r.secret, default_params(r.secret));
  }
  EXPECT_GE(accepted, kTrials * 9 / 10);
}

TEST(DetectProperty, UnrelatedDatasetsRarelyAccept) {
  std::mt19937_64 rng(10);
  int accepted = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = watermark(rng, dataset(rng, 500, 10000));
    data::ZipfOptions o;
    o.distinct = 500;
    o.length = 10000;
    o.exponent = 0.8;
    accepted += detect(data::zipf_dataset(rng, o), r.secret, default_params(r.secret));
  }
  EXPECT_LE(accepted, 1);
}

TEST(DatasetFile, ParseAndSerialize) {
  const TokenDataset d{"a", "b b", "c"};
  const std::string text = serialize_dataset(d);
  EXPECT_EQ(parse_dataset(text), d);
  EXPECT_EQ(parse_dataset("x\r\n\ny\n"), (TokenDataset{"x", "y"}));
}

TEST(SecretJson, RoundTripAndSize) {
  std::mt19937_64 rng(12);
  auto r = watermark(rng, dataset(rng), 2);
  r.secret.min_pairs = 20;
  r.secret.binding = crypto::IdBinding{"owner", "meta", "2026-01-01"};
  const std::string json = secret_to_json(r.secret);
  EXPECT_EQ(secret_from_json(json), r.secret);
  // Same order of magnitude as 2 kB at default parameters.
  EXPECT_GT(json.size(), 500u);
  EXPECT_LT(json.size(), 5000u);
}

TEST(SecretJson, RejectsMalformed) {
  EXPECT_THROW(secret_from_json("{"), ParseError);
  EXPECT_THROW(secret_from_json(R"({"version":2,"K":"","z":257,"pairs":[]})"), ParseError);
  EXPECT_THROW(secret_from_json(R"({"version":1,"K":"AAAA","z":257,"pairs":[]})"), ParseError);
  EXPECT_THROW(secret_from_json(
                   R"({"version":1,"K":"AAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAA=","z":1,"pairs":[]})"),
               ParseError);
}
