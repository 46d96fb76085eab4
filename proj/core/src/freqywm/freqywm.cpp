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

#include "pvwm/freqywm/freqywm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

namespace pvwm::freqywm {

BudgetExhausted::BudgetExhausted(std::size_t achieved, std::size_t requested)
    : Error("edit budget exhausted after " + std::to_string(achieved) + " of " +
            std::to_string(requested) + " pairs"),
      achieved_(achieved) {}

std::size_t default_min_pairs(std::size_t num_pairs) {
  return (6 * num_pairs + 9) / 10;
}

DetectParams default_params(const FreqySecret& secret) {
  return {secret.tolerance, secret.min_pairs.value_or(default_min_pairs(secret.pairs.size()))};
}

TokenHistogram preprocess(std::span<const std::string> dataset) {
  TokenHistogram hist;
  hist.reserve(dataset.size() / 4 + 1);
  for (const auto& token : dataset) ++hist[token];
  return hist;
}

std::uint64_t pair_selector(std::string_view u_i, std::string_view u_j, ByteView key,
                            std::uint64_t modulus) {
  if (modulus < 2) throw InvalidArgument("pair selector modulus must be >= 2");
  Bytes input;
  input.reserve(16 + u_i.size() + u_j.size() + key.size());
  crypto::append_framed(input, as_bytes(u_i));
  crypto::append_framed(input, as_bytes(u_j));
  append(input, key);
  const crypto::Digest digest = crypto::sha256(input);
  __extension__ typedef unsigned __int128 u128;
  u128 residue = 0;
  for (std::uint8_t b : digest) residue = ((residue << 8) | b) % modulus;
  const auto s = static_cast<std::uint64_t>(residue);
  return s == 0 ? modulus : s;
}

std::uint64_t modular_difference(std::uint64_t f_i, std::uint64_t f_j, std::uint64_t s) {
  if (s == 0) throw InvalidArgument("modulus must be positive");
  if (f_i >= f_j) return (f_i - f_j) % s;
  const std::uint64_t r = (f_j - f_i) % s;
  return r == 0 ? 0 : s - r;
}

std::size_t detect_count(const TokenHistogram& hist, const FreqySecret& secret,
                         std::uint64_t tolerance) {
  std::size_t count = 0;
  for (const auto& pair : secret.pairs) {
    const auto it_i = hist.find(pair.first);
    if (it_i == hist.end()) continue;
    const auto it_j = hist.find(pair.second);
    if (it_j == hist.end()) continue;
    const std::uint64_t s = pair_selector(pair.first, pair.second, secret.key, secret.modulus);
    if (modular_difference(it_i->second, it_j->second, s) <= tolerance) ++count;
  }
  return count;
}

bool detect(const TokenHistogram& hist, const FreqySecret& secret, const DetectParams& params) {
  return detect_count(hist, secret, params.tolerance) >= params.min_pairs;
}

bool detect(std::span<const std::string> dataset, const FreqySecret& secret,
            const DetectParams& params) {
  return detect(preprocess(dataset), secret, params);
}

namespace {

struct Candidate {
  std::size_t a;
  std::size_t b;
  std::uint64_t s;
  std::size_t cost;
  // Signed frequency change applied to token a or token b.
  std::int64_t delta_a;
  std::int64_t delta_b;
  std::uint64_t weight;
};

// Cheapest single-token frequency change that brings the pair residue to
// <= t, keeping both frequencies >= 1.
Candidate plan(std::size_t a, std::size_t b, std::uint64_t f_a, std::uint64_t f_b,
               std::uint64_t s, std::uint64_t t) {
  Candidate c{a, b, s, 0, 0, 0, f_a + f_b};
  const std::uint64_t r = modular_difference(f_a, f_b, s);
  if (r <= t) return c;
  const std::uint64_t down = r - t;  // lowers the residue to t
  const std::uint64_t up = s - r;    // raises the residue to 0 (mod s)
  c.cost = std::numeric_limits<std::size_t>::max();
  auto consider = [&](std::uint64_t cost, std::int64_t da, std::int64_t db) {
    if (cost < c.cost) {
      c.cost = static_cast<std::size_t>(cost);
      c.delta_a = da;
      c.delta_b = db;
    }
  };
  if (f_a > down) consider(down, -static_cast<std::int64_t>(down), 0);
  consider(up, static_cast<std::int64_t>(up), 0);
  consider(down, 0, static_cast<std::int64_t>(down));
  if (f_b > up) consider(up, 0, -static_cast<std::int64_t>(up));
  return c;
}

}  // namespace

InsertResult insert(std::span<const std::string> original, const FixedBytes<32>& key,
                    const InsertOptions& options) {
  if (options.modulus < 2) throw InvalidArgument("modulus must be >= 2");
  if (options.num_pairs == 0) throw InvalidArgument("num_pairs must be >= 1");

  const TokenHistogram hist = preprocess(original);
  if (hist.size() < 2 * options.num_pairs) {
    throw InvalidArgument("dataset has " + std::to_string(hist.size()) +
                          " distinct tokens; need at least " +
                          std::to_string(2 * options.num_pairs));
  }
  std::vector<std::pair<std::string, std::uint64_t>> tokens(hist.begin(), hist.end());
  std::sort(tokens.begin(), tokens.end());

  std::uint64_t seed = 0;
  if (options.seed) {
    seed = *options.seed;
  } else {
    crypto::random_bytes({reinterpret_cast<std::uint8_t*>(&seed), sizeof(seed)});
  }
  std::mt19937_64 rng(seed);

  // Disjoint candidate pairs from a few random matchings of the vocabulary.
  // Pairs with s <= t + 1 match every histogram and carry no evidence.
  std::vector<Candidate> candidates;
  std::vector<std::size_t> order(tokens.size());
  constexpr int kRounds = 4;
  for (int round = 0; round < kRounds; ++round) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
      const std::size_t a = order[i];
      const std::size_t b = order[i + 1];
      const std::uint64_t s =
          pair_selector(tokens[a].first, tokens[b].first, key, options.modulus);
      if (s <= options.tolerance + 1) continue;
      candidates.push_back(plan(a, b, tokens[a].second, tokens[b].second, s, options.tolerance));
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return x.cost != y.cost ? x.cost < y.cost : x.weight < y.weight;
  });

  const std::size_t budget = options.budget.value_or(original.size() / 10);
  std::size_t spent = 0;
  std::vector<bool> used(tokens.size(), false);
  std::vector<Candidate> chosen;
  for (const auto& c : candidates) {
    if (chosen.size() == options.num_pairs) break;
    if (used[c.a] || used[c.b]) continue;
    if (spent + c.cost > budget) break;
    used[c.a] = used[c.b] = true;
    spent += c.cost;
    chosen.push_back(c);
  }
  if (chosen.size() < options.num_pairs) throw BudgetExhausted(chosen.size(), options.num_pairs);

  // Apply the edits: removals drop randomly chosen occurrences, additions are
  // spliced in at random positions.
  std::unordered_map<std::string, std::int64_t> change;
  for (const auto& c : chosen) {
    if (c.delta_a != 0) change[tokens[c.a].first] += c.delta_a;
    if (c.delta_b != 0) change[tokens[c.b].first] += c.delta_b;
  }
  std::unordered_map<std::string, std::vector<std::size_t>> positions;
  for (const auto& [token, delta] : change) {
    if (delta < 0) positions[token];
  }
  if (!positions.empty()) {
    for (std::size_t i = 0; i < original.size(); ++i) {
      auto it = positions.find(original[i]);
      if (it != positions.end()) it->second.push_back(i);
    }
  }
  std::vector<bool> removed(original.size(), false);
  std::vector<std::pair<std::size_t, std::string>> additions;
  for (const auto& [token, delta] : change) {
    if (delta < 0) {
      auto& occ = positions[token];
      std::shuffle(occ.begin(), occ.end(), rng);
      for (std::int64_t k = 0; k < -delta; ++k) removed[occ[static_cast<std::size_t>(k)]] = true;
    } else {
      std::uniform_int_distribution<std::size_t> pos(0, original.size());
      for (std::int64_t k = 0; k < delta; ++k) additions.emplace_back(pos(rng), token);
    }
  }
  std::sort(additions.begin(), additions.end());

  InsertResult result;
  result.watermarked.reserve(original.size() + additions.size());
  std::size_t next_add = 0;
  for (std::size_t i = 0; i <= original.size(); ++i) {
    while (next_add < additions.size() && additions[next_add].first == i) {
      result.watermarked.push_back(additions[next_add++].second);
    }
    if (i < original.size() && !removed[i]) result.watermarked.push_back(original[i]);
  }
  result.edits = spent;
  result.secret.key = key;
  result.secret.modulus = options.modulus;
  result.secret.tolerance = options.tolerance;
  result.secret.pairs.reserve(chosen.size());
  for (const auto& c : chosen) result.secret.pairs.push_back({tokens[c.a].first, tokens[c.b].first});
  return result;
}

TokenDataset parse_dataset(std::string_view text) {
  TokenDataset out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

std::string serialize_dataset(std::span<const std::string> dataset) {
  std::size_t total = 0;
  for (const auto& t : dataset) total += t.size() + 1;
  std::string out;
  out.reserve(total);
  for (const auto& t : dataset) {
    out += t;
    out += '\n';
  }
  return out;
}

}  // namespace pvwm::freqywm
