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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/crypto/crypto.hpp"

// Frequency-histogram dataset watermarking.
//
// A dataset is a multiset of opaque tokens. The watermark is a list of token
// pairs (u_i, u_j) whose frequencies satisfy (f_i - f_j) mod s_ij <= t, where
// s_ij is derived from a keyed hash of the pair. Detection counts satisfied
// pairs and accepts once at least k of them hold.
namespace pvwm::freqywm {

using TokenDataset = std::vector<std::string>;
using TokenHistogram = std::unordered_map<std::string, std::uint64_t>;

inline constexpr std::uint64_t kDefaultModulus = 257;
inline constexpr std::size_t kDefaultNumPairs = 30;

struct TokenPair {
  std::string first;
  std::string second;
  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

struct FreqySecret {
  std::vector<TokenPair> pairs;
  FixedBytes<32> key{};
  std::uint64_t modulus = kDefaultModulus;
  std::uint64_t tolerance = 0;
  // Minimum matching pairs; unset means ceil(0.6 * |pairs|).
  std::optional<std::size_t> min_pairs;
  std::optional<crypto::IdBinding> binding;

  friend bool operator==(const FreqySecret&, const FreqySecret&) = default;
};

struct DetectParams {
  std::uint64_t tolerance = 0;  // t
  std::size_t min_pairs = 1;    // k
};

// t from the secret, k from the secret or ceil(0.6 * |L_wm|).
DetectParams default_params(const FreqySecret& secret);
std::size_t default_min_pairs(std::size_t num_pairs);

TokenHistogram preprocess(std::span<const std::string> dataset);

// SHA-256(frame(u_i) || frame(u_j) || K) read as a big-endian integer, mod z.
// A zero residue maps to z, so the result lies in [1, z].
std::uint64_t pair_selector(std::string_view u_i, std::string_view u_j, ByteView key,
                            std::uint64_t modulus);

// Non-negative (f_i - f_j) mod s.
std::uint64_t modular_difference(std::uint64_t f_i, std::uint64_t f_j, std::uint64_t s);

// Pairs whose tokens are both present and whose residue is within tolerance.
std::size_t detect_count(const TokenHistogram& hist, const FreqySecret& secret,
                         std::uint64_t tolerance);
bool detect(const TokenHistogram& hist, const FreqySecret& secret, const DetectParams& params);
bool detect(std::span<const std::string> dataset, const FreqySecret& secret,
            const DetectParams& params);

struct InsertOptions {
  std::size_t num_pairs = kDefaultNumPairs;
  std::uint64_t modulus = kDefaultModulus;
  std::uint64_t tolerance = 0;
  // Total frequency edits allowed; unset means 10% of the dataset size.
  std::optional<std::size_t> budget;
  // Seeds candidate sampling and edit placement; unset draws from the CSPRNG.
  std::optional<std::uint64_t> seed;
};

struct InsertResult {
  TokenDataset watermarked;
  FreqySecret secret;
  std::size_t edits = 0;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted(std::size_t achieved, std::size_t requested);
  std::size_t achieved() const noexcept { return achieved_; }

 private:
  std::size_t achieved_;
};

// Greedy insertion: candidate pairs are ranked by the number of frequency
// edits needed to satisfy the congruence and the cheapest disjoint pairs are
// taken until num_pairs hold.
InsertResult insert(std::span<const std::string> original, const FixedBytes<32>& key,
                    const InsertOptions& options);

// Newline-delimited UTF-8 tokens; a trailing newline and '\r' are ignored,
// empty lines are skipped.
TokenDataset parse_dataset(std::string_view text);
std::string serialize_dataset(std::span<const std::string> dataset);

// Versioned JSON: {"version":1,"K":b64,"z":int,"pairs":[[b64,b64],...],...}
std::string secret_to_json(const FreqySecret& secret);
FreqySecret secret_from_json(std::string_view json);

}  // namespace pvwm::freqywm
