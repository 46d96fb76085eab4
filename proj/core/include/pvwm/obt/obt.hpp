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
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/crypto/crypto.hpp"

// Keyed-partition watermarking for numeric tables.
//
// Rows are assigned to partitions by a keyed hash of their primary key. Each
// partition carries one watermark bit, embedded by moving the partition mean
// to +delta (bit 1) or -delta (bit 0). Detection reads each bit from the sign
// of the partition mean and takes a vote.
namespace pvwm::obt {

struct Row {
  std::string pk;
  double value = 0.0;
  friend bool operator==(const Row&, const Row&) = default;
};

using NumericTable = std::vector<Row>;

inline constexpr std::size_t kDefaultPartitions = 32;
inline constexpr double kDefaultVoteThreshold = 0.8;

struct ObtSecret {
  FixedBytes<32> key{};
  std::size_t num_partitions = kDefaultPartitions;
  std::vector<bool> wm;  // |wm| == num_partitions
  double delta = 1.0;
  std::optional<double> vote_threshold;
  std::optional<crypto::IdBinding> binding;

  friend bool operator==(const ObtSecret&, const ObtSecret&) = default;
};

// Fresh key and random bit string.
ObtSecret secret_gen(std::size_t num_partitions, double delta);

// SHA-256(frame(pk) || K) mod num_partitions.
std::size_t partition(std::string_view pk, ByteView key, std::size_t num_partitions);

// Throws InvalidArgument naming the first empty partition.
NumericTable insert(std::span<const Row> table, const ObtSecret& secret);

struct DetectReport {
  std::size_t matched_bits = 0;
  std::size_t num_partitions = 0;
  bool accepted = false;
};

DetectReport detect_report(std::span<const Row> table, const ObtSecret& secret,
                           double vote_threshold);
bool detect(std::span<const Row> table, const ObtSecret& secret, double vote_threshold);
bool detect(std::span<const Row> table, const ObtSecret& secret);

// CSV with header "pk,value". Rejects duplicate primary keys.
NumericTable parse_table(std::string_view csv);
std::string serialize_table(std::span<const Row> table);

// Versioned JSON: {"version":1,"K":b64,"num_partitions":n,"wm":"0101..","delta":d}
std::string secret_to_json(const ObtSecret& secret);
ObtSecret secret_from_json(std::string_view json);

}  // namespace pvwm::obt
