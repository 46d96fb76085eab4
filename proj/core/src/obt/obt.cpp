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

#include "pvwm/obt/obt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "pvwm/common/error.hpp"

namespace pvwm::obt {

ObtSecret secret_gen(std::size_t num_partitions, double delta) {
  if (num_partitions == 0) throw InvalidArgument("num_partitions must be >= 1");
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be non-negative");
  ObtSecret s;
  crypto::random_bytes(s.key);
  s.num_partitions = num_partitions;
  s.delta = delta;
  const Bytes bits = crypto::random_bytes(num_partitions);
  s.wm.reserve(num_partitions);
  for (std::uint8_t b : bits) s.wm.push_back((b & 1) != 0);
  return s;
}

std::size_t partition(std::string_view pk, ByteView key, std::size_t num_partitions) {
  if (num_partitions == 0) throw InvalidArgument("num_partitions must be >= 1");
  Bytes input;
  input.reserve(8 + pk.size() + key.size());
  crypto::append_framed(input, as_bytes(pk));
  append(input, key);
  const crypto::Digest d = crypto::sha256(input);
  std::uint64_t r = 0;
  for (std::uint8_t b : d) r = ((r << 8) | b) % num_partitions;
  return static_cast<std::size_t>(r);
}

namespace {

void check_secret(const ObtSecret& s) {
  if (s.num_partitions == 0) throw InvalidArgument("num_partitions must be >= 1");
  if (s.wm.size() != s.num_partitions) throw InvalidArgument("|wm| must equal num_partitions");
}

struct PartitionStats {
  std::vector<double> sum;
  std::vector<std::size_t> count;
  std::vector<std::size_t> index;  // partition of each row
};

PartitionStats collect(std::span<const Row> table, const ObtSecret& s) {
  PartitionStats st;
  st.sum.assign(s.num_partitions, 0.0);
  st.count.assign(s.num_partitions, 0);
  st.index.reserve(table.size());
  for (const auto& row : table) {
    const std::size_t p = partition(row.pk, s.key, s.num_partitions);
    st.index.push_back(p);
    st.sum[p] += row.value;
    ++st.count[p];
  }
  return st;
}

}  // namespace

NumericTable insert(std::span<const Row> table, const ObtSecret& secret) {
  check_secret(secret);
  if (!(secret.delta >= 0.0)) throw InvalidArgument("delta must be non-negative");
  const PartitionStats st = collect(table, secret);
  std::vector<double> shift(secret.num_partitions, 0.0);
  for (std::size_t p = 0; p < secret.num_partitions; ++p) {
    if (st.count[p] == 0) {
      throw InvalidArgument("partition " + std::to_string(p) + " is empty");
    }
    // Centre within [-delta, delta] only, so no value moves more than 2*delta.
    const double mean = st.sum[p] / static_cast<double>(st.count[p]);
    const double target = secret.wm[p] ? secret.delta : -secret.delta;
    shift[p] = target - std::clamp(mean, -secret.delta, secret.delta);
  }
  NumericTable out(table.begin(), table.end());
  for (std::size_t r = 0; r < out.size(); ++r) out[r].value += shift[st.index[r]];
  return out;
}

DetectReport detect_report(std::span<const Row> table, const ObtSecret& secret,
                           double vote_threshold) {
  check_secret(secret);
  const PartitionStats st = collect(table, secret);
  DetectReport rep;
  rep.num_partitions = secret.num_partitions;
  for (std::size_t p = 0; p < secret.num_partitions; ++p) {
    if (st.count[p] == 0) continue;
    const double mean = st.sum[p] / static_cast<double>(st.count[p]);
    if ((secret.wm[p] && mean > 0.0) || (!secret.wm[p] && mean < 0.0)) ++rep.matched_bits;
  }
  rep.accepted = static_cast<double>(rep.matched_bits) >=
                 vote_threshold * static_cast<double>(secret.num_partitions);
  return rep;
}

bool detect(std::span<const Row> table, const ObtSecret& secret, double vote_threshold) {
  return detect_report(table, secret, vote_threshold).accepted;
}

bool detect(std::span<const Row> table, const ObtSecret& secret) {
  return detect(table, secret, secret.vote_threshold.value_or(kDefaultVoteThreshold));
}

NumericTable parse_table(std::string_view csv) {
  NumericTable out;
  std::unordered_set<std::string> seen;
  bool header = true;
  std::size_t line_no = 0;
  while (!csv.empty()) {
    const std::size_t nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "pk,value") throw ParseError("table header must be \"pk,value\"");
      header = false;
      continue;
    }
    const std::size_t comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": missing value column");
    }
    Row row;
    row.pk = std::string(line.substr(0, comma));
    const std::string_view num = line.substr(comma + 1);
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), row.value);
    if (ec != std::errc{} || ptr != num.data() + num.size() || !std::isfinite(row.value)) {
      throw ParseError("line " + std::to_string(line_no) + ": bad value");
    }
    if (!seen.insert(row.pk).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate primary key");
    }
    out.push_back(std::move(row));
  }
  if (header) throw ParseError("table header must be \"pk,value\"");
  return out;
}

std::string serialize_table(std::span<const Row> table) {
  std::string out = "pk,value\n";
  char buf[32];
  for (const auto& row : table) {
    if (row.pk.find_first_of("\r\n") != std::string::npos) {
      throw InvalidArgument("primary key contains a line break");
    }
    const auto res = std::to_chars(buf, buf + sizeof buf, row.value);
    out += row.pk;
    out += ',';
    out.append(buf, res.ptr);
    out += '\n';
  }
  return out;
}

}  // namespace pvwm::obt
