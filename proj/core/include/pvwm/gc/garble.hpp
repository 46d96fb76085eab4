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
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/gc/circuit.hpp"

// Half-gates garbling with free XOR.
namespace pvwm::gc {

struct Block {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool lsb() const noexcept { return (lo & 1) != 0; }
  Block operator^(const Block& o) const noexcept { return {lo ^ o.lo, hi ^ o.hi}; }
  Block& operator^=(const Block& o) noexcept {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  friend bool operator==(const Block&, const Block&) = default;

  static Block random();
  static Block from_bytes(ByteView b);  // 16 bytes, little-endian halves
  void write(std::uint8_t* out) const noexcept;
};

inline Block select(bool bit, const Block& b) noexcept {
  const std::uint64_t m = 0 - static_cast<std::uint64_t>(bit);
  return {b.lo & m, b.hi & m};
}

// Tweakable hash H(x, i) = AES_k(s(x) ^ i) ^ s(x) ^ i with a fixed public
// AES-128 key and a linear orthomorphism s.
class FixedKeyHash {
 public:
  FixedKeyHash();
  ~FixedKeyHash();
  FixedKeyHash(const FixedKeyHash&) = delete;
  FixedKeyHash& operator=(const FixedKeyHash&) = delete;

  void hash(const Block* in, const std::uint64_t* tweaks, Block* out, std::size_t n);

 private:
  void* ctx_;
};

struct GarbledCircuit {
  std::vector<Block> tables;  // two per AND gate, in gate order
};

struct EncodingInfo {
  std::vector<Block> zero_labels;  // one per input wire
  Block delta;
};

using DecodingInfo = std::vector<std::uint8_t>;  // permute bit per output

struct Garbling {
  GarbledCircuit f;
  EncodingInfo e;
  DecodingInfo d;
};

Garbling garble(const Circuit& c);

// Labels for bits x on input wires [offset, offset + |x|).
std::vector<Block> encode(const EncodingInfo& e, const BitVector& x, std::size_t offset = 0);
std::vector<Block> eval(const Circuit& c, const GarbledCircuit& f, const std::vector<Block>& x);
BitVector decode(const DecodingInfo& d, const std::vector<Block>& y);

Bytes blocks_to_bytes(const std::vector<Block>& blocks);
std::vector<Block> blocks_from_bytes(ByteView bytes);

}  // namespace pvwm::gc
