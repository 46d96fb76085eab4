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
#include <random>
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/crypto/crypto.hpp"

namespace pvwm::gc {

enum class GateType : std::uint8_t { kXor = 0, kAnd = 1, kInv = 2 };

// Gate i writes wire (num_inputs() + i). INV ignores in1.
struct Gate {
  GateType type = GateType::kXor;
  std::uint32_t in0 = 0;
  std::uint32_t in1 = 0;
  friend bool operator==(const Gate&, const Gate&) = default;
};

// Wires 0..garbler_inputs-1 belong to the garbler, the next
// evaluator_inputs wires to the evaluator; gate outputs follow in order.
struct Circuit {
  std::uint32_t garbler_inputs = 0;
  std::uint32_t evaluator_inputs = 0;
  std::vector<Gate> gates;
  std::vector<std::uint32_t> outputs;

  std::uint32_t num_inputs() const noexcept { return garbler_inputs + evaluator_inputs; }
  std::uint32_t num_wires() const noexcept {
    return num_inputs() + static_cast<std::uint32_t>(gates.size());
  }
  std::size_t and_count() const noexcept;

  // Throws InvalidArgument when a gate reads an undefined wire or an output
  // names a wire that does not exist.
  void validate() const;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

using BitVector = std::vector<std::uint8_t>;  // one bit per element

// Plain topological evaluation; x holds garbler bits then evaluator bits.
BitVector evaluate(const Circuit& c, const BitVector& x);

Bytes serialize(const Circuit& c);
Circuit deserialize(ByteView data);
crypto::Digest circuit_hash(const Circuit& c);

// Uniformly random well-formed circuit used by property tests.
Circuit random_circuit(std::mt19937_64& rng, std::uint32_t num_inputs, std::uint32_t num_gates,
                       std::uint32_t num_outputs);

// Wire handle with compile-time constant folding. A Bit is either a known
// constant or a circuit wire.
class Bit {
 public:
  Bit() = default;
  static Bit constant(bool v) { return Bit(v ? kOne : kZero); }
  static Bit wire(std::uint32_t w) { return Bit(static_cast<std::int64_t>(w)); }
  bool is_const() const noexcept { return v_ < 0; }
  bool value() const noexcept { return v_ == kOne; }
  std::uint32_t wire_id() const noexcept { return static_cast<std::uint32_t>(v_); }

 private:
  static constexpr std::int64_t kZero = -1;
  static constexpr std::int64_t kOne = -2;
  explicit Bit(std::int64_t v) : v_(v) {}
  std::int64_t v_ = kZero;
};

using Word = std::vector<Bit>;  // little-endian

class CircuitBuilder {
 public:
  CircuitBuilder(std::uint32_t garbler_inputs, std::uint32_t evaluator_inputs);

  Bit garbler_input(std::uint32_t i) const;
  Bit evaluator_input(std::uint32_t i) const;
  Word garbler_word(std::uint32_t offset, std::uint32_t width) const;
  Word evaluator_word(std::uint32_t offset, std::uint32_t width) const;

  Bit xor_(Bit a, Bit b);
  Bit and_(Bit a, Bit b);
  Bit not_(Bit a);
  Bit or_(Bit a, Bit b);
  // s ? b : a
  Bit mux(Bit s, Bit a, Bit b);

  Word xor_word(const Word& a, const Word& b);
  Word mux_word(Bit s, const Word& a, const Word& b);
  Word and_word(Bit s, const Word& a);
  static Word const_word(std::uint64_t v, std::uint32_t width);
  // Equality of two equal-width words.
  Bit equal(const Word& a, const Word& b);
  // a + b, result width max(|a|,|b|)+1.
  Word add(const Word& a, const Word& b);
  // a - b over |a| bits plus a borrow flag (1 when a < b).
  std::pair<Word, Bit> sub(const Word& a, const Word& b);
  // a <= constant.
  Bit le_const(const Word& a, std::uint64_t c);
  // a mod d by restoring division; the divisor is |d| bits wide.
  Word mod(const Word& a, const Word& d);
  // Hamming weight.
  Word popcount(const std::vector<Bit>& bits);

  void output(Bit b);
  void output(const Word& w);

  Circuit finish();

 private:
  Bit emit(GateType type, Bit a, Bit b);
  Bit materialize(Bit b);

  Circuit c_;
};

}  // namespace pvwm::gc
