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

#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/gc/circuit.hpp"

// Boolean circuit for the reduced frequency-watermark check.
//
// Garbler input: the prover's share of the reduced secret. Evaluator input:
// the holder's share followed by its histogram as (tag, frequency) slots.
// Per watermark pair the circuit reconstructs (tag_i, tag_j, s_ij), looks up
// both frequencies, computes (f_i - f_j) mod s_ij and compares it against the
// embedded tolerance. The output is the number of matching pairs; the k
// threshold is applied by the holder in the clear.
namespace pvwm::gc {

struct VerifyCircuitParams {
  std::uint32_t num_pairs = 8;
  std::uint32_t num_slots = 32;
  std::uint32_t modulus_bits = 4;  // z = 2^modulus_bits
  std::uint32_t freq_bits = 16;
  std::uint32_t tag_bits = 32;
  std::uint64_t tolerance = 0;
  std::uint32_t min_pairs = 5;

  std::uint64_t modulus() const noexcept { return std::uint64_t{1} << modulus_bits; }
  // s_ij lies in [1, z], which needs modulus_bits + 1 bits.
  std::uint32_t selector_bits() const noexcept { return modulus_bits + 1; }
  std::uint32_t pair_bits() const noexcept { return 2 * tag_bits + selector_bits(); }
  std::uint32_t secret_bits() const noexcept { return num_pairs * pair_bits(); }
  std::uint32_t slot_bits() const noexcept { return tag_bits + freq_bits; }
  std::uint32_t holder_bits() const noexcept { return secret_bits() + num_slots * slot_bits(); }

  // Throws InvalidArgument for widths the builder does not support.
  void validate() const;

  Bytes encode() const;
  static VerifyCircuitParams decode(ByteView data);
  friend bool operator==(const VerifyCircuitParams&, const VerifyCircuitParams&) = default;
};

Circuit build_verify_circuit(const VerifyCircuitParams& params);

// First tag_bits of SHA-256(token); 0 is reserved for empty slots and maps to 1.
std::uint32_t token_tag(std::string_view token, std::uint32_t tag_bits = 32);

// Packs the pairs of a secret whose modulus is params.modulus() into
// secret_bits() bits, LSB first.
BitVector encode_secret(const freqywm::FreqySecret& secret, const VerifyCircuitParams& params);
// Histogram slots, sorted by tag; throws InvalidArgument on overflow of the
// slot count or frequency width, or on a tag collision.
BitVector encode_histogram(const freqywm::TokenHistogram& hist, const VerifyCircuitParams& params);

std::uint64_t bits_to_uint(const BitVector& bits);
Bytes pack_bits(const BitVector& bits);
BitVector unpack_bits(ByteView bytes, std::size_t count);

}  // namespace pvwm::gc
