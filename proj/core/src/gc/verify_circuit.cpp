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

#include "pvwm/gc/verify_circuit.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "pvwm/common/error.hpp"
#include "pvwm/wire/wire.hpp"

namespace pvwm::gc {

void VerifyCircuitParams::validate() const {
  if (num_pairs == 0 || num_pairs > 64) throw InvalidArgument("num_pairs must be in [1, 64]");
  if (num_slots == 0 || num_slots > 4096) throw InvalidArgument("num_slots must be in [1, 4096]");
  if (modulus_bits == 0 || modulus_bits > 16) throw InvalidArgument("modulus_bits must be in [1, 16]");
  if (freq_bits == 0 || freq_bits > 32) throw InvalidArgument("freq_bits must be in [1, 32]");
  if (tag_bits < 8 || tag_bits > 32) throw InvalidArgument("tag_bits must be in [8, 32]");
  if (tolerance >= modulus()) throw InvalidArgument("tolerance must be below the modulus");
  if (min_pairs == 0 || min_pairs > num_pairs) throw InvalidArgument("min_pairs must be in [1, num_pairs]");
}

Bytes VerifyCircuitParams::encode() const {
  Bytes out{'P', 'V', 'V', 'C', 1};
  put_u32(out, num_pairs);
  put_u32(out, num_slots);
  put_u32(out, modulus_bits);
  put_u32(out, freq_bits);
  put_u32(out, tag_bits);
  put_u64(out, tolerance);
  put_u32(out, min_pairs);
  return out;
}

VerifyCircuitParams VerifyCircuitParams::decode(ByteView data) {
  wire::Reader r(data);
  const ByteView magic = r.take(5);
  const std::uint8_t expect[5] = {'P', 'V', 'V', 'C', 1};
  if (!std::equal(magic.begin(), magic.end(), expect)) throw ParseError("not a circuit parameter block");
  VerifyCircuitParams p;
  p.num_pairs = r.u32();
  p.num_slots = r.u32();
  p.modulus_bits = r.u32();
  p.freq_bits = r.u32();
  p.tag_bits = r.u32();
  p.tolerance = r.u64();
  p.min_pairs = r.u32();
  r.expect_end();
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return p;
}

Circuit build_verify_circuit(const VerifyCircuitParams& p) {
  p.validate();
  CircuitBuilder b(p.secret_bits(), p.holder_bits());

  // XOR-reconstruct the secret.
  const Word secret = b.xor_word(b.garbler_word(0, p.secret_bits()),
                                 b.evaluator_word(0, p.secret_bits()));

  std::vector<Word> slot_tags;
  std::vector<Word> slot_freqs;
  for (std::uint32_t n = 0; n < p.num_slots; ++n) {
    const std::uint32_t off = p.secret_bits() + n * p.slot_bits();
    slot_tags.push_back(b.evaluator_word(off, p.tag_bits));
    slot_freqs.push_back(b.evaluator_word(off + p.tag_bits, p.freq_bits));
  }

  // Tags are unique among slots, so at most one equality fires and XOR acts
  // as OR for both the found flag and the selected frequency.
  // Tag 0 marks an empty slot and never counts as found.
  auto lookup = [&](const Word& tag) {
    Bit nonzero = Bit::constant(false);
    for (const Bit& bit : tag) nonzero = b.or_(nonzero, bit);
    Bit found = Bit::constant(false);
    Word freq = CircuitBuilder::const_word(0, p.freq_bits);
    for (std::uint32_t n = 0; n < p.num_slots; ++n) {
      const Bit eq = b.equal(tag, slot_tags[n]);
      found = b.xor_(found, eq);
      freq = b.xor_word(freq, b.and_word(eq, slot_freqs[n]));
    }
    return std::pair{b.and_(found, nonzero), freq};
  };

  std::vector<Bit> matches;
  for (std::uint32_t i = 0; i < p.num_pairs; ++i) {
    const auto field = [&](std::uint32_t off, std::uint32_t width) {
      const auto first = secret.begin() + i * p.pair_bits() + off;
      return Word(first, first + width);
    };
    const Word tag_i = field(0, p.tag_bits);
    const Word tag_j = field(p.tag_bits, p.tag_bits);
    const Word s = field(2 * p.tag_bits, p.selector_bits());

    const auto [found_i, f_i] = lookup(tag_i);
    const auto [found_j, f_j] = lookup(tag_j);

    // |f_i - f_j| and its sign.
    const auto [d_pos, negative] = b.sub(f_i, f_j);
    const auto [d_neg, unused] = b.sub(f_j, f_i);
    (void)unused;
    const Word magnitude = b.mux_word(negative, d_pos, d_neg);

    const Word m = b.mod(magnitude, s);
    Bit nonzero = Bit::constant(false);
    for (const Bit& bit : m) nonzero = b.or_(nonzero, bit);
    const Word s_minus_m = b.sub(s, m).first;
    const Word residue = b.mux_word(b.and_(negative, nonzero), m, s_minus_m);

    const Bit le = b.le_const(residue, p.tolerance);
    matches.push_back(b.and_(b.and_(found_i, found_j), le));
  }
  b.output(b.popcount(matches));
  return b.finish();
}

std::uint32_t token_tag(std::string_view token, std::uint32_t tag_bits) {
  const crypto::Digest d = crypto::sha256(as_bytes(token));
  std::uint32_t tag = get_u32(d);
  if (tag_bits < 32) tag >>= (32 - tag_bits);
  return tag == 0 ? 1 : tag;
}

namespace {

void push_uint(BitVector& out, std::uint64_t v, std::uint32_t width) {
  for (std::uint32_t i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>((v >> i) & 1));
}

}  // namespace

BitVector encode_secret(const freqywm::FreqySecret& secret, const VerifyCircuitParams& p) {
  p.validate();
  if (secret.modulus != p.modulus()) throw InvalidArgument("secret modulus does not match circuit");
  if (secret.pairs.size() != p.num_pairs) throw InvalidArgument("secret pair count does not match circuit");
  BitVector out;
  out.reserve(p.secret_bits());
  for (const auto& pair : secret.pairs) {
    push_uint(out, token_tag(pair.first, p.tag_bits), p.tag_bits);
    push_uint(out, token_tag(pair.second, p.tag_bits), p.tag_bits);
    push_uint(out, freqywm::pair_selector(pair.first, pair.second, secret.key, secret.modulus),
              p.selector_bits());
  }
  return out;
}

BitVector encode_histogram(const freqywm::TokenHistogram& hist, const VerifyCircuitParams& p) {
  p.validate();
  if (hist.size() > p.num_slots) {
    throw InvalidArgument(std::to_string(hist.size()) + " distinct tokens exceed " +
                          std::to_string(p.num_slots) + " slots");
  }
  std::vector<std::pair<std::uint32_t, std::uint64_t>> slots;
  slots.reserve(hist.size());
  const std::uint64_t max_freq = p.freq_bits >= 64 ? ~0ULL : (std::uint64_t{1} << p.freq_bits) - 1;
  for (const auto& [token, freq] : hist) {
    if (freq > max_freq) throw InvalidArgument("frequency exceeds circuit width");
    slots.emplace_back(token_tag(token, p.tag_bits), freq);
  }
  std::sort(slots.begin(), slots.end());
  for (std::size_t i = 1; i < slots.size(); ++i) {
    if (slots[i].first == slots[i - 1].first) throw InvalidArgument("token tag collision");
  }
  BitVector out;
  out.reserve(std::size_t{p.num_slots} * p.slot_bits());
  for (const auto& [tag, freq] : slots) {
    push_uint(out, tag, p.tag_bits);
    push_uint(out, freq, p.freq_bits);
  }
  out.resize(std::size_t{p.num_slots} * p.slot_bits(), 0);
  return out;
}

std::uint64_t bits_to_uint(const BitVector& bits) {
  std::uint64_t v = 0;
  for (std::size_t i = bits.size(); i-- > 0;) v = (v << 1) | (bits[i] & 1);
  return v;
}

Bytes pack_bits(const BitVector& bits) {
  Bytes out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    out[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1) << (i % 8));
  }
  return out;
}

BitVector unpack_bits(ByteView bytes, std::size_t count) {
  if (bytes.size() * 8 < count) throw ParseError("bit buffer too short");
  BitVector out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = (bytes[i / 8] >> (i % 8)) & 1;
  return out;
}

}  // namespace pvwm::gc
