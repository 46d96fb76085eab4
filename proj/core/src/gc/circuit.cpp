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

#include "pvwm/gc/circuit.hpp"

#include <bit>
#include <string>

#include "pvwm/common/error.hpp"
#include "pvwm/wire/wire.hpp"

namespace pvwm::gc {

std::size_t Circuit::and_count() const noexcept {
  std::size_t n = 0;
  for (const auto& g : gates) n += g.type == GateType::kAnd;
  return n;
}

void Circuit::validate() const {
  const std::uint32_t n = num_inputs();
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& g = gates[i];
    const std::uint64_t out = std::uint64_t{n} + i;
    if (g.type != GateType::kXor && g.type != GateType::kAnd && g.type != GateType::kInv) {
      throw InvalidArgument("gate " + std::to_string(i) + " has an unknown type");
    }
    if (g.in0 >= out || (g.type != GateType::kInv && g.in1 >= out)) {
      throw InvalidArgument("gate " + std::to_string(i) + " reads an undefined wire");
    }
  }
  for (std::uint32_t o : outputs) {
    if (o >= num_wires()) throw InvalidArgument("output names an undefined wire");
  }
}

BitVector evaluate(const Circuit& c, const BitVector& x) {
  if (x.size() != c.num_inputs()) {
    throw InvalidArgument("input width " + std::to_string(x.size()) + " != " +
                          std::to_string(c.num_inputs()));
  }
  std::vector<std::uint8_t> w(c.num_wires());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = x[i] & 1;
  std::size_t out = x.size();
  for (const auto& g : c.gates) {
    switch (g.type) {
      case GateType::kXor: w[out] = w[g.in0] ^ w[g.in1]; break;
      case GateType::kAnd: w[out] = w[g.in0] & w[g.in1]; break;
      case GateType::kInv: w[out] = w[g.in0] ^ 1; break;
    }
    ++out;
  }
  BitVector y;
  y.reserve(c.outputs.size());
  for (std::uint32_t o : c.outputs) y.push_back(w[o]);
  return y;
}

namespace {
constexpr std::uint8_t kMagic[4] = {'P', 'V', 'G', 'C'};
}

Bytes serialize(const Circuit& c) {
  Bytes out(std::begin(kMagic), std::end(kMagic));
  put_u8(out, 1);
  put_u32(out, c.garbler_inputs);
  put_u32(out, c.evaluator_inputs);
  put_u32(out, static_cast<std::uint32_t>(c.gates.size()));
  for (const auto& g : c.gates) {
    put_u8(out, static_cast<std::uint8_t>(g.type));
    put_u32(out, g.in0);
    put_u32(out, g.type == GateType::kInv ? 0 : g.in1);
  }
  put_u32(out, static_cast<std::uint32_t>(c.outputs.size()));
  for (std::uint32_t o : c.outputs) put_u32(out, o);
  return out;
}

Circuit deserialize(ByteView data) {
  wire::Reader r(data);
  const ByteView magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic)) || r.u8() != 1) {
    throw ParseError("not a serialized circuit");
  }
  Circuit c;
  c.garbler_inputs = r.u32();
  c.evaluator_inputs = r.u32();
  const std::uint32_t ngates = r.u32();
  if (std::size_t{ngates} * 9 > r.remaining()) throw ParseError("truncated circuit");
  c.gates.resize(ngates);
  for (auto& g : c.gates) {
    g.type = static_cast<GateType>(r.u8());
    g.in0 = r.u32();
    g.in1 = r.u32();
  }
  const std::uint32_t nout = r.u32();
  if (std::size_t{nout} * 4 != r.remaining()) throw ParseError("truncated circuit outputs");
  c.outputs.resize(nout);
  for (auto& o : c.outputs) o = r.u32();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return c;
}

crypto::Digest circuit_hash(const Circuit& c) { return crypto::sha256(serialize(c)); }

Circuit random_circuit(std::mt19937_64& rng, std::uint32_t num_inputs, std::uint32_t num_gates,
                       std::uint32_t num_outputs) {
  if (num_inputs == 0) throw InvalidArgument("random circuit needs at least one input");
  Circuit c;
  c.garbler_inputs = num_inputs / 2;
  c.evaluator_inputs = num_inputs - c.garbler_inputs;
  c.gates.reserve(num_gates);
  for (std::uint32_t i = 0; i < num_gates; ++i) {
    std::uniform_int_distribution<std::uint32_t> pick(0, num_inputs + i - 1);
    Gate g;
    g.type = static_cast<GateType>(std::uniform_int_distribution<int>(0, 2)(rng));
    g.in0 = pick(rng);
    g.in1 = g.type == GateType::kInv ? 0 : pick(rng);
    c.gates.push_back(g);
  }
  std::uniform_int_distribution<std::uint32_t> pick_out(0, c.num_wires() - 1);
  for (std::uint32_t i = 0; i < num_outputs; ++i) c.outputs.push_back(pick_out(rng));
  return c;
}

CircuitBuilder::CircuitBuilder(std::uint32_t garbler_inputs, std::uint32_t evaluator_inputs) {
  c_.garbler_inputs = garbler_inputs;
  c_.evaluator_inputs = evaluator_inputs;
}

Bit CircuitBuilder::garbler_input(std::uint32_t i) const {
  if (i >= c_.garbler_inputs) throw InvalidArgument("garbler input out of range");
  return Bit::wire(i);
}

Bit CircuitBuilder::evaluator_input(std::uint32_t i) const {
  if (i >= c_.evaluator_inputs) throw InvalidArgument("evaluator input out of range");
  return Bit::wire(c_.garbler_inputs + i);
}

Word CircuitBuilder::garbler_word(std::uint32_t offset, std::uint32_t width) const {
  Word w;
  for (std::uint32_t i = 0; i < width; ++i) w.push_back(garbler_input(offset + i));
  return w;
}

Word CircuitBuilder::evaluator_word(std::uint32_t offset, std::uint32_t width) const {
  Word w;
  for (std::uint32_t i = 0; i < width; ++i) w.push_back(evaluator_input(offset + i));
  return w;
}

Bit CircuitBuilder::emit(GateType type, Bit a, Bit b) {
  Gate g{type, a.wire_id(), type == GateType::kInv ? 0 : b.wire_id()};
  c_.gates.push_back(g);
  return Bit::wire(c_.num_wires() - 1);
}

Bit CircuitBuilder::xor_(Bit a, Bit b) {
  if (a.is_const() && b.is_const()) return Bit::constant(a.value() != b.value());
  if (a.is_const()) std::swap(a, b);
  if (b.is_const()) return b.value() ? not_(a) : a;
  if (a.wire_id() == b.wire_id()) return Bit::constant(false);
  return emit(GateType::kXor, a, b);
}

Bit CircuitBuilder::and_(Bit a, Bit b) {
  if (a.is_const() && b.is_const()) return Bit::constant(a.value() && b.value());
  if (a.is_const()) std::swap(a, b);
  if (b.is_const()) return b.value() ? a : Bit::constant(false);
  if (a.wire_id() == b.wire_id()) return a;
  return emit(GateType::kAnd, a, b);
}

Bit CircuitBuilder::not_(Bit a) {
  if (a.is_const()) return Bit::constant(!a.value());
  return emit(GateType::kInv, a, a);
}

Bit CircuitBuilder::or_(Bit a, Bit b) { return xor_(xor_(a, b), and_(a, b)); }

Bit CircuitBuilder::mux(Bit s, Bit a, Bit b) { return xor_(a, and_(s, xor_(a, b))); }

Word CircuitBuilder::xor_word(const Word& a, const Word& b) {
  if (a.size() != b.size()) throw InvalidArgument("word width mismatch");
  Word out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(xor_(a[i], b[i]));
  return out;
}

Word CircuitBuilder::mux_word(Bit s, const Word& a, const Word& b) {
  if (a.size() != b.size()) throw InvalidArgument("word width mismatch");
  Word out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(mux(s, a[i], b[i]));
  return out;
}

Word CircuitBuilder::and_word(Bit s, const Word& a) {
  Word out;
  for (const Bit& b : a) out.push_back(and_(s, b));
  return out;
}

Word CircuitBuilder::const_word(std::uint64_t v, std::uint32_t width) {
  Word out;
  for (std::uint32_t i = 0; i < width; ++i) out.push_back(Bit::constant(i < 64 && ((v >> i) & 1)));
  return out;
}

Bit CircuitBuilder::equal(const Word& a, const Word& b) {
  if (a.size() != b.size()) throw InvalidArgument("word width mismatch");
  Bit acc = Bit::constant(true);
  for (std::size_t i = 0; i < a.size(); ++i) acc = and_(acc, not_(xor_(a[i], b[i])));
  return acc;
}

Word CircuitBuilder::add(const Word& a, const Word& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Bit carry = Bit::constant(false);
  Word out;
  for (std::size_t i = 0; i < n; ++i) {
    const Bit x = i < a.size() ? a[i] : Bit::constant(false);
    const Bit y = i < b.size() ? b[i] : Bit::constant(false);
    const Bit xc = xor_(x, carry);
    out.push_back(xor_(xc, y));
    carry = xor_(carry, and_(xc, xor_(y, carry)));
  }
  out.push_back(carry);
  return out;
}

std::pair<Word, Bit> CircuitBuilder::sub(const Word& a, const Word& b) {
  Bit borrow = Bit::constant(false);
  Word out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Bit x = a[i];
    const Bit y = i < b.size() ? b[i] : Bit::constant(false);
    out.push_back(xor_(xor_(x, y), borrow));
    // borrow' = majority(!x, y, borrow)
    borrow = xor_(borrow, and_(not_(xor_(x, borrow)), xor_(y, borrow)));
  }
  for (std::size_t i = a.size(); i < b.size(); ++i) {
    borrow = or_(borrow, b[i]);
  }
  return {out, borrow};
}

Bit CircuitBuilder::le_const(const Word& a, std::uint64_t c) {
  if (a.size() < 64 && c >= (std::uint64_t{1} << a.size()) - 1) return Bit::constant(true);
  // a <= c  <=>  not (c < a)
  const auto [diff, borrow] = sub(const_word(c, static_cast<std::uint32_t>(a.size())), a);
  (void)diff;
  return not_(borrow);
}

Word CircuitBuilder::mod(const Word& a, const Word& d) {
  const std::size_t wd = d.size();
  Word r = const_word(0, static_cast<std::uint32_t>(wd + 1));
  Word dd = d;
  dd.push_back(Bit::constant(false));
  for (std::size_t k = a.size(); k-- > 0;) {
    Word shifted;
    shifted.push_back(a[k]);
    for (std::size_t i = 0; i < wd; ++i) shifted.push_back(r[i]);
    auto [diff, borrow] = sub(shifted, dd);
    r = mux_word(borrow, diff, shifted);
  }
  r.pop_back();
  return r;
}

Word CircuitBuilder::popcount(const std::vector<Bit>& bits) {
  const std::uint32_t width =
      bits.empty() ? 1 : static_cast<std::uint32_t>(std::bit_width(bits.size()));
  Word acc = const_word(0, width);
  for (const Bit& b : bits) {
    Word sum = add(acc, Word{b});
    sum.resize(width);
    acc = std::move(sum);
  }
  return acc;
}

Bit CircuitBuilder::materialize(Bit b) {
  if (!b.is_const()) return b;
  if (c_.num_inputs() == 0) throw InvalidArgument("cannot materialize a constant without inputs");
  const Bit zero = emit(GateType::kXor, Bit::wire(0), Bit::wire(0));
  return b.value() ? emit(GateType::kInv, zero, zero) : zero;
}

void CircuitBuilder::output(Bit b) { c_.outputs.push_back(materialize(b).wire_id()); }

void CircuitBuilder::output(const Word& w) {
  for (const Bit& b : w) output(b);
}

Circuit CircuitBuilder::finish() {
  c_.validate();
  return std::move(c_);
}

}  // namespace pvwm::gc
