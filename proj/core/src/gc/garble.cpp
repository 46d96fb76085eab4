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

#include "pvwm/gc/garble.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <string>

#include "pvwm/common/error.hpp"
#include "pvwm/crypto/crypto.hpp"

namespace pvwm::gc {

Block Block::random() {
  std::uint8_t raw[16];
  crypto::random_bytes(raw);
  return from_bytes(ByteView(raw, 16));
}

Block Block::from_bytes(ByteView b) {
  if (b.size() != 16) throw InvalidArgument("block must be 16 bytes");
  Block out;
  for (int i = 7; i >= 0; --i) out.lo = (out.lo << 8) | b[static_cast<std::size_t>(i)];
  for (int i = 15; i >= 8; --i) out.hi = (out.hi << 8) | b[static_cast<std::size_t>(i)];
  return out;
}

void Block::write(std::uint8_t* out) const noexcept {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(lo >> (8 * i));
  for (int i = 0; i < 8; ++i) out[8 + i] = static_cast<std::uint8_t>(hi >> (8 * i));
}

namespace {

constexpr std::uint8_t kFixedKey[16] = {0x61, 0x7e, 0x8d, 0xa2, 0xa0, 0x51, 0x1e, 0x96,
                                        0x5e, 0x41, 0xc2, 0x9b, 0x15, 0x3f, 0xc7, 0x7a};

// s(hi || lo) = (hi ^ lo) || hi
Block sigma(const Block& x) noexcept { return {x.hi, x.hi ^ x.lo}; }

}  // namespace

FixedKeyHash::FixedKeyHash() {
  auto* ctx = EVP_CIPHER_CTX_new();
  if (ctx == nullptr || EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, kFixedKey, nullptr) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    throw Error("cannot initialise fixed-key AES");
  }
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  ctx_ = ctx;
}

FixedKeyHash::~FixedKeyHash() { EVP_CIPHER_CTX_free(static_cast<EVP_CIPHER_CTX*>(ctx_)); }

void FixedKeyHash::hash(const Block* in, const std::uint64_t* tweaks, Block* out, std::size_t n) {
  constexpr std::size_t kBatch = 64;
  std::uint8_t buf[kBatch * 16];
  std::uint8_t enc[kBatch * 16];
  Block pre[kBatch];
  for (std::size_t base = 0; base < n; base += kBatch) {
    const std::size_t m = std::min(kBatch, n - base);
    for (std::size_t i = 0; i < m; ++i) {
      pre[i] = sigma(in[base + i]) ^ Block{tweaks[base + i], 0};
      pre[i].write(buf + 16 * i);
    }
    int len = 0;
    if (EVP_EncryptUpdate(static_cast<EVP_CIPHER_CTX*>(ctx_), enc, &len, buf,
                          static_cast<int>(16 * m)) != 1) {
      throw Error("fixed-key AES failed");
    }
    for (std::size_t i = 0; i < m; ++i) {
      out[base + i] = Block::from_bytes(ByteView(enc + 16 * i, 16)) ^ pre[i];
    }
  }
}

Garbling garble(const Circuit& c) {
  c.validate();
  Garbling g;
  Block delta = Block::random();
  delta.lo |= 1;
  g.e.delta = delta;

  std::vector<Block> w(c.num_wires());
  g.e.zero_labels.reserve(c.num_inputs());
  for (std::uint32_t i = 0; i < c.num_inputs(); ++i) {
    w[i] = Block::random();
    g.e.zero_labels.push_back(w[i]);
  }
  g.f.tables.reserve(2 * c.and_count());

  FixedKeyHash h;
  std::uint32_t out = c.num_inputs();
  std::uint64_t gid = 0;
  for (const auto& gate : c.gates) {
    switch (gate.type) {
      case GateType::kXor:
        w[out] = w[gate.in0] ^ w[gate.in1];
        break;
      case GateType::kInv:
        w[out] = w[gate.in0] ^ delta;
        break;
      case GateType::kAnd: {
        const Block a0 = w[gate.in0];
        const Block b0 = w[gate.in1];
        const bool pa = a0.lsb();
        const bool pb = b0.lsb();
        const Block in[4] = {a0, a0 ^ delta, b0, b0 ^ delta};
        const std::uint64_t tw[4] = {2 * gid, 2 * gid, 2 * gid + 1, 2 * gid + 1};
        Block hv[4];
        h.hash(in, tw, hv, 4);
        // Garbler half: knows pb.
        const Block tg = hv[0] ^ hv[1] ^ select(pb, delta);
        const Block wg = hv[0] ^ select(pa, tg);
        // Evaluator half: learns b ^ pb in the clear.
        const Block te = hv[2] ^ hv[3] ^ a0;
        const Block we = hv[2] ^ select(pb, te ^ a0);
        w[out] = wg ^ we;
        g.f.tables.push_back(tg);
        g.f.tables.push_back(te);
        ++gid;
        break;
      }
    }
    ++out;
  }
  g.d.reserve(c.outputs.size());
  for (std::uint32_t o : c.outputs) g.d.push_back(w[o].lsb() ? 1 : 0);
  return g;
}

std::vector<Block> encode(const EncodingInfo& e, const BitVector& x, std::size_t offset) {
  if (offset + x.size() > e.zero_labels.size()) throw InvalidArgument("input width mismatch");
  std::vector<Block> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.push_back(e.zero_labels[offset + i] ^ select(x[i] & 1, e.delta));
  }
  return out;
}

std::vector<Block> eval(const Circuit& c, const GarbledCircuit& f, const std::vector<Block>& x) {
  c.validate();
  if (x.size() != c.num_inputs()) {
    throw InvalidArgument("label count " + std::to_string(x.size()) + " != input width " +
                          std::to_string(c.num_inputs()));
  }
  if (f.tables.size() != 2 * c.and_count()) throw InvalidArgument("garbled table count mismatch");
  std::vector<Block> w(c.num_wires());
  std::copy(x.begin(), x.end(), w.begin());
  FixedKeyHash h;
  std::uint32_t out = c.num_inputs();
  std::uint64_t gid = 0;
  for (const auto& gate : c.gates) {
    switch (gate.type) {
      case GateType::kXor:
        w[out] = w[gate.in0] ^ w[gate.in1];
        break;
      case GateType::kInv:
        w[out] = w[gate.in0];
        break;
      case GateType::kAnd: {
        const Block a = w[gate.in0];
        const Block b = w[gate.in1];
        const Block in[2] = {a, b};
        const std::uint64_t tw[2] = {2 * gid, 2 * gid + 1};
        Block hv[2];
        h.hash(in, tw, hv, 2);
        const Block& tg = f.tables[2 * gid];
        const Block& te = f.tables[2 * gid + 1];
        const Block wg = hv[0] ^ select(a.lsb(), tg);
        const Block we = hv[1] ^ select(b.lsb(), te ^ a);
        w[out] = wg ^ we;
        ++gid;
        break;
      }
    }
    ++out;
  }
  std::vector<Block> y;
  y.reserve(c.outputs.size());
  for (std::uint32_t o : c.outputs) y.push_back(w[o]);
  return y;
}

BitVector decode(const DecodingInfo& d, const std::vector<Block>& y) {
  if (d.size() != y.size()) throw InvalidArgument("output width mismatch");
  BitVector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i].lsb() ? 1 : 0) ^ d[i];
  return out;
}

Bytes blocks_to_bytes(const std::vector<Block>& blocks) {
  Bytes out(blocks.size() * 16);
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].write(out.data() + 16 * i);
  return out;
}

std::vector<Block> blocks_from_bytes(ByteView bytes) {
  if (bytes.size() % 16 != 0) throw ParseError("block buffer has a partial block");
  std::vector<Block> out(bytes.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Block::from_bytes(bytes.subspan(16 * i, 16));
  return out;
}

}  // namespace pvwm::gc
