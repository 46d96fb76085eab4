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

#include "pvwm/gc/ot.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <string>

#include "pvwm/common/error.hpp"
#include "pvwm/crypto/crypto.hpp"

namespace pvwm::gc::ot {

namespace {

struct BnFree {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct PointFree {
  void operator()(EC_POINT* p) const { EC_POINT_clear_free(p); }
};
struct GroupFree {
  void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};
struct CtxFree {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnFree>;
using PointPtr = std::unique_ptr<EC_POINT, PointFree>;

void check(int ok, const char* what) {
  if (ok != 1) throw Error(std::string("elliptic-curve operation failed: ") + what);
}

}  // namespace

struct Group {
  std::unique_ptr<EC_GROUP, GroupFree> group;
  std::unique_ptr<BN_CTX, CtxFree> ctx;
  const BIGNUM* order = nullptr;

  Group()
      : group(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1)), ctx(BN_CTX_new()) {
    if (!group || !ctx) throw Error("cannot create P-256 group");
    order = EC_GROUP_get0_order(group.get());
  }

  PointPtr point() const {
    PointPtr p(EC_POINT_new(group.get()));
    if (!p) throw Error("EC_POINT_new failed");
    return p;
  }

  BnPtr random_scalar() const {
    BnPtr s(BN_new());
    do {
      check(BN_priv_rand_range(s.get(), order), "rand");
    } while (BN_is_zero(s.get()));
    return s;
  }

  BnPtr scalar(const Scalar& raw) const {
    BnPtr s(BN_bin2bn(raw.data(), static_cast<int>(raw.size()), nullptr));
    if (!s) throw Error("BN_bin2bn failed");
    check(BN_nnmod(s.get(), s.get(), order, ctx.get()), "nnmod");
    return s;
  }

  wire::Point encode(const EC_POINT* p) const {
    wire::Point out{};
    const std::size_t n = EC_POINT_point2oct(group.get(), p, POINT_CONVERSION_COMPRESSED,
                                             out.data(), out.size(), ctx.get());
    if (n != out.size()) throw Error("point encoding failed");
    return out;
  }

  PointPtr decode(const wire::Point& raw) const {
    PointPtr p = point();
    if (EC_POINT_oct2point(group.get(), p.get(), raw.data(), raw.size(), ctx.get()) != 1 ||
        EC_POINT_is_at_infinity(group.get(), p.get()) == 1) {
      throw ProtocolError("malformed group element");
    }
    return p;
  }

  // base * s, or G * s when base is null.
  PointPtr mul(const EC_POINT* base, const BIGNUM* s) const {
    PointPtr p = point();
    if (base == nullptr) {
      check(EC_POINT_mul(group.get(), p.get(), s, nullptr, nullptr, ctx.get()), "mul");
    } else {
      check(EC_POINT_mul(group.get(), p.get(), nullptr, base, s, ctx.get()), "mul");
    }
    return p;
  }
};

namespace {

// Per-transfer key: SHA-256(index || A || B || shared point).
crypto::Digest transfer_key(std::uint32_t index, const wire::Point& a, const wire::Point& b,
                            const wire::Point& shared) {
  std::uint8_t idx[4] = {static_cast<std::uint8_t>(index >> 24),
                         static_cast<std::uint8_t>(index >> 16),
                         static_cast<std::uint8_t>(index >> 8), static_cast<std::uint8_t>(index)};
  return crypto::sha256({ByteView(idx, 4), a, b, shared});
}

void seal(const crypto::Digest& key, const Block& msg, std::uint8_t* out) {
  std::uint8_t m[16];
  msg.write(m);
  for (int i = 0; i < 16; ++i) out[i] = m[i] ^ key[static_cast<std::size_t>(i)];
  const crypto::Digest tag = crypto::sha256({key, ByteView(out, 16)});
  std::copy(tag.begin(), tag.begin() + 16, out + 16);
}

}  // namespace

struct Sender::Impl {
  Group g;
  BnPtr a;
  PointPtr big_a;
  PointPtr a_times_a;
  wire::Point a_enc{};
};

Sender::Sender() : impl_(std::make_unique<Impl>()) {
  impl_->a = impl_->g.random_scalar();
  impl_->big_a = impl_->g.mul(nullptr, impl_->a.get());
  impl_->a_times_a = impl_->g.mul(impl_->big_a.get(), impl_->a.get());
  impl_->a_enc = impl_->g.encode(impl_->big_a.get());
}

Sender::Sender(const Scalar& a) : impl_(std::make_unique<Impl>()) {
  impl_->a = impl_->g.scalar(a);
  if (BN_is_zero(impl_->a.get())) throw InvalidArgument("OT scalar must be non-zero");
  impl_->big_a = impl_->g.mul(nullptr, impl_->a.get());
  impl_->a_times_a = impl_->g.mul(impl_->big_a.get(), impl_->a.get());
  impl_->a_enc = impl_->g.encode(impl_->big_a.get());
}

Sender::~Sender() = default;
Sender::Sender(Sender&&) noexcept = default;
Sender& Sender::operator=(Sender&&) noexcept = default;

wire::OtSetup Sender::setup() const { return wire::OtSetup{impl_->a_enc}; }

wire::OtReply Sender::respond(const wire::OtChoices& choices,
                              const std::vector<std::pair<Block, Block>>& messages) const {
  if (choices.b.size() != messages.size()) throw ProtocolError("OT choice count mismatch");
  const Group& g = impl_->g;
  wire::OtReply reply;
  reply.ciphers.resize(messages.size());
  PointPtr diff = g.point();
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const PointPtr b = g.decode(choices.b[i]);
    const PointPtr ab = g.mul(b.get(), impl_->a.get());
    // a(B - A) = aB - aA
    check(EC_POINT_copy(diff.get(), impl_->a_times_a.get()), "copy");
    check(EC_POINT_invert(g.group.get(), diff.get(), g.ctx.get()), "invert");
    check(EC_POINT_add(g.group.get(), diff.get(), ab.get(), diff.get(), g.ctx.get()), "add");
    const auto k0 = transfer_key(static_cast<std::uint32_t>(i), impl_->a_enc, choices.b[i],
                                 g.encode(ab.get()));
    if (EC_POINT_is_at_infinity(g.group.get(), diff.get()) == 1) {
      throw ProtocolError("degenerate OT choice");
    }
    const auto k1 = transfer_key(static_cast<std::uint32_t>(i), impl_->a_enc, choices.b[i],
                                 g.encode(diff.get()));
    seal(k0, messages[i].first, reply.ciphers[i].data());
    seal(k1, messages[i].second, reply.ciphers[i].data() + 32);
  }
  return reply;
}

struct Receiver::Impl {
  Group g;
  PointPtr big_a;
  wire::Point a_enc{};
  BitVector bits;
  std::vector<crypto::Digest> keys;
};

Receiver::Receiver(const wire::OtSetup& setup) : impl_(std::make_unique<Impl>()) {
  impl_->big_a = impl_->g.decode(setup.a);
  impl_->a_enc = setup.a;
}

Receiver::~Receiver() = default;
Receiver::Receiver(Receiver&&) noexcept = default;
Receiver& Receiver::operator=(Receiver&&) noexcept = default;

wire::OtChoices Receiver::choose(const BitVector& bits) {
  std::vector<Scalar> scalars(bits.size());
  for (auto& s : scalars) s = random_scalar();
  return choose_with_scalars(bits, scalars);
}

wire::OtChoices Receiver::choose_with_scalars(const BitVector& bits,
                                              const std::vector<Scalar>& scalars) {
  if (bits.size() != scalars.size()) throw InvalidArgument("one scalar per choice bit required");
  const Group& g = impl_->g;
  impl_->bits = bits;
  impl_->keys.clear();
  impl_->keys.reserve(bits.size());
  wire::OtChoices out;
  out.b.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const BnPtr b = g.scalar(scalars[i]);
    PointPtr big_b = g.mul(nullptr, b.get());
    if (bits[i] & 1) {
      check(EC_POINT_add(g.group.get(), big_b.get(), big_b.get(), impl_->big_a.get(), g.ctx.get()),
            "add");
    }
    if (EC_POINT_is_at_infinity(g.group.get(), big_b.get()) == 1) {
      throw InvalidArgument("degenerate OT scalar");
    }
    out.b.push_back(g.encode(big_b.get()));
    const PointPtr shared = g.mul(impl_->big_a.get(), b.get());
    impl_->keys.push_back(
        transfer_key(static_cast<std::uint32_t>(i), impl_->a_enc, out.b.back(), g.encode(shared.get())));
  }
  return out;
}

std::vector<Block> Receiver::finish(const wire::OtReply& reply) {
  if (reply.ciphers.size() != impl_->keys.size()) throw ProtocolError("OT reply count mismatch");
  std::vector<Block> out;
  out.reserve(reply.ciphers.size());
  for (std::size_t i = 0; i < reply.ciphers.size(); ++i) {
    const auto& key = impl_->keys[i];
    const std::uint8_t* c = reply.ciphers[i].data() + ((impl_->bits[i] & 1) ? 32 : 0);
    const crypto::Digest tag = crypto::sha256({key, ByteView(c, 16)});
    if (!ct_equal(ByteView(tag.data(), 16), ByteView(c + 16, 16))) {
      throw ProtocolError("OT ciphertext failed authentication");
    }
    std::uint8_t m[16];
    for (int j = 0; j < 16; ++j) m[j] = c[j] ^ key[static_cast<std::size_t>(j)];
    out.push_back(Block::from_bytes(ByteView(m, 16)));
  }
  secure_zero(impl_->keys.data(), impl_->keys.size() * sizeof(crypto::Digest));
  impl_->keys.clear();
  return out;
}

Scalar random_scalar() {
  Group g;
  const BnPtr s = g.random_scalar();
  Scalar out{};
  check(BN_bn2binpad(s.get(), out.data(), static_cast<int>(out.size())) == 32 ? 1 : 0, "bn2bin");
  return out;
}

Scalar scalar_add(const Scalar& a, const Scalar& b) {
  Group g;
  const BnPtr x = g.scalar(a);
  const BnPtr y = g.scalar(b);
  BnPtr r(BN_new());
  check(BN_mod_add(r.get(), x.get(), y.get(), g.order, g.ctx.get()), "mod_add");
  Scalar out{};
  check(BN_bn2binpad(r.get(), out.data(), static_cast<int>(out.size())) == 32 ? 1 : 0, "bn2bin");
  return out;
}

}  // namespace pvwm::gc::ot
