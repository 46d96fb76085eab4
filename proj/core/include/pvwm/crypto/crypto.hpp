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
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

#include "pvwm/common/bytes.hpp"

namespace pvwm::crypto {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

using Digest = FixedBytes<32>;

// Fills `out` from the system CSPRNG. Throws pvwm::Error on RNG failure.
void random_bytes(std::span<std::uint8_t> out);
Bytes random_bytes(std::size_t n);

// 32-byte symmetric key. Wiped on destruction.
class SymmetricKey {
 public:
  SymmetricKey() = default;
  explicit SymmetricKey(const FixedBytes<kKeySize>& raw) : bytes_(raw) {}
  static SymmetricKey from_bytes(ByteView raw);

  SymmetricKey(const SymmetricKey&) = default;
  SymmetricKey& operator=(const SymmetricKey&) = default;
  ~SymmetricKey() { secure_zero(bytes_); }

  const FixedBytes<kKeySize>& bytes() const noexcept { return bytes_; }
  ByteView view() const noexcept { return bytes_; }

  friend bool operator==(const SymmetricKey& a, const SymmetricKey& b) noexcept {
    return a.bytes_ == b.bytes_;
  }

 private:
  FixedBytes<kKeySize> bytes_{};
};

SymmetricKey gen_key();

struct AuthCiphertext {
  FixedBytes<kNonceSize> nonce{};
  Bytes body;
  FixedBytes<kTagSize> tag{};

  // nonce || body || tag
  Bytes serialize() const;
  static AuthCiphertext parse(ByteView wire);
};

// AES-256-GCM with a fresh random 96-bit nonce.
AuthCiphertext encrypt(const SymmetricKey& key, ByteView plaintext, ByteView aad = {});
// Same, with a caller-chosen nonce (secure channels use counters).
AuthCiphertext encrypt_with_nonce(const SymmetricKey& key, const FixedBytes<kNonceSize>& nonce,
                                  ByteView plaintext, ByteView aad = {});
// Throws AuthError on tag mismatch; never returns unauthenticated plaintext.
Bytes decrypt(const SymmetricKey& key, const AuthCiphertext& ct, ByteView aad = {});

// 2-out-of-2 XOR sharing.
enum class ShareRole : std::uint8_t { holder = 0, prover = 1 };

struct KeyShare {
  Bytes bytes;
  ShareRole role = ShareRole::holder;
};

struct SharePair {
  KeyShare holder;
  KeyShare prover;
};

SharePair share(ByteView secret);
// Test hook: fixes the holder share instead of drawing it at random.
SharePair share_with_holder_mask(ByteView secret, ByteView holder_share);
Bytes reconstruct(const KeyShare& a, const KeyShare& b);
Bytes reconstruct(ByteView a, ByteView b);

// Hashing.
Digest sha256(ByteView data);
Digest sha256(std::initializer_list<ByteView> parts);
// 8-byte big-endian length prefix followed by the field bytes.
void append_framed(Bytes& out, ByteView field);
Digest hmac_sha256(ByteView key, ByteView data);
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

struct AssetId {
  Digest digest{};
  friend bool operator==(const AssetId&, const AssetId&) = default;
  friend auto operator<=>(const AssetId&, const AssetId&) = default;
};

struct AssetIdHash {
  std::size_t operator()(const AssetId& id) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | id.digest[i];
    return h;
  }
};

// H(frame(owner) || frame(metadata) || frame(date)).
AssetId idgen(ByteView owner_label, ByteView asset_metadata, ByteView date);
AssetId random_id();

// Inputs to idgen, carried inside a watermarking secret so the verifier can
// check that the record it fetched belongs to the requested id.
struct IdBinding {
  std::string owner;
  std::string metadata;
  std::string date;

  AssetId id() const { return idgen(as_bytes(owner), as_bytes(metadata), as_bytes(date)); }
  friend bool operator==(const IdBinding&, const IdBinding&) = default;
};

// Ed25519.
using PublicKey = FixedBytes<32>;
using Signature = FixedBytes<64>;

class SigningKeypair {
 public:
  static SigningKeypair generate();
  static SigningKeypair from_seed(const FixedBytes<32>& seed);

  SigningKeypair(const SigningKeypair&) = default;
  SigningKeypair& operator=(const SigningKeypair&) = default;
  ~SigningKeypair() { secure_zero(seed_); }

  const PublicKey& public_key() const noexcept { return public_; }
  const FixedBytes<32>& seed() const noexcept { return seed_; }

  Signature sign(ByteView message) const;

 private:
  SigningKeypair() = default;
  FixedBytes<32> seed_{};
  PublicKey public_{};
};

bool verify_sig(const PublicKey& pvk, const Signature& sig, ByteView message) noexcept;
// Rejects encodings that are not exactly 64 bytes.
bool verify_sig(const PublicKey& pvk, ByteView sig, ByteView message) noexcept;

// X25519 ephemeral Diffie-Hellman.
class DhKeypair {
 public:
  static DhKeypair generate();

  DhKeypair(const DhKeypair&) = default;
  DhKeypair& operator=(const DhKeypair&) = default;
  ~DhKeypair() { secure_zero(private_); }

  const PublicKey& public_key() const noexcept { return public_; }
  // Throws ProtocolError on a low-order peer key (all-zero shared secret).
  FixedBytes<32> agree(const PublicKey& peer) const;

 private:
  DhKeypair() = default;
  FixedBytes<32> private_{};
  PublicKey public_{};
};

}  // namespace pvwm::crypto
