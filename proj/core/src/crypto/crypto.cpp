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

#include "pvwm/crypto/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/params.h>
#include <openssl/rand.h>

#include <memory>

#include "pvwm/common/error.hpp"

namespace pvwm::crypto {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const noexcept { EVP_CIPHER_CTX_free(p); }
};
struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const noexcept { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const noexcept { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const noexcept { EVP_MD_CTX_free(p); }
};
struct KdfCtxDeleter {
  void operator()(EVP_KDF_CTX* p) const noexcept { EVP_KDF_CTX_free(p); }
};

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using KdfCtx = std::unique_ptr<EVP_KDF_CTX, KdfCtxDeleter>;

void check(int rc, const char* what) {
  if (rc != 1) throw Error(std::string("openssl: ") + what + " failed");
}

}  // namespace

void random_bytes(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error("system RNG failure");
  }
}

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  random_bytes(out);
  return out;
}

SymmetricKey SymmetricKey::from_bytes(ByteView raw) {
  if (raw.size() != kKeySize) throw InvalidArgument("symmetric key must be 32 bytes");
  FixedBytes<kKeySize> k{};
  std::copy(raw.begin(), raw.end(), k.begin());
  SymmetricKey key(k);
  secure_zero(k);
  return key;
}

SymmetricKey gen_key() {
  FixedBytes<kKeySize> k{};
  random_bytes(k);
  SymmetricKey key(k);
  secure_zero(k);
  return key;
}

Bytes AuthCiphertext::serialize() const {
  Bytes out;
  out.reserve(kNonceSize + body.size() + kTagSize);
  append(out, nonce);
  append(out, body);
  append(out, tag);
  return out;
}

AuthCiphertext AuthCiphertext::parse(ByteView wire) {
  if (wire.size() < kNonceSize + kTagSize) throw ParseError("ciphertext too short");
  AuthCiphertext ct;
  std::copy_n(wire.begin(), kNonceSize, ct.nonce.begin());
  ct.body.assign(wire.begin() + kNonceSize, wire.end() - kTagSize);
  std::copy(wire.end() - kTagSize, wire.end(), ct.tag.begin());
  return ct;
}

AuthCiphertext encrypt(const SymmetricKey& key, ByteView plaintext, ByteView aad) {
  FixedBytes<kNonceSize> nonce{};
  random_bytes(nonce);
  return encrypt_with_nonce(key, nonce, plaintext, aad);
}

AuthCiphertext encrypt_with_nonce(const SymmetricKey& key, const FixedBytes<kNonceSize>& nonce,
                                  ByteView plaintext, ByteView aad) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error("openssl: cipher context allocation failed");
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "gcm init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr), "gcm ivlen");
  check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), nonce.data()),
        "gcm key");
  int len = 0;
  if (!aad.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "gcm aad");
  }
  AuthCiphertext ct;
  ct.nonce = nonce;
  ct.body.resize(plaintext.size());
  if (!plaintext.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), ct.body.data(), &len, plaintext.data(),
                            static_cast<int>(plaintext.size())),
          "gcm encrypt");
  }
  check(EVP_EncryptFinal_ex(ctx.get(), ct.body.data() + plaintext.size(), &len), "gcm final");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, ct.tag.data()),
        "gcm tag");
  return ct;
}

Bytes decrypt(const SymmetricKey& key, const AuthCiphertext& ct, ByteView aad) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error("openssl: cipher context allocation failed");
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "gcm init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr), "gcm ivlen");
  check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), ct.nonce.data()),
        "gcm key");
  int len = 0;
  if (!aad.empty()) {
    check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "gcm aad");
  }
  Bytes out(ct.body.size());
  if (!ct.body.empty()) {
    check(EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct.body.data(),
                            static_cast<int>(ct.body.size())),
          "gcm decrypt");
  }
  FixedBytes<kTagSize> tag = ct.tag;
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()), "gcm tag");
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + out.size(), &len) != 1) {
    secure_zero(out);
    throw AuthError("authentication failed: tampered ciphertext or wrong key");
  }
  return out;
}

SharePair share(ByteView secret) {
  if (secret.empty()) throw InvalidArgument("cannot share an empty secret");
  Bytes mask = random_bytes(secret.size());
  SharePair pair = share_with_holder_mask(secret, mask);
  secure_zero(mask);
  return pair;
}

SharePair share_with_holder_mask(ByteView secret, ByteView holder_share) {
  if (secret.empty()) throw InvalidArgument("cannot share an empty secret");
  if (holder_share.size() != secret.size()) {
    throw InvalidArgument("holder share length must equal secret length");
  }
  SharePair pair;
  pair.holder = {Bytes(holder_share.begin(), holder_share.end()), ShareRole::holder};
  pair.prover = {reconstruct(secret, holder_share), ShareRole::prover};
  return pair;
}

Bytes reconstruct(const KeyShare& a, const KeyShare& b) { return reconstruct(a.bytes, b.bytes); }

Bytes reconstruct(ByteView a, ByteView b) {
  if (a.size() != b.size()) throw InvalidArgument("share length mismatch");
  Bytes out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

Digest sha256(ByteView data) { return sha256({data}); }

Digest sha256(std::initializer_list<ByteView> parts) {
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx) throw Error("openssl: digest context allocation failed");
  check(EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr), "sha256 init");
  for (ByteView p : parts) {
    check(EVP_DigestUpdate(ctx.get(), p.data(), p.size()), "sha256 update");
  }
  Digest out{};
  unsigned int len = 0;
  check(EVP_DigestFinal_ex(ctx.get(), out.data(), &len), "sha256 final");
  return out;
}

void append_framed(Bytes& out, ByteView field) {
  put_u64(out, field.size());
  append(out, field);
}

Digest hmac_sha256(ByteView key, ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
           out.data(), &len) == nullptr) {
    throw Error("openssl: hmac failed");
  }
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  std::unique_ptr<EVP_KDF, decltype(&EVP_KDF_free)> kdf(EVP_KDF_fetch(nullptr, "HKDF", nullptr),
                                                        &EVP_KDF_free);
  if (!kdf) throw Error("openssl: HKDF unavailable");
  KdfCtx ctx(EVP_KDF_CTX_new(kdf.get()));
  if (!ctx) throw Error("openssl: kdf context allocation failed");
  char digest[] = "SHA256";
  OSSL_PARAM params[5];
  std::size_t n = 0;
  params[n++] = OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0);
  params[n++] = OSSL_PARAM_construct_octet_string(
      OSSL_KDF_PARAM_KEY, const_cast<std::uint8_t*>(ikm.data()), ikm.size());
  if (!salt.empty()) {
    params[n++] = OSSL_PARAM_construct_octet_string(
        OSSL_KDF_PARAM_SALT, const_cast<std::uint8_t*>(salt.data()), salt.size());
  }
  params[n++] = OSSL_PARAM_construct_octet_string(
      OSSL_KDF_PARAM_INFO, const_cast<std::uint8_t*>(info.data()), info.size());
  params[n] = OSSL_PARAM_construct_end();
  Bytes out(length);
  check(EVP_KDF_derive(ctx.get(), out.data(), out.size(), params), "hkdf derive");
  return out;
}

AssetId idgen(ByteView owner_label, ByteView asset_metadata, ByteView date) {
  Bytes framed;
  framed.reserve(24 + owner_label.size() + asset_metadata.size() + date.size());
  append_framed(framed, owner_label);
  append_framed(framed, asset_metadata);
  append_framed(framed, date);
  return AssetId{sha256(framed)};
}

AssetId random_id() {
  AssetId id;
  random_bytes(id.digest);
  return id;
}

SigningKeypair SigningKeypair::generate() {
  FixedBytes<32> seed{};
  random_bytes(seed);
  SigningKeypair kp = from_seed(seed);
  secure_zero(seed);
  return kp;
}

SigningKeypair SigningKeypair::from_seed(const FixedBytes<32>& seed) {
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
  if (!key) throw Error("openssl: ed25519 key import failed");
  SigningKeypair kp;
  kp.seed_ = seed;
  std::size_t len = kp.public_.size();
  check(EVP_PKEY_get_raw_public_key(key.get(), kp.public_.data(), &len), "ed25519 public key");
  return kp;
}

Signature SigningKeypair::sign(ByteView message) const {
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed_.data(), seed_.size()));
  if (!key) throw Error("openssl: ed25519 key import failed");
  MdCtx ctx(EVP_MD_CTX_new());
  check(EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()), "ed25519 sign init");
  Signature sig{};
  std::size_t len = sig.size();
  check(EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()),
        "ed25519 sign");
  return sig;
}

bool verify_sig(const PublicKey& pvk, const Signature& sig, ByteView message) noexcept {
  Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pvk.data(), pvk.size()));
  if (!key) return false;
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) == 1;
}

bool verify_sig(const PublicKey& pvk, ByteView sig, ByteView message) noexcept {
  if (sig.size() != 64) return false;
  Signature fixed{};
  std::copy(sig.begin(), sig.end(), fixed.begin());
  return verify_sig(pvk, fixed, message);
}

DhKeypair DhKeypair::generate() {
  DhKeypair kp;
  random_bytes(kp.private_);
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, kp.private_.data(),
                                        kp.private_.size()));
  if (!key) throw Error("openssl: x25519 key import failed");
  std::size_t len = kp.public_.size();
  check(EVP_PKEY_get_raw_public_key(key.get(), kp.public_.data(), &len), "x25519 public key");
  return kp;
}

FixedBytes<32> DhKeypair::agree(const PublicKey& peer) const {
  Pkey self(
      EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, private_.data(), private_.size()));
  Pkey other(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer.data(), peer.size()));
  if (!self || !other) throw ProtocolError("x25519 key import failed");
  PkeyCtx ctx(EVP_PKEY_CTX_new(self.get(), nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), other.get()) != 1) {
    throw ProtocolError("x25519 derive setup failed");
  }
  FixedBytes<32> shared{};
  std::size_t len = shared.size();
  if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != shared.size()) {
    throw ProtocolError("x25519 agreement failed (low-order peer key?)");
  }
  return shared;
}

}  // namespace pvwm::crypto
