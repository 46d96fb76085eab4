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
#include <optional>
#include <string>

#include "pvwm/crypto/crypto.hpp"
#include "pvwm/wire/wire.hpp"

// Simulated attestation: a manufacturer key signs (measurement || epk) for a
// measured enclave program, and a holder binds a channel to the attested
// ephemeral key.
namespace pvwm::tee {

struct ProgramDescriptor {
  std::string name;
  std::string version;
  std::string config;  // canonical "key=value;..." form

  // SHA-256(frame(name) || frame(version) || frame(config))
  crypto::Digest measurement() const;
};

class AttestationError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// measurement || epk
Bytes report_message(const crypto::Digest& measurement, const crypto::PublicKey& epk);

wire::RaReport sign_report(const crypto::SigningKeypair& manufacturer,
                           const crypto::Digest& measurement, const crypto::PublicKey& epk);

// Throws AttestationError on a bad signature or an unexpected measurement.
// With `skip_signature` only the measurement is compared (plain mode).
void check_report(const crypto::PublicKey& manufacturer, const wire::RaReport& report,
                  const crypto::Digest& expected_measurement, bool skip_signature = false);

struct SessionKeys {
  crypto::SymmetricKey session;
  crypto::SymmetricKey confirm;
};

// HKDF-SHA-256(ikm = X25519 shared secret, salt = client nonce,
//              info = label || measurement || epk || client_epk), 64 bytes.
SessionKeys derive_session_keys(const FixedBytes<32>& shared, const FixedBytes<32>& nonce,
                                const crypto::Digest& measurement, const crypto::PublicKey& epk,
                                const crypto::PublicKey& client_epk);

// First 16 bytes of HMAC(confirm, label || nonce || report || client_epk).
FixedBytes<16> finish_mac(const crypto::SymmetricKey& confirm, const FixedBytes<32>& nonce,
                          const wire::RaReport& report, const crypto::PublicKey& client_epk);

enum class Direction : std::uint8_t { kToEnclave = 0x01, kToHolder = 0x02 };

// AES-256-GCM record layer. Sealed payload = [u64 counter][ciphertext][tag],
// nonce = direction || 0x000000 || counter, AAD = msg_type.
class SecureChannel {
 public:
  // `outbound` is the direction of messages this endpoint seals.
  SecureChannel(const crypto::SymmetricKey& key, Direction outbound);

  Bytes seal(wire::MsgType type, ByteView plaintext);
  // Throws AuthError on a bad tag and ProtocolError on a stale counter.
  Bytes open(wire::MsgType type, ByteView sealed);

  const crypto::SymmetricKey& key() const noexcept { return key_; }
  void wipe() noexcept;

 private:
  crypto::SymmetricKey key_;
  Direction outbound_;
  std::uint64_t send_counter_ = 0;
  std::uint64_t recv_counter_ = 0;
};

// Holder side of the handshake.
class HolderHandshake {
 public:
  HolderHandshake();
  wire::RaHello hello() const { return {nonce_}; }
  // Verifies the report, derives keys and returns RA_FINISH.
  wire::RaFinish on_report(const wire::RaReport& report, const crypto::PublicKey& manufacturer,
                           const crypto::Digest& expected_measurement, bool skip_signature = false);
  SecureChannel channel() const;

 private:
  FixedBytes<32> nonce_{};
  crypto::DhKeypair dh_;
  std::optional<SessionKeys> keys_;
};

// PEM-like key files: a BEGIN line, base64 body, an END line.
std::string encode_key_file(const char* label, ByteView key);
Bytes decode_key_file(const std::string& text, const char* label);

inline constexpr const char* kPublicKeyLabel = "PVWM MANUFACTURER PUBLIC KEY";
inline constexpr const char* kSigningKeyLabel = "PVWM MANUFACTURER SIGNING KEY";

crypto::PublicKey load_public_key(const std::string& path);
crypto::SigningKeypair load_signing_key(const std::string& path);
// Writes <prefix>.pub and <prefix>.key.
void write_manufacturer_keys(const crypto::SigningKeypair& kp, const std::string& prefix);

}  // namespace pvwm::tee
