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

#include "pvwm/tee/attestation.hpp"

#include <sstream>

#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"

namespace pvwm::tee {

namespace {
constexpr std::string_view kKdfLabel = "pvwm-ra-v1";
constexpr std::string_view kFinishLabel = "pvwm-ra-finish";
}  // namespace

crypto::Digest ProgramDescriptor::measurement() const {
  Bytes in;
  crypto::append_framed(in, as_bytes(name));
  crypto::append_framed(in, as_bytes(version));
  crypto::append_framed(in, as_bytes(config));
  return crypto::sha256(in);
}

Bytes report_message(const crypto::Digest& measurement, const crypto::PublicKey& epk) {
  Bytes m(measurement.begin(), measurement.end());
  append(m, epk);
  return m;
}

wire::RaReport sign_report(const crypto::SigningKeypair& manufacturer,
                           const crypto::Digest& measurement, const crypto::PublicKey& epk) {
  wire::RaReport r;
  r.measurement = measurement;
  r.epk = epk;
  r.sig = manufacturer.sign(report_message(measurement, epk));
  return r;
}

void check_report(const crypto::PublicKey& manufacturer, const wire::RaReport& report,
                  const crypto::Digest& expected_measurement, bool skip_signature) {
  if (!skip_signature &&
      !crypto::verify_sig(manufacturer, report.sig, report_message(report.measurement, report.epk))) {
    throw AttestationError("attestation failed: bad report signature");
  }
  if (report.measurement != expected_measurement) {
    throw AttestationError("attestation failed: unexpected enclave measurement");
  }
}

SessionKeys derive_session_keys(const FixedBytes<32>& shared, const FixedBytes<32>& nonce,
                                const crypto::Digest& measurement, const crypto::PublicKey& epk,
                                const crypto::PublicKey& client_epk) {
  Bytes info = to_bytes(kKdfLabel);
  append(info, measurement);
  append(info, epk);
  append(info, client_epk);
  Bytes okm = crypto::hkdf_sha256(shared, nonce, info, 64);
  SessionKeys keys{crypto::SymmetricKey::from_bytes(ByteView(okm).first(32)),
                   crypto::SymmetricKey::from_bytes(ByteView(okm).subspan(32))};
  secure_zero(okm);
  return keys;
}

FixedBytes<16> finish_mac(const crypto::SymmetricKey& confirm, const FixedBytes<32>& nonce,
                          const wire::RaReport& report, const crypto::PublicKey& client_epk) {
  Bytes transcript = to_bytes(kFinishLabel);
  append(transcript, nonce);
  append(transcript, report.encode());
  append(transcript, client_epk);
  const crypto::Digest full = crypto::hmac_sha256(confirm.view(), transcript);
  FixedBytes<16> mac{};
  std::copy(full.begin(), full.begin() + 16, mac.begin());
  return mac;
}

SecureChannel::SecureChannel(const crypto::SymmetricKey& key, Direction outbound)
    : key_(key), outbound_(outbound) {}

namespace {
FixedBytes<crypto::kNonceSize> make_nonce(Direction dir, std::uint64_t counter) {
  FixedBytes<crypto::kNonceSize> n{};
  n[0] = static_cast<std::uint8_t>(dir);
  for (int i = 0; i < 8; ++i) n[4 + i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
  return n;
}
}  // namespace

Bytes SecureChannel::seal(wire::MsgType type, ByteView plaintext) {
  const std::uint64_t counter = ++send_counter_;
  const std::uint8_t aad = static_cast<std::uint8_t>(type);
  const auto ct = crypto::encrypt_with_nonce(key_, make_nonce(outbound_, counter), plaintext,
                                             ByteView(&aad, 1));
  Bytes out;
  out.reserve(8 + ct.body.size() + crypto::kTagSize);
  put_u64(out, counter);
  append(out, ct.body);
  append(out, ct.tag);
  return out;
}

Bytes SecureChannel::open(wire::MsgType type, ByteView sealed) {
  if (sealed.size() < 8 + crypto::kTagSize) throw ParseError("sealed payload too short");
  const std::uint64_t counter = get_u64(sealed);
  if (counter <= recv_counter_) throw ProtocolError("replayed or reordered record");
  const Direction inbound =
      outbound_ == Direction::kToEnclave ? Direction::kToHolder : Direction::kToEnclave;
  crypto::AuthCiphertext ct;
  ct.nonce = make_nonce(inbound, counter);
  ct.body.assign(sealed.begin() + 8, sealed.end() - crypto::kTagSize);
  std::copy(sealed.end() - crypto::kTagSize, sealed.end(), ct.tag.begin());
  const std::uint8_t aad = static_cast<std::uint8_t>(type);
  Bytes plain = crypto::decrypt(key_, ct, ByteView(&aad, 1));
  recv_counter_ = counter;
  return plain;
}

void SecureChannel::wipe() noexcept { key_ = crypto::SymmetricKey{}; }

HolderHandshake::HolderHandshake() : dh_(crypto::DhKeypair::generate()) {
  crypto::random_bytes(nonce_);
}

wire::RaFinish HolderHandshake::on_report(const wire::RaReport& report,
                                          const crypto::PublicKey& manufacturer,
                                          const crypto::Digest& expected_measurement,
                                          bool skip_signature) {
  check_report(manufacturer, report, expected_measurement, skip_signature);
  FixedBytes<32> shared = dh_.agree(report.epk);
  keys_ = derive_session_keys(shared, nonce_, report.measurement, report.epk, dh_.public_key());
  secure_zero(shared);
  return {dh_.public_key(), finish_mac(keys_->confirm, nonce_, report, dh_.public_key())};
}

SecureChannel HolderHandshake::channel() const {
  if (!keys_) throw ProtocolError("handshake not complete");
  return SecureChannel(keys_->session, Direction::kToEnclave);
}

std::string encode_key_file(const char* label, ByteView key) {
  return std::string("-----BEGIN ") + label + "-----\n" + to_base64(key) + "\n-----END " + label +
         "-----\n";
}

Bytes decode_key_file(const std::string& text, const char* label) {
  const std::string begin = std::string("-----BEGIN ") + label + "-----";
  const std::string end = std::string("-----END ") + label + "-----";
  const auto b = text.find(begin);
  const auto e = text.find(end);
  if (b == std::string::npos || e == std::string::npos || e < b) {
    throw ParseError(std::string("missing ") + label + " armour");
  }
  std::string body = text.substr(b + begin.size(), e - b - begin.size());
  std::erase_if(body, [](char c) { return c == '\n' || c == '\r' || c == ' '; });
  return from_base64(body);
}

crypto::PublicKey load_public_key(const std::string& path) {
  const Bytes raw = read_file(path);
  const Bytes key = decode_key_file(std::string(as_chars(raw)), kPublicKeyLabel);
  if (key.size() != 32) throw ParseError("manufacturer public key must be 32 bytes");
  crypto::PublicKey out{};
  std::copy(key.begin(), key.end(), out.begin());
  return out;
}

crypto::SigningKeypair load_signing_key(const std::string& path) {
  Bytes raw = read_file(path);
  Bytes seed = decode_key_file(std::string(as_chars(raw)), kSigningKeyLabel);
  secure_zero(raw);
  if (seed.size() != 32) throw ParseError("manufacturer signing key must be 32 bytes");
  FixedBytes<32> s{};
  std::copy(seed.begin(), seed.end(), s.begin());
  secure_zero(seed);
  auto kp = crypto::SigningKeypair::from_seed(s);
  secure_zero(s);
  return kp;
}

void write_manufacturer_keys(const crypto::SigningKeypair& kp, const std::string& prefix) {
  const std::string pub = encode_key_file(kPublicKeyLabel, kp.public_key());
  write_file_atomic(prefix + ".pub", as_bytes(pub));
  std::string sec = encode_key_file(kSigningKeyLabel, kp.seed());
  write_file_atomic(prefix + ".key", as_bytes(sec), 0600);
  secure_zero(sec.data(), sec.size());
}

}  // namespace pvwm::tee
