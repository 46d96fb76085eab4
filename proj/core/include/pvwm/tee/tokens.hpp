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
#include <string>

#include "pvwm/crypto/crypto.hpp"
#include "pvwm/tee/attestation.hpp"

namespace pvwm::tee {

// How the prover's token protects the watermarking secret.
//   kEncrypted: tk_H = s_H of k, tk_P = (s_P of k, Enc(k, sec)).
//   kDirect:    tk_H = s_H of sec, tk_P = s_P of sec, no ciphertext.
enum class SecretForm : std::uint8_t { kEncrypted = 1, kDirect = 2 };

const char* form_name(SecretForm form) noexcept;

inline constexpr const char* kProgramName = "pvwm-verify";
inline constexpr const char* kProgramVersion = "1.0";

struct ProgramConfig {
  SecretForm form = SecretForm::kEncrypted;
  bool attested = true;  // false: plain mode, reports carry a zero signature
  bool check_idgen = true;

  std::string canonical() const;
  ProgramDescriptor descriptor() const;
  crypto::Digest measurement() const { return descriptor().measurement(); }
};

struct Tokens {
  Bytes holder;       // tk_H
  Bytes prover;       // s_P
  Bytes ciphertext;   // c_sec, empty for kDirect
};

// Owner side. The secret ciphertext is bound to `id` through the AEAD AAD.
Tokens make_tokens(SecretForm form, const crypto::AssetId& id, ByteView secret);

// Enclave side. Throws AuthError when the shares or ciphertext do not open.
Bytes open_secret(SecretForm form, const crypto::AssetId& id, ByteView holder_token,
                  ByteView prover_share, ByteView ciphertext);

}  // namespace pvwm::tee
