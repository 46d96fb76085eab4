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

#include "pvwm/tee/tokens.hpp"

#include "pvwm/common/error.hpp"

namespace pvwm::tee {

const char* form_name(SecretForm form) noexcept {
  switch (form) {
    case SecretForm::kEncrypted: return "encrypted";
    case SecretForm::kDirect: return "direct";
  }
  return "unknown";
}

std::string ProgramConfig::canonical() const {
  std::string out = "form=";
  out += form_name(form);
  out += ";attested=";
  out += attested ? '1' : '0';
  out += ";check_idgen=";
  out += check_idgen ? '1' : '0';
  return out;
}

ProgramDescriptor ProgramConfig::descriptor() const {
  return {kProgramName, kProgramVersion, canonical()};
}

Tokens make_tokens(SecretForm form, const crypto::AssetId& id, ByteView secret) {
  Tokens t;
  if (form == SecretForm::kDirect) {
    auto pair = crypto::share(secret);
    t.holder = std::move(pair.holder.bytes);
    t.prover = std::move(pair.prover.bytes);
    return t;
  }
  const crypto::SymmetricKey k = crypto::gen_key();
  t.ciphertext = crypto::encrypt(k, secret, id.digest).serialize();
  auto pair = crypto::share(k.view());
  t.holder = std::move(pair.holder.bytes);
  t.prover = std::move(pair.prover.bytes);
  return t;
}

Bytes open_secret(SecretForm form, const crypto::AssetId& id, ByteView holder_token,
                  ByteView prover_share, ByteView ciphertext) {
  if (holder_token.size() != prover_share.size()) throw AuthError("token length mismatch");
  if (form == SecretForm::kDirect) return crypto::reconstruct(holder_token, prover_share);
  if (holder_token.size() != crypto::kKeySize) throw AuthError("key share must be 32 bytes");
  Bytes raw = crypto::reconstruct(holder_token, prover_share);
  const crypto::SymmetricKey k = crypto::SymmetricKey::from_bytes(raw);
  secure_zero(raw);
  return crypto::decrypt(k, crypto::AuthCiphertext::parse(ciphertext), id.digest);
}

}  // namespace pvwm::tee
