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

#include <bit>
#include <cmath>
#include <ctime>
#include <filesystem>

#include "json.hpp"
#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"
#include "pvwm/tee/attestation.hpp"
#include "pvwm/tee/tokens.hpp"

namespace pvwm::client {

namespace fs = std::filesystem;

RegistrationFailed::RegistrationFailed(wire::ErrCode code)
    : Error(std::string("registration rejected: ") + wire::err_name(code)), code_(code) {}

std::string today_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
  return buf;
}

namespace {

struct Prepared {
  std::string watermarked;  // serialised asset
  std::string secret_json;  // empty for 2pc
  Bytes secret_bits;        // packed reduced secret, 2pc only
  std::optional<gc::VerifyCircuitParams> circuit;
  crypto::AssetId id;
  std::string asset_name;
};

std::optional<crypto::IdBinding> make_binding(const OwnerOptions& o, const std::string& watermarked) {
  if (o.random_id) return std::nullopt;
  crypto::IdBinding b;
  b.owner = o.owner;
  b.metadata = o.metadata.value_or(to_hex(crypto::sha256(as_bytes(watermarked))));
  b.date = o.date.value_or(today_utc());
  return b;
}

crypto::AssetId id_for(const std::optional<crypto::IdBinding>& binding) {
  return binding ? binding->id() : crypto::random_id();
}

Prepared prepare_freqywm(const OwnerOptions& o, std::string_view text) {
  const auto original = freqywm::parse_dataset(text);
  freqywm::InsertOptions io;
  io.num_pairs = o.freqywm.num_pairs;
  io.modulus = o.freqywm.modulus;
  io.budget = o.freqywm.budget;
  io.seed = o.seed;
  FixedBytes<32> key{};
  crypto::random_bytes(key);
  auto r = freqywm::insert(original, key, io);
  secure_zero(key);
  Prepared p;
  p.watermarked = freqywm::serialize_dataset(r.watermarked);
  const auto binding = make_binding(o, p.watermarked);
  r.secret.binding = binding;
  p.id = id_for(binding);
  p.secret_json = freqywm::secret_to_json(r.secret);
  p.asset_name = "watermarked.txt";
  return p;
}

Prepared prepare_obt(const OwnerOptions& o, std::string_view text) {
  const auto table = obt::parse_table(text);
  double delta = 0.0;
  if (o.obt.delta) {
    delta = *o.obt.delta;
  } else if (!table.empty()) {
    double mean = 0.0;
    for (const auto& r : table) mean += r.value;
    mean /= static_cast<double>(table.size());
    double var = 0.0;
    for (const auto& r : table) var += (r.value - mean) * (r.value - mean);
    delta = 0.5 * std::sqrt(var / static_cast<double>(table.size()));
  }
  auto secret = obt::secret_gen(o.obt.partitions, delta);
  const auto marked = obt::insert(table, secret);
  Prepared p;
  p.watermarked = obt::serialize_table(marked);
  const auto binding = make_binding(o, p.watermarked);
  secret.binding = binding;
  p.id = id_for(binding);
  p.secret_json = obt::secret_to_json(secret);
  p.asset_name = "watermarked.csv";
  return p;
}

Prepared prepare_2pc(const OwnerOptions& o, std::string_view text) {
  const auto original = freqywm::parse_dataset(text);
  gc::VerifyCircuitParams params = o.circuit;
  freqywm::InsertOptions io;
  io.num_pairs = params.num_pairs;
  io.modulus = params.modulus();
  io.tolerance = params.tolerance;
  io.budget = o.freqywm.budget;
  io.seed = o.seed;
  FixedBytes<32> key{};
  crypto::random_bytes(key);
  auto r = freqywm::insert(original, key, io);
  secure_zero(key);
  r.secret.tolerance = params.tolerance;

  // Size the holder side for the asset: one slot per distinct token, and
  // frequencies with one bit of headroom.
  const auto hist = freqywm::preprocess(r.watermarked);
  std::uint64_t max_freq = 1;
  for (const auto& [tok, f] : hist) max_freq = std::max(max_freq, f);
  params.num_slots = static_cast<std::uint32_t>((hist.size() + 7) / 8 * 8);
  params.freq_bits = std::max<std::uint32_t>(params.freq_bits,
                                             static_cast<std::uint32_t>(std::bit_width(max_freq)) + 1);
  params.min_pairs = static_cast<std::uint32_t>(freqywm::default_min_pairs(params.num_pairs));
  params.validate();

  Prepared p;
  p.watermarked = freqywm::serialize_dataset(r.watermarked);
  const auto binding = make_binding(o, p.watermarked);
  r.secret.binding = binding;
  p.id = id_for(binding);
  p.secret_json = freqywm::secret_to_json(r.secret);
  p.secret_bits = gc::pack_bits(gc::encode_secret(r.secret, params));
  p.circuit = params;
  p.asset_name = "watermarked.txt";
  return p;
}

void register_token(const OwnerOptions& o, net::Dialer& dialer, wire::Register reg) {
  if (o.owner_psk) reg.mac = crypto::hmac_sha256(*o.owner_psk, reg.body());
  net::FramedChannel ch(dialer.dial(o.prover));
  ch.send(wire::MsgType::kRegister, reg.encode());
  try {
    ch.expect(wire::MsgType::kAck);
  } catch (const wire::PeerError& e) {
    throw RegistrationFailed(e.code());
  }
}

}  // namespace

GenerateResult owner_generate(const OwnerOptions& o, net::Dialer& dialer) {
  const bool two_pc = o.scheme == wire::Scheme::kFreqyWm2pc;
  if (two_pc != (o.mode == prover::ServiceMode::kTwoPc)) {
    throw InvalidArgument("scheme freqywm-2pc goes with mode 2pc and only with it");
  }
  const bool attested = o.mode == prover::ServiceMode::kTee || o.mode == prover::ServiceMode::kTeeDirect;
  std::optional<crypto::PublicKey> manufacturer;
  if (attested) {
    if (o.manufacturer_pub.empty()) throw InvalidArgument("a manufacturer public key is required");
    manufacturer = tee::load_public_key(o.manufacturer_pub);
  }

  const Bytes raw = read_file(o.asset_path);
  Prepared p;
  switch (o.scheme) {
    case wire::Scheme::kFreqyWm: p = prepare_freqywm(o, as_chars(raw)); break;
    case wire::Scheme::kObt: p = prepare_obt(o, as_chars(raw)); break;
    case wire::Scheme::kFreqyWm2pc: p = prepare_2pc(o, as_chars(raw)); break;
  }

  Bundle b;
  b.id = p.id;
  b.scheme = o.scheme;
  b.mode = o.mode;
  b.asset = p.asset_name;
  b.prover = o.prover;
  b.manufacturer = manufacturer;
  b.circuit = p.circuit;
  b.policy = o.policy;

  wire::Register reg;
  reg.id = p.id;
  reg.scheme = o.scheme;
  if (two_pc) {
    auto shares = crypto::share(p.secret_bits);
    b.holder_token = std::move(shares.holder.bytes);
    reg.share = std::move(shares.prover.bytes);
    reg.csec = p.circuit->encode();
    secure_zero(p.secret_bits);
  } else {
    const tee::ProgramConfig program = prover::program_for(o.mode, !o.random_id);
    b.measurement = program.measurement();
    auto tokens = tee::make_tokens(program.form, p.id, as_bytes(p.secret_json));
    b.holder_token = std::move(tokens.holder);
    reg.share = std::move(tokens.prover);
    reg.csec = std::move(tokens.ciphertext);
  }

  register_token(o, dialer, std::move(reg));

  fs::create_directories(o.out_dir);
  GenerateResult out;
  out.asset_path = (fs::path(o.out_dir) / p.asset_name).string();
  out.keystore_path = (fs::path(o.out_dir) / "owner_keystore.json").string();
  out.bundle_path = (fs::path(o.out_dir) / "bundle.json").string();

  write_file_atomic(out.asset_path, as_bytes(p.watermarked));
  nlohmann::ordered_json ks;
  ks["version"] = 1;
  ks["id"] = to_hex(p.id.digest);
  ks["scheme"] = scheme_name(o.scheme);
  ks["secret"] = nlohmann::json::parse(p.secret_json);
  std::string ks_text = ks.dump(2) + "\n";
  write_file_atomic(out.keystore_path, as_bytes(ks_text), 0600);
  secure_zero(ks_text.data(), ks_text.size());
  secure_zero(p.secret_json.data(), p.secret_json.size());
  write_file_atomic(out.bundle_path, as_bytes(b.to_json()));
  out.bundle = std::move(b);
  return out;
}

}  // namespace pvwm::client
