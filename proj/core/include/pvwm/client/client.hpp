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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvwm/crypto/crypto.hpp"
#include "pvwm/gc/verify_circuit.hpp"
#include "pvwm/net/net.hpp"
#include "pvwm/prover/config.hpp"
#include "pvwm/wire/wire.hpp"

namespace pvwm::client {

const char* scheme_name(wire::Scheme scheme) noexcept;
wire::Scheme parse_scheme(std::string_view text);

// Everything a holder needs to verify without contacting the owner.
struct Bundle {
  crypto::AssetId id;
  wire::Scheme scheme = wire::Scheme::kFreqyWm;
  prover::ServiceMode mode = prover::ServiceMode::kTee;
  std::string asset;  // watermarked asset file, relative to the bundle
  Bytes holder_token;  // tk_H
  net::Endpoint prover;
  crypto::Digest measurement{};            // pinned enclave measurement
  std::optional<crypto::PublicKey> manufacturer;
  std::optional<gc::VerifyCircuitParams> circuit;  // 2pc only
  std::string policy;                      // opaque licence text

  std::string to_json() const;
  static Bundle from_json(std::string_view text);
  static Bundle load(const std::string& path);
};

// Items of an asset for MinHash and Jaccard. FreqyWM assets contribute one
// item per token occurrence ("tok\x1f0", "tok\x1f1", ...) so the set view
// keeps frequencies; OBT tables contribute one "pk,value" line per row.
std::vector<std::string> asset_tokens(wire::Scheme scheme, std::string_view asset);

struct FreqyWmOptions {
  std::size_t num_pairs = 30;
  std::uint64_t modulus = 257;
  std::optional<std::size_t> budget;
};

struct ObtOptions {
  std::size_t partitions = 32;
  // Defaults to half the sample standard deviation of the table's values.
  std::optional<double> delta;
};

struct OwnerOptions {
  std::string asset_path;
  wire::Scheme scheme = wire::Scheme::kFreqyWm;
  std::string out_dir;
  net::Endpoint prover;
  prover::ServiceMode mode = prover::ServiceMode::kTee;
  std::string manufacturer_pub;  // public key file; unused in plain and 2pc
  std::optional<FixedBytes<32>> owner_psk;
  bool random_id = false;
  std::string owner = "owner";
  std::optional<std::string> metadata;  // defaults to a digest of the watermarked asset
  std::optional<std::string> date;      // defaults to today (UTC)
  std::string policy;
  FreqyWmOptions freqywm;
  ObtOptions obt;
  gc::VerifyCircuitParams circuit;  // num_pairs, modulus_bits and tolerance for 2pc
  std::optional<std::uint64_t> seed;
};

struct GenerateResult {
  Bundle bundle;
  std::string bundle_path;
  std::string asset_path;
  std::string keystore_path;
};

class RegistrationFailed : public Error {
 public:
  explicit RegistrationFailed(wire::ErrCode code);
  wire::ErrCode code() const noexcept { return code_; }

 private:
  wire::ErrCode code_;
};

// Watermarks the asset, registers tk_P and, only after the prover ACKs,
// writes the watermarked asset, the owner keystore and the bundle.
GenerateResult owner_generate(const OwnerOptions& options, net::Dialer& dialer);

std::string today_utc();

// The five verification tasks, in nanoseconds.
struct TaskTimings {
  std::uint64_t establish_ns = 0;
  std::uint64_t receive_ns = 0;
  std::uint64_t reconstruct_ns = 0;
  std::uint64_t detect_ns = 0;
  std::uint64_t terminate_ns = 0;
  std::uint64_t total_ns = 0;
  std::uint64_t holder_cpu_ns = 0;
};

struct VerifyOutcome {
  bool valid = false;
  bool from_cache = false;
  std::optional<double> similarity;
  TaskTimings timings;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

struct HolderOptions {
  bool use_cache = true;
  std::chrono::milliseconds timeout{30000};
};

// Throws tee::AttestationError, wire::PeerAborted, wire::PeerError or
// IoError.
VerifyOutcome holder_verify(const Bundle& bundle, std::string_view reference_asset,
                            std::string_view suspect, const net::Endpoint& prover,
                            const HolderOptions& options, net::Dialer& dialer);

// Convenience: loads the bundle, its reference asset and the suspect file.
VerifyOutcome holder_verify_files(const std::string& bundle_path, const std::string& suspect_path,
                                  std::optional<net::Endpoint> prover, const HolderOptions& options,
                                  net::Dialer& dialer);

}  // namespace pvwm::client
