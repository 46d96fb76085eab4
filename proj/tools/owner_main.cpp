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

#include <iostream>

#include "cli_util.hpp"
#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"

int main(int argc, char** argv) {
  using namespace pvwm;
  CLI::App app{"Asset owner: watermark, register and issue bundles"};
  app.require_subcommand(1);

  client::OwnerOptions o;
  std::string scheme = "freqywm";
  std::string prover_addr;
  std::string mode = "tee";
  std::string psk_hex;
  std::optional<std::string> metadata;
  std::optional<std::string> date;
  std::optional<std::uint64_t> seed;
  std::uint32_t modulus_bits = o.circuit.modulus_bits;
  std::uint32_t circuit_pairs = o.circuit.num_pairs;

  auto* gen = app.add_subcommand("generate", "Watermark an asset and register its tokens");
  gen->add_option("--asset", o.asset_path, "Original asset file")->required()->check(CLI::ExistingFile);
  gen->add_option("--scheme", scheme, "freqywm, obt or freqywm-2pc")
      ->check(CLI::IsMember({"freqywm", "obt", "freqywm-2pc"}));
  gen->add_option("--out-dir", o.out_dir, "Output directory")->required();
  gen->add_option("--prover", prover_addr, "Prover address host:port")->required();
  gen->add_option("--mode", mode, "tee, tee-direct, plain or 2pc")
      ->check(CLI::IsMember({"tee", "tee-direct", "plain", "2pc"}));
  gen->add_option("--manufacturer-key", o.manufacturer_pub, "Manufacturer public key file");
  gen->add_option("--owner-psk", psk_hex, "Pre-shared owner key (64 hex digits)");
  gen->add_flag("--random-id", o.random_id, "Random asset id instead of idgen");
  gen->add_option("--owner", o.owner, "Owner label for idgen");
  gen->add_option("--metadata", metadata, "Asset metadata for idgen");
  gen->add_option("--date", date, "Date for idgen (YYYY-MM-DD)");
  gen->add_option("--policy", o.policy, "Licence text stored in the bundle");
  gen->add_option("--pairs", o.freqywm.num_pairs, "FreqyWM watermark pairs");
  gen->add_option("--modulus", o.freqywm.modulus, "FreqyWM modulus z");
  gen->add_option("--budget", o.freqywm.budget, "FreqyWM edit budget");
  gen->add_option("--partitions", o.obt.partitions, "OBT partitions");
  gen->add_option("--delta", o.obt.delta, "OBT shift (default: half the value stdev)");
  gen->add_option("--circuit-pairs", circuit_pairs, "2PC watermark pairs");
  gen->add_option("--modulus-bits", modulus_bits, "2PC modulus bits (z = 2^bits)");
  gen->add_option("--seed", seed, "Seed for deterministic pair selection");

  if (const int rc = tools::parse_or_exit(app, argc, argv); rc >= 0) return rc;

  try {
    o.scheme = client::parse_scheme(scheme);
    o.mode = prover::parse_mode(mode);
    o.prover = net::Endpoint::parse(prover_addr);
    if (!psk_hex.empty()) o.owner_psk = fixed_from_hex<32>(psk_hex);
    o.metadata = metadata;
    o.date = date;
    o.seed = seed;
    o.circuit.modulus_bits = modulus_bits;
    o.circuit.num_pairs = circuit_pairs;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tools::kUsageExit;
  }

  try {
    net::TcpDialer dialer;
    const auto r = client::owner_generate(o, dialer);
    std::cout << "id " << to_hex(r.bundle.id.digest) << "\n"
              << "bundle " << r.bundle_path << "\n"
              << "asset " << r.asset_path << "\n"
              << "keystore " << r.keystore_path << "\n";
    return 0;
  } catch (const client::RegistrationFailed& e) {
    std::cerr << "error: " << e.what() << "; no bundle written\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "; no bundle written\n";
  }
  return 2;
}
