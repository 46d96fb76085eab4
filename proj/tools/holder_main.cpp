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

#include <cstdio>
#include <iostream>

#include "cli_util.hpp"
#include "pvwm/client/client.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/harness/harness.hpp"
#include "pvwm/tee/attestation.hpp"

namespace {

void print_timings(const pvwm::client::VerifyOutcome& v) {
  const auto& t = v.timings;
  const double ms[5] = {t.establish_ns / 1e6, t.receive_ns / 1e6, t.reconstruct_ns / 1e6,
                        t.detect_ns / 1e6, t.terminate_ns / 1e6};
  for (int i = 0; i < 5; ++i) std::printf("  %-20s %10.3f ms\n", pvwm::harness::kTaskNames[i], ms[i]);
  std::printf("  %-20s %10.3f ms\n", "total", t.total_ns / 1e6);
  std::printf("  %-20s %10.3f ms\n", "holder_cpu", t.holder_cpu_ns / 1e6);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pvwm;
  CLI::App app{"Asset holder: verify ownership through the prover"};
  app.require_subcommand(1);

  std::string bundle_path;
  std::string suspect_path;
  std::string prover_addr;
  bool no_cache = false;
  bool quiet = false;
  auto* verify = app.add_subcommand("verify", "Verify a suspect asset");
  verify->add_option("--bundle", bundle_path, "Ownership bundle")->required()->check(CLI::ExistingFile);
  verify->add_option("--suspect", suspect_path, "Suspect asset")->required()->check(CLI::ExistingFile);
  verify->add_option("--prover", prover_addr, "Prover address (defaults to the bundle's)");
  verify->add_flag("--no-cache", no_cache, "Skip the memoisation query");
  verify->add_flag("--quiet", quiet, "Print only Valid or Invalid");

  if (const int rc = tools::parse_or_exit(app, argc, argv); rc >= 0) return rc;

  std::optional<net::Endpoint> prover;
  try {
    if (!prover_addr.empty()) prover = net::Endpoint::parse(prover_addr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tools::kUsageExit;
  }

  try {
    net::TcpDialer dialer;
    client::HolderOptions opts;
    opts.use_cache = !no_cache;
    const auto v = client::holder_verify_files(bundle_path, suspect_path, prover, opts, dialer);
    std::cout << (v.valid ? "Valid" : "Invalid") << std::endl;
    if (!quiet) {
      if (v.similarity) std::printf("similarity %.2f\n", *v.similarity);
      if (v.from_cache) std::printf("served from cache\n");
      print_timings(v);
    }
    return v.valid ? 0 : 1;
  } catch (const tee::AttestationError& e) {
    std::cerr << e.what() << "\n";
  } catch (const wire::PeerAborted& e) {
    std::cerr << "aborted by prover: " << wire::abort_name(e.code()) << "\n";
  } catch (const wire::PeerError& e) {
    std::cerr << "error from prover: " << wire::err_name(e.code()) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
