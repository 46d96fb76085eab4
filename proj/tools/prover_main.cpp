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

#include <csignal>
#include <cstdio>
#include <iostream>

#include <unistd.h>

#include "cli_util.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/prover/service.hpp"
#include "pvwm/tee/attestation.hpp"
#include "pvwm/tee/enclave.hpp"

namespace {

std::string self_exe() {
  char buf[4096];
  const ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n <= 0) return {};
  return std::string(buf, static_cast<std::size_t>(n));
}

int serve(const std::string& config_path, bool no_exec, const std::string& port_file) {
  using namespace pvwm;
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  prover::ServiceConfig config = prover::load_config(config_path);
  std::optional<std::string> exe;
  if (!no_exec) {
    const std::string self = self_exe();
    if (!self.empty()) exe = self;
  }
  // The enclave starts before any server thread exists.
  auto enclave = prover::make_enclave(config, exe);
  prover::ProverCore core(config, std::move(enclave));
  prover::Server server(core, config.listen);
  server.start();
  const std::string where = config.listen.host + ":" + std::to_string(server.port());
  if (!port_file.empty()) write_file_atomic(port_file, as_bytes(std::to_string(server.port()) + "\n"));
  std::cout << "prover listening on " << where << " mode=" << prover::mode_name(config.mode);
  if (core.enclave() != nullptr) std::cout << " measurement=" << to_hex(core.enclave()->measurement());
  std::cout << std::endl;
  core.log().write(std::string("start mode=") + prover::mode_name(config.mode) + " listen=" + where);

  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  core.log().write("stop");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pvwm;
  CLI::App app{"Watermark verification prover"};
  app.require_subcommand(1);

  std::string config_path;
  bool no_exec = false;
  std::string port_file;
  auto* serve_cmd = app.add_subcommand("serve", "Run the prover service");
  serve_cmd->add_option("--config", config_path, "Service configuration (JSON)")->required();
  serve_cmd->add_flag("--no-exec", no_exec, "Fork the enclave process without re-executing");
  serve_cmd->add_option("--port-file", port_file, "Write the bound port to this file");

  int fd = -1;
  auto* enclave_cmd = app.add_subcommand("enclave", "Enclave process entry (internal)");
  enclave_cmd->add_option("--fd", fd, "Channel descriptor")->required();
  enclave_cmd->group("");

  std::string key_prefix;
  auto* keygen_cmd = app.add_subcommand("keygen", "Create a manufacturer key pair");
  keygen_cmd->add_option("--out", key_prefix, "Writes <out>.pub and <out>.key")->required();

  std::string mode = "tee";
  bool no_idgen = false;
  auto* measure_cmd = app.add_subcommand("measurement", "Print the enclave measurement for a mode");
  measure_cmd->add_option("--mode", mode, "tee, tee-direct or plain")
      ->check(CLI::IsMember({"tee", "tee-direct", "plain", "2pc"}));
  measure_cmd->add_flag("--no-check-idgen", no_idgen, "Enclave without the idgen check");

  if (const int rc = tools::parse_or_exit(app, argc, argv); rc >= 0) return rc;

  try {
    if (*enclave_cmd) return tee::enclave_main(fd);
    if (*serve_cmd) return serve(config_path, no_exec, port_file);
    if (*keygen_cmd) {
      tee::write_manufacturer_keys(crypto::SigningKeypair::generate(), key_prefix);
      std::cout << key_prefix << ".pub\n" << key_prefix << ".key\n";
      return 0;
    }
    if (*measure_cmd) {
      const auto m = prover::parse_mode(mode);
      if (m == prover::ServiceMode::kTwoPc) throw InvalidArgument("2pc mode has no enclave");
      std::cout << to_hex(prover::program_for(m, !no_idgen).measurement()) << "\n";
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tools::kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return tools::kUsageExit;
}
