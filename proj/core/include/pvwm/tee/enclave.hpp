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

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <sys/types.h>

#include "pvwm/net/net.hpp"
#include "pvwm/tee/runtime.hpp"

namespace pvwm::tee {

// Host-side handle on an enclave. Calls are controlled invocations of a
// named entry; `host` services ocalls made during the call.
class Enclave {
 public:
  virtual ~Enclave() = default;
  virtual EcallResult call(std::string_view entry, ByteView input, Host& host) = 0;
  virtual const crypto::Digest& measurement() const noexcept = 0;
};

// Same-process context object, for tests and benchmarks.
class InlineEnclave : public Enclave {
 public:
  explicit InlineEnclave(RuntimeOptions options) : runtime_(std::move(options)) {}
  EcallResult call(std::string_view entry, ByteView input, Host& host) override {
    return runtime_.ecall(entry, input, host);
  }
  const crypto::Digest& measurement() const noexcept override { return runtime_.measurement(); }
  EnclaveRuntime& runtime() noexcept { return runtime_; }

 private:
  EnclaveRuntime runtime_;
};

struct ProcessOptions {
  ProgramConfig program;
  // Read by the enclave process, never by the host.
  std::string manufacturer_key_path;
  std::size_t arena_size = Arena::kDefaultSize;
  // When set, the child execs `exe enclave --fd N` instead of running the
  // enclave loop in the forked image.
  std::optional<std::string> exec_path;
};

// Enclave in a separate process, reached over a socketpair. Calls are
// serialised.
class ProcessEnclave : public Enclave {
 public:
  static std::unique_ptr<ProcessEnclave> spawn(const ProcessOptions& options);
  ~ProcessEnclave() override;

  EcallResult call(std::string_view entry, ByteView input, Host& host) override;
  const crypto::Digest& measurement() const noexcept override { return measurement_; }
  pid_t pid() const noexcept { return pid_; }

 private:
  ProcessEnclave(net::Socket sock, pid_t pid);

  std::mutex mu_;
  net::FramedChannel channel_;
  pid_t pid_;
  crypto::Digest measurement_{};
};

// Child side: reads the INIT message, loads the manufacturer key and serves
// ecalls until the host closes the socket. Returns a process exit code.
int enclave_main(int fd);

}  // namespace pvwm::tee
