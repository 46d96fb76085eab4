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

#include "pvwm/tee/enclave.hpp"

#include <csignal>
#include <cstdlib>
#include <string>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pvwm/common/error.hpp"

namespace pvwm::tee {

namespace {

// Host <-> enclave process messages. They share the frame codec but live
// outside the public message-type range.
constexpr auto kInit = static_cast<wire::MsgType>(0xe0);
constexpr auto kInitOk = static_cast<wire::MsgType>(0xe1);
constexpr auto kEcall = static_cast<wire::MsgType>(0xe2);
constexpr auto kEcallRet = static_cast<wire::MsgType>(0xe3);
constexpr auto kOcallFetch = static_cast<wire::MsgType>(0xe4);
constexpr auto kOcallRet = static_cast<wire::MsgType>(0xe5);

constexpr int kChildFd = 3;

Bytes encode_init(const ProcessOptions& o) {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(o.program.form));
  out.push_back(o.program.attested ? 1 : 0);
  out.push_back(o.program.check_idgen ? 1 : 0);
  put_u64(out, o.arena_size);
  wire::put_var(out, as_bytes(o.manufacturer_key_path));
  return out;
}

// Ocalls go back over the socket to the host.
class RemoteHost : public Host {
 public:
  explicit RemoteHost(wire::Channel& ch) : ch_(ch) {}
  FetchResult fetch(const crypto::AssetId& id) override {
    ch_.send(kOcallFetch, id.digest);
    const wire::Frame f = ch_.expect(kOcallRet);
    return FetchResult::decode(f.payload);
  }

 private:
  wire::Channel& ch_;
};

[[noreturn]] void child_exec(const std::string& exe) {
  const int flags = ::fcntl(kChildFd, F_GETFD);
  ::fcntl(kChildFd, F_SETFD, flags & ~FD_CLOEXEC);
  const std::string fd_arg = std::to_string(kChildFd);
  ::execl(exe.c_str(), exe.c_str(), "enclave", "--fd", fd_arg.c_str(),
          static_cast<char*>(nullptr));
  ::_exit(127);
}

}  // namespace

ProcessEnclave::ProcessEnclave(net::Socket sock, pid_t pid)
    : channel_(std::move(sock)), pid_(pid) {}

std::unique_ptr<ProcessEnclave> ProcessEnclave::spawn(const ProcessOptions& options) {
  auto [host_end, child_end] = net::socket_pair();
  const pid_t pid = ::fork();
  if (pid < 0) throw IoError("fork failed");
  if (pid == 0) {
    sigset_t none;
    sigemptyset(&none);
    ::sigprocmask(SIG_SETMASK, &none, nullptr);
    host_end.close();
    const int fd = child_end.release();
    if (fd != kChildFd) {
      ::dup2(fd, kChildFd);
      ::close(fd);
    }
    ::close_range(kChildFd + 1, ~0U, 0);
    if (options.exec_path) child_exec(*options.exec_path);
    ::_exit(enclave_main(kChildFd));
  }
  child_end.close();
  std::unique_ptr<ProcessEnclave> e(new ProcessEnclave(std::move(host_end), pid));
  e->channel_.send(kInit, encode_init(options));
  const wire::Frame f = e->channel_.recv();
  if (f.type != kInitOk) throw IoError("enclave process failed to start");
  wire::Reader r(f.payload);
  if (r.u8() != 0) throw IoError("enclave initialisation failed: " + std::string(as_chars(r.take(r.remaining()))));
  e->measurement_ = r.fixed<32>();
  return e;
}

ProcessEnclave::~ProcessEnclave() {
  channel_.socket().close();
  int status = 0;
  if (::waitpid(pid_, &status, 0) < 0) ::kill(pid_, SIGKILL);
}

EcallResult ProcessEnclave::call(std::string_view entry, ByteView input, Host& host) {
  std::lock_guard lock(mu_);
  Bytes msg;
  wire::put_var(msg, as_bytes(entry));
  append(msg, input);
  channel_.send(kEcall, msg);
  for (;;) {
    wire::Frame f = channel_.recv();
    if (f.type == kEcallRet) return EcallResult::decode(f.payload);
    if (f.type != kOcallFetch || f.payload.size() != 32) {
      throw ProtocolError("unexpected message from enclave process");
    }
    crypto::AssetId id;
    std::copy(f.payload.begin(), f.payload.end(), id.digest.begin());
    channel_.send(kOcallRet, host.fetch(id).encode());
  }
}

int enclave_main(int fd) {
  std::signal(SIGPIPE, SIG_IGN);
  net::FramedChannel ch{net::Socket(fd)};
  std::unique_ptr<EnclaveRuntime> runtime;
  try {
    const wire::Frame init = ch.expect(kInit);
    wire::Reader r(init.payload);
    RuntimeOptions opts;
    opts.program.form = static_cast<SecretForm>(r.u8());
    opts.program.attested = r.u8() == 1;
    opts.program.check_idgen = r.u8() == 1;
    opts.arena_size = r.u64();
    const Bytes path = r.var();
    r.expect_end();
    if (opts.program.attested) opts.manufacturer = load_signing_key(std::string(as_chars(path)));
    runtime = std::make_unique<EnclaveRuntime>(std::move(opts));
  } catch (const std::exception& e) {
    Bytes msg{1};
    append(msg, as_bytes(e.what()));
    try {
      ch.send(kInitOk, msg);
    } catch (...) {
    }
    return 1;
  }
  Bytes ok{0};
  append(ok, runtime->measurement());
  ch.send(kInitOk, ok);

  RemoteHost host(ch);
  try {
    for (;;) {
      wire::Frame f;
      try {
        f = ch.recv();
      } catch (const IoError&) {
        return 0;  // host closed the channel
      }
      if (f.type != kEcall) return 2;
      wire::Reader r(f.payload);
      const Bytes entry = r.var();
      const ByteView input = r.take(r.remaining());
      const EcallResult res = runtime->ecall(as_chars(entry), input, host);
      ch.send(kEcallRet, res.encode());
    }
  } catch (const std::exception&) {
    return 2;
  }
}

}  // namespace pvwm::tee
