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

#include "pvwm/prover/token_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "pvwm/common/error.hpp"

namespace pvwm::prover {

namespace {

constexpr std::size_t kChecksumSize = 16;
constexpr std::uint32_t kMaxRecord = 16u << 20;

[[noreturn]] void fail(const std::string& what) {
  throw IoError(what + ": " + std::strerror(errno));
}

Bytes record_body(const TokenRecord& r) {
  wire::Register m{r.id, r.scheme, r.share, r.csec, std::nullopt};
  return m.body();
}

void write_all(int fd, ByteView data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("token store write");
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

TokenStore::TokenStore(std::string path) : path_(std::move(path)) {
  if (path_.empty()) return;
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0600);
  if (fd_ < 0) fail("open token store " + path_);
  replay();
}

TokenStore::~TokenStore() {
  if (fd_ >= 0) ::close(fd_);
}

void TokenStore::replay() {
  struct stat st{};
  if (::fstat(fd_, &st) != 0) fail("stat token store");
  Bytes data(static_cast<std::size_t>(st.st_size));
  std::size_t got = 0;
  while (got < data.size()) {
    const ssize_t n = ::pread(fd_, data.data() + got, data.size() - got, static_cast<off_t>(got));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("read token store");
    }
    if (n == 0) break;
    got += static_cast<std::size_t>(n);
  }
  data.resize(got);

  std::size_t pos = 0;
  while (data.size() - pos >= 4) {
    const std::uint32_t len = get_u32(ByteView(data).subspan(pos));
    if (len == 0 || len > kMaxRecord || data.size() - pos - 4 < len + kChecksumSize) break;
    const ByteView body = ByteView(data).subspan(pos + 4, len);
    const ByteView sum = ByteView(data).subspan(pos + 4 + len, kChecksumSize);
    const crypto::Digest d = crypto::sha256(body);
    if (!ct_equal(ByteView(d).first(kChecksumSize), sum)) break;
    wire::Register m;
    try {
      m = wire::Register::decode(body);
    } catch (const ParseError&) {
      break;
    }
    if (m.mac) break;
    index_.emplace(m.id, TokenRecord{m.id, m.scheme, std::move(m.share), std::move(m.csec)});
    pos += 4 + len + kChecksumSize;
  }
  if (pos != data.size()) {
    truncated_ = data.size() - pos;
    if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) fail("truncate token store");
    if (::fsync(fd_) != 0) fail("fsync token store");
  }
  if (::lseek(fd_, static_cast<off_t>(pos), SEEK_SET) < 0) fail("seek token store");
}

TokenStore::PutResult TokenStore::put(const TokenRecord& record) {
  std::unique_lock lock(mu_);
  if (index_.contains(record.id)) return PutResult::kDuplicate;
  if (fd_ >= 0) {
    const Bytes body = record_body(record);
    if (body.size() > kMaxRecord) throw IoError("token record too large");
    Bytes rec;
    rec.reserve(4 + body.size() + kChecksumSize);
    put_u32(rec, static_cast<std::uint32_t>(body.size()));
    append(rec, body);
    const crypto::Digest d = crypto::sha256(body);
    append(rec, ByteView(d).first(kChecksumSize));
    const off_t start = ::lseek(fd_, 0, SEEK_CUR);
    try {
      write_all(fd_, rec);
      if (::fdatasync(fd_) != 0) fail("fsync token store");
    } catch (...) {
      // Leave no partial record behind for the next append.
      if (start >= 0 && ::ftruncate(fd_, start) == 0) ::lseek(fd_, start, SEEK_SET);
      throw;
    }
  }
  index_.emplace(record.id, record);
  return PutResult::kStored;
}

std::optional<TokenRecord> TokenStore::get(const crypto::AssetId& id) const {
  std::shared_lock lock(mu_);
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TokenStore::size() const {
  std::shared_lock lock(mu_);
  return index_.size();
}

}  // namespace pvwm::prover
