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

#include "pvwm/wire/wire.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "pvwm/common/encoding.hpp"

namespace pvwm::wire {

bool is_known(std::uint8_t type) noexcept {
  switch (type) {
    case 0x01: case 0x02: case 0x03:
    case 0x10: case 0x11: case 0x12: case 0x13: case 0x14: case 0x15:
    case 0x18: case 0x19:
    case 0x20: case 0x21: case 0x22: case 0x23: case 0x24:
      return true;
    default:
      return false;
  }
}

const char* type_name(MsgType type) noexcept {
  switch (type) {
    case MsgType::kRegister: return "REGISTER";
    case MsgType::kAck: return "ACK";
    case MsgType::kErr: return "ERR";
    case MsgType::kRaHello: return "RA_HELLO";
    case MsgType::kRaReport: return "RA_REPORT";
    case MsgType::kRaFinish: return "RA_FINISH";
    case MsgType::kVerifyReq: return "VERIFY_REQ";
    case MsgType::kVerifyRes: return "VERIFY_RES";
    case MsgType::kAbort: return "ABORT";
    case MsgType::kCacheQry: return "CACHE_QRY";
    case MsgType::kCacheRes: return "CACHE_RES";
    case MsgType::kGcHello: return "GC_HELLO";
    case MsgType::kGcGarbled: return "GC_GARBLED";
    case MsgType::kOtSetup: return "OT_SETUP";
    case MsgType::kOtChoices: return "OT_CHOICES";
    case MsgType::kOtReply: return "OT_REPLY";
  }
  return "UNKNOWN";
}

const char* err_name(ErrCode code) noexcept {
  switch (code) {
    case ErrCode::kDuplicate: return "DUPLICATE";
    case ErrCode::kStorage: return "STORAGE";
    case ErrCode::kMalformed: return "MALFORMED";
    case ErrCode::kUnauthorized: return "UNAUTHORIZED";
    case ErrCode::kUnsupported: return "UNSUPPORTED";
    case ErrCode::kTooLarge: return "TOO_LARGE";
  }
  return "UNKNOWN";
}

const char* abort_name(AbortCode code) noexcept {
  switch (code) {
    case AbortCode::kUnknownId: return "UNKNOWN_ID";
    case AbortCode::kDecryptFailed: return "DECRYPT_FAILED";
    case AbortCode::kIdMismatch: return "ID_MISMATCH";
    case AbortCode::kBadSession: return "BAD_SESSION";
    case AbortCode::kBadFinish: return "BAD_FINISH";
    case AbortCode::kMalformed: return "MALFORMED";
    case AbortCode::kInternal: return "INTERNAL";
    case AbortCode::kRateLimited: return "RATE_LIMITED";
    case AbortCode::kUnsupportedMode: return "UNSUPPORTED_MODE";
    case AbortCode::kCircuitMismatch: return "CIRCUIT_MISMATCH";
  }
  return "UNKNOWN";
}

Bytes encode_frame(MsgType type, ByteView payload) {
  if (payload.size() + 1 > kMaxFrameLength) throw InvalidArgument("frame too large");
  Bytes out;
  out.reserve(5 + payload.size());
  put_u32(out, static_cast<std::uint32_t>(payload.size() + 1));
  put_u8(out, static_cast<std::uint8_t>(type));
  append(out, payload);
  return out;
}

Bytes encode_frame(const Frame& frame) { return encode_frame(frame.type, frame.payload); }

void FrameDecoder::feed(ByteView data) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  append(buf_, data);
}

std::optional<Frame> FrameDecoder::next() {
  if (buffered() < 4) return std::nullopt;
  const std::uint32_t len = get_u32(ByteView(buf_).subspan(pos_, 4));
  if (len == 0) throw ParseError("zero-length frame");
  if (len > max_) throw FrameTooLarge("frame exceeds " + std::to_string(max_) + " bytes");
  if (buffered() < 4 + std::size_t{len}) return std::nullopt;
  Frame f;
  f.type = static_cast<MsgType>(buf_[pos_ + 4]);
  f.payload.assign(buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + 5),
                   buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + 4 + len));
  pos_ += 4 + len;
  if (pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  return f;
}

std::uint8_t Reader::u8() { return take(1)[0]; }
std::uint32_t Reader::u32() { return get_u32(take(4)); }
std::uint64_t Reader::u64() { return get_u64(take(8)); }
double Reader::f64() { return std::bit_cast<double>(u64()); }

ByteView Reader::take(std::size_t n) {
  if (n > remaining()) throw ParseError("truncated payload");
  const ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Bytes Reader::var() {
  const std::uint32_t n = u32();
  const ByteView v = take(n);
  return {v.begin(), v.end()};
}

void Reader::expect_end() const {
  if (remaining() != 0) throw ParseError("trailing bytes in payload");
}

void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_var(Bytes& out, ByteView v) {
  if (v.size() > 0xffffffffULL) throw InvalidArgument("field too large");
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  append(out, v);
}

namespace {

Bytes blocks_var(ByteView blocks, std::size_t unit) {
  if (blocks.size() % unit != 0) throw InvalidArgument("block field has partial block");
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(blocks.size() / unit));
  append(out, blocks);
  return out;
}

Bytes read_blocks(Reader& r, std::size_t unit) {
  const std::uint32_t n = r.u32();
  if (std::size_t{n} * unit > r.remaining()) throw ParseError("truncated block field");
  const ByteView v = r.take(std::size_t{n} * unit);
  return {v.begin(), v.end()};
}

Scheme to_scheme(std::uint8_t v) {
  if (v < 1 || v > 3) throw ParseError("unknown scheme " + std::to_string(v));
  return static_cast<Scheme>(v);
}

}  // namespace

Bytes Register::body() const {
  Bytes out;
  append(out, id.digest);
  put_u8(out, static_cast<std::uint8_t>(scheme));
  put_var(out, share);
  put_var(out, csec);
  return out;
}

Bytes Register::encode() const {
  Bytes out = body();
  if (mac) append(out, *mac);
  return out;
}

Register Register::decode(ByteView payload) {
  Reader r(payload);
  Register m;
  m.id.digest = r.fixed<32>();
  m.scheme = to_scheme(r.u8());
  m.share = r.var();
  m.csec = r.var();
  if (r.remaining() == 32) {
    m.mac = r.fixed<32>();
  }
  r.expect_end();
  return m;
}

Bytes Err::encode() const { return {static_cast<std::uint8_t>(code)}; }

Err Err::decode(ByteView payload) {
  Reader r(payload);
  Err m{static_cast<ErrCode>(r.u8())};
  r.expect_end();
  return m;
}

Bytes RaHello::encode() const { return {nonce.begin(), nonce.end()}; }

RaHello RaHello::decode(ByteView payload) {
  Reader r(payload);
  RaHello m{r.fixed<32>()};
  r.expect_end();
  return m;
}

Bytes RaReport::encode() const {
  Bytes out;
  append(out, measurement);
  append(out, epk);
  append(out, sig);
  return out;
}

RaReport RaReport::decode(ByteView payload) {
  Reader r(payload);
  RaReport m;
  m.measurement = r.fixed<32>();
  m.epk = r.fixed<32>();
  m.sig = r.fixed<64>();
  r.expect_end();
  return m;
}

Bytes RaFinish::encode() const {
  Bytes out;
  append(out, client_epk);
  append(out, mac);
  return out;
}

RaFinish RaFinish::decode(ByteView payload) {
  Reader r(payload);
  RaFinish m;
  m.client_epk = r.fixed<32>();
  m.mac = r.fixed<16>();
  r.expect_end();
  return m;
}

Bytes VerifyReq::encode() const {
  Bytes out;
  out.reserve(40 + dw.size() + tkh.size());
  append(out, id.digest);
  put_var(out, dw);
  put_var(out, tkh);
  return out;
}

VerifyReq VerifyReq::decode(ByteView payload) {
  Reader r(payload);
  VerifyReq m;
  m.id.digest = r.fixed<32>();
  m.dw = r.var();
  m.tkh = r.var();
  r.expect_end();
  return m;
}

Bytes VerifyRes::encode() const {
  Bytes out{res};
  if (timings) {
    put_u64(out, timings->receive_ns);
    put_u64(out, timings->reconstruct_ns);
    put_u64(out, timings->detect_ns);
  }
  return out;
}

VerifyRes VerifyRes::decode(ByteView payload) {
  Reader r(payload);
  VerifyRes m;
  m.res = r.u8();
  if (m.res > 1) throw ParseError("result must be 0 or 1");
  if (r.remaining() == 24) {
    EnclaveTimings t;
    t.receive_ns = r.u64();
    t.reconstruct_ns = r.u64();
    t.detect_ns = r.u64();
    m.timings = t;
  }
  r.expect_end();
  return m;
}

Bytes Abort::encode() const { return {static_cast<std::uint8_t>(code)}; }

Abort Abort::decode(ByteView payload) {
  Reader r(payload);
  Abort m{static_cast<AbortCode>(r.u8())};
  r.expect_end();
  return m;
}

Bytes CacheQry::encode() const {
  Bytes out;
  append(out, id.digest);
  append(out, h);
  put_f64(out, sim);
  return out;
}

CacheQry CacheQry::decode(ByteView payload) {
  Reader r(payload);
  CacheQry m;
  m.id.digest = r.fixed<32>();
  m.h = r.fixed<32>();
  m.sim = r.f64();
  r.expect_end();
  if (!(m.sim >= 0.0 && m.sim <= 100.0)) throw ParseError("similarity out of range");
  return m;
}

Bytes CacheRes::encode() const { return {static_cast<std::uint8_t>(present ? 1 : 0), res}; }

CacheRes CacheRes::decode(ByteView payload) {
  Reader r(payload);
  CacheRes m;
  const std::uint8_t p = r.u8();
  m.res = r.u8();
  if (p > 1 || m.res > 1) throw ParseError("cache response flags must be 0 or 1");
  m.present = p == 1;
  r.expect_end();
  return m;
}

Bytes GcHello::encode() const {
  Bytes out;
  append(out, id.digest);
  append(out, circuit_hash);
  return out;
}

GcHello GcHello::decode(ByteView payload) {
  Reader r(payload);
  GcHello m;
  m.id.digest = r.fixed<32>();
  m.circuit_hash = r.fixed<32>();
  r.expect_end();
  return m;
}

Bytes GcGarbled::encode() const {
  Bytes out = blocks_var(tables, 16);
  append(out, blocks_var(decoding, 1));
  append(out, blocks_var(garbler_labels, 16));
  return out;
}

GcGarbled GcGarbled::decode(ByteView payload) {
  Reader r(payload);
  GcGarbled m;
  m.tables = read_blocks(r, 16);
  m.decoding = read_blocks(r, 1);
  m.garbler_labels = read_blocks(r, 16);
  r.expect_end();
  return m;
}

Bytes OtSetup::encode() const { return {a.begin(), a.end()}; }

OtSetup OtSetup::decode(ByteView payload) {
  Reader r(payload);
  OtSetup m{r.fixed<kPointSize>()};
  r.expect_end();
  return m;
}

Bytes OtChoices::encode() const {
  Bytes out;
  out.reserve(4 + b.size() * kPointSize);
  put_u32(out, static_cast<std::uint32_t>(b.size()));
  for (const auto& p : b) append(out, p);
  return out;
}

OtChoices OtChoices::decode(ByteView payload) {
  Reader r(payload);
  OtChoices m;
  const std::uint32_t n = r.u32();
  if (std::size_t{n} * kPointSize != r.remaining()) throw ParseError("bad OT choice count");
  m.b.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) m.b.push_back(r.fixed<kPointSize>());
  return m;
}

Bytes OtReply::encode() const {
  Bytes out;
  out.reserve(4 + ciphers.size() * kOtCipherSize);
  put_u32(out, static_cast<std::uint32_t>(ciphers.size()));
  for (const auto& c : ciphers) append(out, c);
  return out;
}

OtReply OtReply::decode(ByteView payload) {
  Reader r(payload);
  OtReply m;
  const std::uint32_t n = r.u32();
  if (std::size_t{n} * kOtCipherSize != r.remaining()) throw ParseError("bad OT reply count");
  m.ciphers.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) m.ciphers.push_back(r.fixed<kOtCipherSize>());
  return m;
}

PeerAborted::PeerAborted(AbortCode code)
    : ProtocolError(std::string("peer aborted: ") + abort_name(code)), code_(code) {}

PeerError::PeerError(ErrCode code)
    : ProtocolError(std::string("peer error: ") + err_name(code)), code_(code) {}

Frame Channel::expect(MsgType type) {
  Frame f = recv();
  if (f.type == type) return f;
  if (f.type == MsgType::kAbort && f.payload.size() == 1) {
    throw PeerAborted(static_cast<AbortCode>(f.payload[0]));
  }
  if (f.type == MsgType::kErr && f.payload.size() == 1) {
    throw PeerError(static_cast<ErrCode>(f.payload[0]));
  }
  const std::uint8_t t = static_cast<std::uint8_t>(f.type);
  throw ProtocolError(std::string("expected ") + type_name(type) + ", got type 0x" +
                      to_hex(ByteView(&t, 1)));
}

}  // namespace pvwm::wire
