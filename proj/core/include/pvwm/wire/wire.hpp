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

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "pvwm/common/bytes.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/crypto/crypto.hpp"

// Length-prefixed binary framing. Every integer is big-endian.
//
//   frame = [u32 length][u8 msg_type][payload]
//
// `length` counts the type byte and the payload.
namespace pvwm::wire {

inline constexpr std::uint32_t kMaxFrameLength = 64u << 20;

enum class MsgType : std::uint8_t {
  kRegister = 0x01,
  kAck = 0x02,
  kErr = 0x03,
  kRaHello = 0x10,
  kRaReport = 0x11,
  kRaFinish = 0x12,
  kVerifyReq = 0x13,
  kVerifyRes = 0x14,
  kAbort = 0x15,
  kCacheQry = 0x18,
  kCacheRes = 0x19,
  kGcHello = 0x20,
  kGcGarbled = 0x21,
  kOtSetup = 0x22,
  kOtChoices = 0x23,
  kOtReply = 0x24,
};

bool is_known(std::uint8_t type) noexcept;
const char* type_name(MsgType type) noexcept;

enum class ErrCode : std::uint8_t {
  kDuplicate = 1,
  kStorage = 2,
  kMalformed = 3,
  kUnauthorized = 4,
  kUnsupported = 5,
  kTooLarge = 6,
};

enum class AbortCode : std::uint8_t {
  kUnknownId = 1,
  kDecryptFailed = 2,
  kIdMismatch = 3,
  kBadSession = 4,
  kBadFinish = 5,
  kMalformed = 6,
  kInternal = 7,
  kRateLimited = 8,
  kUnsupportedMode = 9,
  kCircuitMismatch = 10,
};

const char* err_name(ErrCode code) noexcept;
const char* abort_name(AbortCode code) noexcept;

enum class Scheme : std::uint8_t { kFreqyWm = 1, kObt = 2, kFreqyWm2pc = 3 };

struct Frame {
  MsgType type{};
  Bytes payload;
  friend bool operator==(const Frame&, const Frame&) = default;
};

Bytes encode_frame(const Frame& frame);
Bytes encode_frame(MsgType type, ByteView payload);

// Incremental decoder. Throws ParseError on a zero or oversized length.
class FrameTooLarge : public ParseError {
 public:
  using ParseError::ParseError;
};

class FrameDecoder {
 public:
  explicit FrameDecoder(std::uint32_t max_length = kMaxFrameLength) : max_(max_length) {}
  void feed(ByteView data);
  std::optional<Frame> next();
  std::size_t buffered() const noexcept { return buf_.size() - pos_; }

 private:
  std::uint32_t max_;
  Bytes buf_;
  std::size_t pos_ = 0;
};

// Cursor over a payload; every read is bounds-checked.
class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  ByteView take(std::size_t n);
  // u32 length then bytes; the length is checked against what remains.
  Bytes var();
  template <std::size_t N>
  FixedBytes<N> fixed() {
    FixedBytes<N> out{};
    const ByteView v = take(N);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  void expect_end() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

void put_f64(Bytes& out, double v);
void put_var(Bytes& out, ByteView v);

// Message bodies. encode() yields the payload; decode() rejects trailing bytes.

struct Register {
  crypto::AssetId id;
  Scheme scheme = Scheme::kFreqyWm;
  Bytes share;
  Bytes csec;
  std::optional<crypto::Digest> mac;

  // Payload without the trailing MAC; the MAC covers exactly these bytes.
  Bytes body() const;
  Bytes encode() const;
  static Register decode(ByteView payload);
  friend bool operator==(const Register&, const Register&) = default;
};

struct Err {
  ErrCode code{};
  Bytes encode() const;
  static Err decode(ByteView payload);
  friend bool operator==(const Err&, const Err&) = default;
};

struct RaHello {
  FixedBytes<32> nonce{};
  Bytes encode() const;
  static RaHello decode(ByteView payload);
  friend bool operator==(const RaHello&, const RaHello&) = default;
};

struct RaReport {
  crypto::Digest measurement{};
  crypto::PublicKey epk{};
  crypto::Signature sig{};
  Bytes encode() const;
  static RaReport decode(ByteView payload);
  friend bool operator==(const RaReport&, const RaReport&) = default;
};

struct RaFinish {
  crypto::PublicKey client_epk{};
  FixedBytes<16> mac{};
  Bytes encode() const;
  static RaFinish decode(ByteView payload);
  friend bool operator==(const RaFinish&, const RaFinish&) = default;
};

// Plaintext of the encrypted VERIFY_REQ payload.
struct VerifyReq {
  crypto::AssetId id;
  Bytes dw;
  Bytes tkh;
  Bytes encode() const;
  static VerifyReq decode(ByteView payload);
  friend bool operator==(const VerifyReq&, const VerifyReq&) = default;
};

// Time spent inside the enclave, in nanoseconds.
struct EnclaveTimings {
  std::uint64_t receive_ns = 0;
  std::uint64_t reconstruct_ns = 0;
  std::uint64_t detect_ns = 0;
  friend bool operator==(const EnclaveTimings&, const EnclaveTimings&) = default;
};

// Plaintext of the encrypted VERIFY_RES payload.
struct VerifyRes {
  std::uint8_t res = 0;
  std::optional<EnclaveTimings> timings;
  Bytes encode() const;
  static VerifyRes decode(ByteView payload);
  friend bool operator==(const VerifyRes&, const VerifyRes&) = default;
};

struct Abort {
  AbortCode code{};
  Bytes encode() const;
  static Abort decode(ByteView payload);
  friend bool operator==(const Abort&, const Abort&) = default;
};

struct CacheQry {
  crypto::AssetId id;
  FixedBytes<32> h{};
  double sim = 0.0;
  Bytes encode() const;
  static CacheQry decode(ByteView payload);
  friend bool operator==(const CacheQry&, const CacheQry&) = default;
};

struct CacheRes {
  bool present = false;
  std::uint8_t res = 0;
  Bytes encode() const;
  static CacheRes decode(ByteView payload);
  friend bool operator==(const CacheRes&, const CacheRes&) = default;
};

struct GcHello {
  crypto::AssetId id;
  crypto::Digest circuit_hash{};
  Bytes encode() const;
  static GcHello decode(ByteView payload);
  friend bool operator==(const GcHello&, const GcHello&) = default;
};

// Garbled tables, output decoding bits and the garbler's input labels, each
// as a u32 count followed by 16-byte blocks (decoding: one byte per output).
struct GcGarbled {
  Bytes tables;
  Bytes decoding;
  Bytes garbler_labels;
  Bytes encode() const;
  static GcGarbled decode(ByteView payload);
  friend bool operator==(const GcGarbled&, const GcGarbled&) = default;
};

inline constexpr std::size_t kPointSize = 33;
using Point = FixedBytes<kPointSize>;

struct OtSetup {
  Point a{};
  Bytes encode() const;
  static OtSetup decode(ByteView payload);
  friend bool operator==(const OtSetup&, const OtSetup&) = default;
};

struct OtChoices {
  std::vector<Point> b;
  Bytes encode() const;
  static OtChoices decode(ByteView payload);
  friend bool operator==(const OtChoices&, const OtChoices&) = default;
};

// Per transfer: e0 || tag0 || e1 || tag1, 16 bytes each.
inline constexpr std::size_t kOtCipherSize = 64;
using OtCipher = FixedBytes<kOtCipherSize>;

struct OtReply {
  std::vector<OtCipher> ciphers;
  Bytes encode() const;
  static OtReply decode(ByteView payload);
  friend bool operator==(const OtReply&, const OtReply&) = default;
};

// Bidirectional frame transport.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& frame) = 0;
  // Throws IoError when the peer closes or the transport fails.
  virtual Frame recv() = 0;

  void send(MsgType type, ByteView payload) { send(Frame{type, Bytes(payload.begin(), payload.end())}); }
  // Receives a frame and requires the given type; ABORT and ERR frames are
  // surfaced as PeerAborted/PeerError.
  Frame expect(MsgType type);
};

class PeerAborted : public ProtocolError {
 public:
  explicit PeerAborted(AbortCode code);
  AbortCode code() const noexcept { return code_; }

 private:
  AbortCode code_;
};

class PeerError : public ProtocolError {
 public:
  explicit PeerError(ErrCode code);
  ErrCode code() const noexcept { return code_; }

 private:
  ErrCode code_;
};

}  // namespace pvwm::wire
