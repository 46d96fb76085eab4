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

#include <time.h>

#include <algorithm>
#include <chrono>
#include <filesystem>

#include "pvwm/cache/cache.hpp"
#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/gc/protocol.hpp"
#include "pvwm/tee/attestation.hpp"

namespace pvwm::client {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_between(Clock::time_point a, Clock::time_point b) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

std::uint64_t thread_cpu_ns() {
  timespec ts{};
  ::clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ULL + static_cast<std::uint64_t>(ts.tv_nsec);
}

// Holder inputs for the 2PC circuit. A suspect with more distinct tokens than
// the circuit has slots keeps its most frequent ones.
gc::BitVector histogram_bits(std::string_view suspect, const gc::VerifyCircuitParams& params) {
  freqywm::TokenHistogram hist = freqywm::preprocess(freqywm::parse_dataset(suspect));
  const std::uint64_t max_freq = (std::uint64_t{1} << params.freq_bits) - 1;
  std::vector<std::pair<std::string, std::uint64_t>> items(hist.begin(), hist.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  freqywm::TokenHistogram kept;
  std::vector<std::uint32_t> tags;
  for (const auto& [tok, f] : items) {
    if (kept.size() == params.num_slots) break;
    const std::uint32_t tag = gc::token_tag(tok, params.tag_bits);
    if (std::find(tags.begin(), tags.end(), tag) != tags.end()) continue;
    tags.push_back(tag);
    kept.emplace(tok, std::min(f, max_freq));
  }
  return gc::encode_histogram(kept, params);
}

VerifyOutcome verify_2pc(const Bundle& bundle, std::string_view suspect, const net::Endpoint& prover,
                         const HolderOptions& options, net::Dialer& dialer) {
  VerifyOutcome out;
  const auto cpu0 = thread_cpu_ns();
  const auto t0 = Clock::now();
  const gc::VerifyCircuitParams& params = *bundle.circuit;
  const gc::Circuit circuit = gc::build_verify_circuit(params);
  if (bundle.holder_token.size() * 8 < params.secret_bits()) throw ParseError("bundle token too short");
  gc::BitVector bits = gc::unpack_bits(bundle.holder_token, params.secret_bits());
  const gc::BitVector hist = histogram_bits(suspect, params);
  bits.insert(bits.end(), hist.begin(), hist.end());
  net::Socket sock = dialer.dial(prover);
  sock.set_timeout(options.timeout);
  net::FramedChannel ch(std::move(sock));
  const auto t1 = Clock::now();
  const gc::BitVector result = gc::run_evaluator(ch, bundle.id, circuit, bits);
  const auto t2 = Clock::now();
  out.valid = gc::bits_to_uint(result) >= params.min_pairs;
  const auto t3 = Clock::now();
  out.bytes_sent = ch.bytes_sent();
  out.bytes_received = ch.bytes_received();
  ch.socket().close();
  const auto t4 = Clock::now();
  out.timings.establish_ns = ns_between(t0, t1);
  out.timings.receive_ns = ns_between(t1, t2);
  out.timings.detect_ns = ns_between(t2, t3);
  out.timings.terminate_ns = ns_between(t3, t4);
  out.timings.total_ns = ns_between(t0, t4);
  out.timings.holder_cpu_ns = thread_cpu_ns() - cpu0;
  return out;
}

}  // namespace

VerifyOutcome holder_verify(const Bundle& bundle, std::string_view reference_asset,
                            std::string_view suspect, const net::Endpoint& prover,
                            const HolderOptions& options, net::Dialer& dialer) {
  if (bundle.mode == prover::ServiceMode::kTwoPc) {
    return verify_2pc(bundle, suspect, prover, options, dialer);
  }
  VerifyOutcome out;
  const auto cpu0 = thread_cpu_ns();
  const auto t0 = Clock::now();

  net::Socket sock = dialer.dial(prover);
  sock.set_timeout(options.timeout);
  net::FramedChannel ch(std::move(sock));

  if (options.use_cache) {
    const auto suspect_tokens = asset_tokens(bundle.scheme, suspect);
    const double sim = cache::jaccard(asset_tokens(bundle.scheme, reference_asset), suspect_tokens);
    out.similarity = sim;
    const wire::CacheQry q{bundle.id, cache::minhash(suspect_tokens), sim};
    ch.send(wire::MsgType::kCacheQry, q.encode());
    const auto res = wire::CacheRes::decode(ch.expect(wire::MsgType::kCacheRes).payload);
    if (res.present) {
      out.valid = res.res == 1;
      out.from_cache = true;
      out.bytes_sent = ch.bytes_sent();
      out.bytes_received = ch.bytes_received();
      ch.socket().close();
      const auto t1 = Clock::now();
      out.timings.total_ns = out.timings.establish_ns = ns_between(t0, t1);
      out.timings.holder_cpu_ns = thread_cpu_ns() - cpu0;
      return out;
    }
  }

  // Establish session: attest, then bind the channel to the attested key.
  tee::HolderHandshake hs;
  ch.send(wire::MsgType::kRaHello, hs.hello().encode());
  const auto report = wire::RaReport::decode(ch.expect(wire::MsgType::kRaReport).payload);
  const bool skip_sig = bundle.mode == prover::ServiceMode::kPlain;
  const crypto::PublicKey manufacturer = bundle.manufacturer.value_or(crypto::PublicKey{});
  wire::RaFinish finish;
  try {
    finish = hs.on_report(report, manufacturer, bundle.measurement, skip_sig);
  } catch (const tee::AttestationError&) {
    ch.socket().close();
    throw;
  }
  ch.send(wire::MsgType::kRaFinish, finish.encode());
  tee::SecureChannel sc = hs.channel();
  const auto t1 = Clock::now();

  // Receive data: ship the suspect asset and tk_H over the channel.
  const wire::VerifyReq req{bundle.id, Bytes(as_bytes(suspect).begin(), as_bytes(suspect).end()),
                            bundle.holder_token};
  Bytes plain = req.encode();
  const Bytes sealed = sc.seal(wire::MsgType::kVerifyReq, plain);
  secure_zero(plain);
  ch.send(wire::MsgType::kVerifyReq, sealed);
  const wire::Frame reply = ch.expect(wire::MsgType::kVerifyRes);
  const auto t3 = Clock::now();

  // Terminate session.
  const auto res = wire::VerifyRes::decode(sc.open(wire::MsgType::kVerifyRes, reply.payload));
  sc.wipe();
  out.valid = res.res == 1;
  out.bytes_sent = ch.bytes_sent();
  out.bytes_received = ch.bytes_received();
  ch.socket().close();
  const auto t4 = Clock::now();

  const wire::EnclaveTimings et = res.timings.value_or(wire::EnclaveTimings{});
  const std::uint64_t round_trip = ns_between(t1, t3);
  out.timings.establish_ns = ns_between(t0, t1);
  out.timings.reconstruct_ns = std::min(et.reconstruct_ns, round_trip);
  out.timings.detect_ns = std::min(et.detect_ns, round_trip - out.timings.reconstruct_ns);
  out.timings.receive_ns = round_trip - out.timings.reconstruct_ns - out.timings.detect_ns;
  out.timings.terminate_ns = ns_between(t3, t4);
  out.timings.total_ns = ns_between(t0, t4);
  out.timings.holder_cpu_ns = thread_cpu_ns() - cpu0;
  return out;
}

VerifyOutcome holder_verify_files(const std::string& bundle_path, const std::string& suspect_path,
                                  std::optional<net::Endpoint> prover, const HolderOptions& options,
                                  net::Dialer& dialer) {
  const Bundle b = Bundle::load(bundle_path);
  const auto asset_path = std::filesystem::path(bundle_path).parent_path() / b.asset;
  Bytes reference;
  if (options.use_cache && b.mode != prover::ServiceMode::kTwoPc) reference = read_file(asset_path.string());
  const Bytes suspect = read_file(suspect_path);
  return holder_verify(b, as_chars(reference), as_chars(suspect), prover.value_or(b.prover), options,
                       dialer);
}

}  // namespace pvwm::client
