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


#include <gtest/gtest.h>

#include <signal.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "pvwm/common/encoding.hpp"
#include "pvwm/data/synthetic.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"
#include "pvwm/tee/attestation.hpp"
#include "pvwm/tee/enclave.hpp"
#include "pvwm/tee/enclave_heap.hpp"
#include "pvwm/tee/runtime.hpp"
#include "pvwm/tee/tokens.hpp"

using namespace pvwm;
using namespace pvwm::tee;
using wire::AbortCode;
using wire::MsgType;

namespace {

bool contains(ByteView hay, ByteView needle) {
  if (needle.empty()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

class MapHost : public Host {
 public:
  FetchResult fetch(const crypto::AssetId& id) override {
    ++fetches;
    const auto it = records.find(id);
    if (it == records.end()) return {};
    return it->second;
  }
  std::map<crypto::AssetId, FetchResult> records;
  std::atomic<int> fetches{0};
};

struct Asset {
  crypto::AssetId id;
  wire::Scheme scheme{};
  std::string secret_json;
  FixedBytes<32> wm_key{};
  std::string dw;
  std::string unrelated;
  Tokens tokens;
};

Asset make_freqywm_asset(SecretForm form, std::uint64_t seed, bool bind = true) {
  std::mt19937_64 rng(seed);
  data::ZipfOptions zo;
  zo.distinct = 200;
  zo.length = 3000;
  const auto original = data::zipf_dataset(rng, zo);
  FixedBytes<32> key{};
  for (auto& b : key) b = static_cast<std::uint8_t>(rng());
  freqywm::InsertOptions io;
  io.num_pairs = 10;
  io.seed = rng();
  auto r = freqywm::insert(original, key, io);
  const crypto::IdBinding binding{"owner", "meta-" + std::to_string(seed), "2026-01-01"};
  if (bind) r.secret.binding = binding;
  Asset a;
  a.scheme = wire::Scheme::kFreqyWm;
  a.id = binding.id();
  a.secret_json = freqywm::secret_to_json(r.secret);
  a.wm_key = key;
  a.dw = freqywm::serialize_dataset(r.watermarked);
  zo.prefix = "other";
  a.unrelated = freqywm::serialize_dataset(data::zipf_dataset(rng, zo));
  a.tokens = make_tokens(form, a.id, as_bytes(a.secret_json));
  return a;
}

Asset make_obt_asset(SecretForm form, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto table = data::gaussian_table(rng, 400);
  obt::ObtSecret s = obt::secret_gen(16, 0.5);
  const crypto::IdBinding binding{"owner", "table-" + std::to_string(seed), "2026-01-02"};
  s.binding = binding;
  Asset a;
  a.scheme = wire::Scheme::kObt;
  a.id = binding.id();
  a.secret_json = obt::secret_to_json(s);
  a.wm_key = s.key;
  a.dw = obt::serialize_table(obt::insert(table, s));
  a.unrelated = obt::serialize_table(data::gaussian_table(rng, 400, 0.0, 1.0, "u"));
  a.tokens = make_tokens(form, a.id, as_bytes(a.secret_json));
  return a;
}

FetchResult record_of(const Asset& a) {
  return {FetchResult::Status::kFound, a.scheme, a.tokens.prover, a.tokens.ciphertext};
}

const crypto::SigningKeypair& manufacturer() {
  static const auto kp = crypto::SigningKeypair::generate();
  return kp;
}

RuntimeOptions options_for(SecretForm form, bool attested = true) {
  RuntimeOptions o;
  o.program.form = form;
  o.program.attested = attested;
  if (attested) o.manufacturer = manufacturer();
  o.arena_size = 8 << 20;
  return o;
}

struct Outcome {
  EcallResult last;
  std::optional<wire::VerifyRes> res;
  std::optional<bool> disclosed;
  wire::RaReport report;
  crypto::SymmetricKey key;
};

// Drives one verification through the registered entry points.
Outcome run_session(Enclave& e, Host& host, std::uint64_t sid, const crypto::AssetId& id,
                std::string_view dw, ByteView tkh, bool attested = true, bool disclose = false) {
  Outcome run;
  HolderHandshake hs;
  run.last = e.call(kOpenSession, OpenSessionIn{sid, hs.hello()}.encode(), host);
  if (!run.last.ok) return run;
  run.report = wire::RaReport::decode(run.last.payload);
  const auto fin = hs.on_report(run.report, manufacturer().public_key(), e.measurement(), !attested);
  run.last = e.call(kFinishSession, FinishSessionIn{sid, fin}.encode(), host);
  if (!run.last.ok) return run;
  SecureChannel ch = hs.channel();
  run.key = ch.key();
  const Bytes sealed =
      ch.seal(MsgType::kVerifyReq, wire::VerifyReq{id, to_bytes(dw), Bytes(tkh.begin(), tkh.end())}.encode());
  run.last = e.call(kVerify, VerifyIn{sid, disclose, sealed}.encode(), host);
  if (!run.last.ok) return run;
  const auto out = VerifyOut::decode(run.last.payload);
  run.disclosed = out.disclosed;
  run.res = wire::VerifyRes::decode(ch.open(MsgType::kVerifyRes, out.sealed));
  return run;
}

// Byte patterns that must never outlive a session: sec, the watermark key
// inside sec, k (encrypted form), s_H and windows of D_w.
std::vector<Bytes> secret_patterns(const Asset& a, SecretForm form) {
  std::vector<Bytes> p;
  p.push_back(to_bytes(a.secret_json));
  p.emplace_back(a.wm_key.begin(), a.wm_key.end());
  p.push_back(a.tokens.holder);
  if (form == SecretForm::kEncrypted) p.push_back(crypto::reconstruct(a.tokens.holder, a.tokens.prover));
  p.push_back(to_bytes(a.dw.substr(0, 64)));
  p.push_back(to_bytes(a.dw.substr(a.dw.size() / 2, 64)));
  return p;
}

std::size_t residue_hits(ByteView image, const std::vector<Bytes>& patterns) {
  std::size_t hits = 0;
  for (const auto& p : patterns) hits += contains(image, p);
  return hits;
}

}  // namespace

TEST(Measurement, GoldenAndDistinctPerConfig) {
  ProgramConfig def;
  EXPECT_EQ(def.canonical(), "form=encrypted;attested=1;check_idgen=1");
  // sha256 over length-framed name, version and config, computed independently.
  EXPECT_EQ(to_hex(def.measurement()),
            "ea5f75515bb7070ef640fab47cf5239e906d30a3ca5122c291cf5cf1da5209dd");
  ProgramConfig alt{SecretForm::kDirect, false, false};
  EXPECT_EQ(to_hex(alt.measurement()),
            "3b97ce9e16385d9bdba75d3d6a0c3a4cbe4da78ea8d7aaaf00fb77691246aea2");
  std::set<crypto::Digest> seen;
  for (auto form : {SecretForm::kEncrypted, SecretForm::kDirect}) {
    for (bool att : {false, true}) {
      for (bool idg : {false, true}) seen.insert(ProgramConfig{form, att, idg}.measurement());
    }
  }
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Tokens, RoundTripBothForms) {
  const crypto::AssetId id = crypto::random_id();
  const Bytes sec = to_bytes("{\"secret\":1}");
  const Tokens enc = make_tokens(SecretForm::kEncrypted, id, sec);
  EXPECT_EQ(enc.holder.size(), crypto::kKeySize);
  EXPECT_FALSE(enc.ciphertext.empty());
  EXPECT_EQ(open_secret(SecretForm::kEncrypted, id, enc.holder, enc.prover, enc.ciphertext), sec);
  const Tokens dir = make_tokens(SecretForm::kDirect, id, sec);
  EXPECT_EQ(dir.holder.size(), sec.size());
  EXPECT_TRUE(dir.ciphertext.empty());
  EXPECT_EQ(open_secret(SecretForm::kDirect, id, dir.holder, dir.prover, {}), sec);
}

TEST(Tokens, CiphertextBoundToIdAndShares) {
  const crypto::AssetId id = crypto::random_id();
  const Tokens t = make_tokens(SecretForm::kEncrypted, id, to_bytes("sec"));
  EXPECT_THROW(open_secret(SecretForm::kEncrypted, crypto::random_id(), t.holder, t.prover, t.ciphertext),
               AuthError);
  Bytes bad = t.holder;
  bad[0] ^= 1;
  EXPECT_THROW(open_secret(SecretForm::kEncrypted, id, bad, t.prover, t.ciphertext), AuthError);
  EXPECT_THROW(open_secret(SecretForm::kEncrypted, id, Bytes(3), Bytes(3), t.ciphertext), AuthError);
  EXPECT_THROW(open_secret(SecretForm::kDirect, id, Bytes(3), Bytes(4), {}), AuthError);
}

TEST(Report, VerifiesAndRejectsTampering) {
  const auto dh = crypto::DhKeypair::generate();
  const crypto::Digest m = ProgramConfig{}.measurement();
  const auto report = sign_report(manufacturer(), m, dh.public_key());
  EXPECT_NO_THROW(check_report(manufacturer().public_key(), report, m));

  auto bad = report;
  bad.measurement[0] ^= 1;
  EXPECT_THROW(check_report(manufacturer().public_key(), bad, m), AttestationError);
  bad = report;
  bad.epk[3] ^= 1;
  EXPECT_THROW(check_report(manufacturer().public_key(), bad, m), AttestationError);
  bad = report;
  bad.sig[10] ^= 1;
  EXPECT_THROW(check_report(manufacturer().public_key(), bad, m), AttestationError);

  const auto rogue = crypto::SigningKeypair::generate();
  EXPECT_THROW(check_report(manufacturer().public_key(), sign_report(rogue, m, dh.public_key()), m),
               AttestationError);
  // Genuine signature over an unexpected program.
  const crypto::Digest other = ProgramConfig{SecretForm::kDirect, true, true}.measurement();
  EXPECT_THROW(check_report(manufacturer().public_key(), sign_report(manufacturer(), other, dh.public_key()), m),
               AttestationError);
}

TEST(Report, SkipSignatureStillPinsMeasurement) {
  wire::RaReport r;
  r.measurement = ProgramConfig{}.measurement();
  EXPECT_NO_THROW(check_report(manufacturer().public_key(), r, r.measurement, true));
  EXPECT_THROW(check_report(manufacturer().public_key(), r, r.measurement, false), AttestationError);
  EXPECT_THROW(check_report(manufacturer().public_key(), r, crypto::Digest{}, true), AttestationError);
}

TEST(Handshake, KeysBindEveryTranscriptInput) {
  FixedBytes<32> shared{}, nonce{};
  shared[0] = 1;
  crypto::Digest m{};
  crypto::PublicKey epk{}, cepk{};
  const auto base = derive_session_keys(shared, nonce, m, epk, cepk);
  EXPECT_FALSE(base.session == base.confirm);
  EXPECT_TRUE(derive_session_keys(shared, nonce, m, epk, cepk).session == base.session);
  auto flip = [](auto v) {
    v[0] ^= 0x80;
    return v;
  };
  EXPECT_FALSE(derive_session_keys(flip(shared), nonce, m, epk, cepk).session == base.session);
  EXPECT_FALSE(derive_session_keys(shared, flip(nonce), m, epk, cepk).session == base.session);
  EXPECT_FALSE(derive_session_keys(shared, nonce, flip(m), epk, cepk).session == base.session);
  EXPECT_FALSE(derive_session_keys(shared, nonce, m, flip(epk), cepk).session == base.session);
  EXPECT_FALSE(derive_session_keys(shared, nonce, m, epk, flip(cepk)).session == base.session);

  wire::RaReport r;
  const auto mac = finish_mac(base.confirm, nonce, r, cepk);
  r.sig[0] = 1;
  EXPECT_NE(finish_mac(base.confirm, nonce, r, cepk), mac);
}

TEST(Handshake, HolderRejectsBadReportBeforeKeys) {
  HolderHandshake hs;
  wire::RaReport r;
  EXPECT_THROW(hs.on_report(r, manufacturer().public_key(), ProgramConfig{}.measurement()),
               AttestationError);
  EXPECT_THROW(hs.channel(), ProtocolError);
}

TEST(Channel, RoundTripReplayReflectionAndTamper) {
  const auto key = crypto::gen_key();
  SecureChannel holder(key, Direction::kToEnclave);
  SecureChannel enclave(key, Direction::kToHolder);
  const Bytes m1 = holder.seal(MsgType::kVerifyReq, as_bytes("one"));
  const Bytes m2 = holder.seal(MsgType::kVerifyReq, as_bytes("two"));
  const Bytes m3 = holder.seal(MsgType::kVerifyReq, as_bytes("three"));
  EXPECT_EQ(enclave.open(MsgType::kVerifyReq, m1), to_bytes("one"));
  EXPECT_EQ(enclave.open(MsgType::kVerifyReq, m3), to_bytes("three"));
  EXPECT_THROW(enclave.open(MsgType::kVerifyReq, m2), ProtocolError);  // stale counter
  EXPECT_THROW(enclave.open(MsgType::kVerifyReq, m3), ProtocolError);  // replay

  const Bytes r = enclave.seal(MsgType::kVerifyRes, as_bytes("res"));
  SecureChannel fresh_enclave(key, Direction::kToHolder);
  EXPECT_THROW(fresh_enclave.open(MsgType::kVerifyRes, r), AuthError);  // reflected
  Bytes tampered = r;
  tampered.back() ^= 1;
  EXPECT_THROW(holder.open(MsgType::kVerifyRes, tampered), AuthError);
  EXPECT_THROW(holder.open(MsgType::kVerifyReq, r), AuthError);  // type bound as AAD
  EXPECT_EQ(holder.open(MsgType::kVerifyRes, r), to_bytes("res"));
  EXPECT_THROW(holder.open(MsgType::kVerifyRes, Bytes(5)), Error);

  holder.wipe();
  EXPECT_EQ(holder.key().bytes(), (FixedBytes<32>{}));
}

TEST(KeyFile, RoundTripAndLabels) {
  const auto dir = std::filesystem::temp_directory_path() / "pvwm_tee_keys";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "mfr").string();
  const auto kp = crypto::SigningKeypair::generate();
  write_manufacturer_keys(kp, prefix);
  EXPECT_EQ(load_public_key(prefix + ".pub"), kp.public_key());
  EXPECT_EQ(load_signing_key(prefix + ".key").public_key(), kp.public_key());
  const auto perms = std::filesystem::status(prefix + ".key").permissions();
  EXPECT_EQ(perms & std::filesystem::perms::others_read, std::filesystem::perms::none);
  const std::string text = encode_key_file(kPublicKeyLabel, kp.public_key());
  EXPECT_EQ(decode_key_file(text, kPublicKeyLabel), Bytes(kp.public_key().begin(), kp.public_key().end()));
  EXPECT_THROW(decode_key_file(text, kSigningKeyLabel), ParseError);
  EXPECT_THROW(load_signing_key(prefix + ".pub"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(EntryCodec, RoundTrips) {
  FetchResult f{FetchResult::Status::kFound, wire::Scheme::kObt, {1, 2}, {3}};
  const auto f2 = FetchResult::decode(f.encode());
  EXPECT_EQ(f2.status, f.status);
  EXPECT_EQ(f2.scheme, f.scheme);
  EXPECT_EQ(f2.share, f.share);
  EXPECT_EQ(f2.csec, f.csec);
  const auto e = EcallResult::decode(EcallResult::abort(AbortCode::kIdMismatch).encode());
  EXPECT_FALSE(e.ok);
  EXPECT_EQ(e.code, AbortCode::kIdMismatch);
  VerifyOut vo{true, {9, 9}};
  EXPECT_EQ(VerifyOut::decode(vo.encode()).disclosed, std::optional<bool>(true));
  vo.disclosed.reset();
  EXPECT_EQ(VerifyOut::decode(vo.encode()).disclosed, std::nullopt);
  const VerifyIn vi{42, true, {7}};
  const auto vi2 = VerifyIn::decode(vi.encode());
  EXPECT_EQ(vi2.sid, 42u);
  EXPECT_TRUE(vi2.disclose);
  EXPECT_EQ(vi2.sealed, Bytes{7});
}

TEST(Arena, ScopeRoutingAndIdempotentErase) {
  Arena arena(1 << 20);
  std::vector<int>* v = nullptr;
  {
    ArenaScope scope(arena);
    EXPECT_EQ(current_arena(), &arena);
    v = new std::vector<int>(1000, 0x5a5a5a5a);
    EXPECT_TRUE(arena.contains(v));
    EXPECT_TRUE(arena.contains(v->data()));
    {
      HostScope host;
      EXPECT_EQ(current_arena(), nullptr);
      auto* outside = new int(3);
      EXPECT_FALSE(arena.contains(outside));
      delete outside;
    }
    delete v;
  }
  EXPECT_EQ(current_arena(), nullptr);
  EXPECT_GT(arena.high_water(), 4000u);
  const Bytes before = arena.snapshot();
  EXPECT_TRUE(contains(before, Bytes{0x5a, 0x5a, 0x5a, 0x5a, 0x5a, 0x5a, 0x5a, 0x5a}));
  arena.erase();
  const Bytes once = arena.snapshot();
  EXPECT_TRUE(std::all_of(once.begin(), once.end(), [](std::uint8_t b) { return b == 0; }));
  EXPECT_EQ(arena.used(), 0u);
  arena.erase();
  EXPECT_EQ(arena.snapshot(), once);
  EXPECT_GE(arena.peak(), before.size());
}

TEST(Arena, ExhaustionThrowsBadAlloc) {
  Arena arena(4096);
  ArenaScope scope(arena);
  EXPECT_THROW(arena.allocate(8192), std::bad_alloc);
}

class RuntimeForms : public ::testing::TestWithParam<std::tuple<SecretForm, wire::Scheme>> {};

TEST_P(RuntimeForms, WatermarkedValidUnrelatedInvalid) {
  const auto [form, scheme] = GetParam();
  InlineEnclave enclave(options_for(form));
  MapHost host;
  const Asset a = scheme == wire::Scheme::kFreqyWm ? make_freqywm_asset(form, 1) : make_obt_asset(form, 1);
  host.records[a.id] = record_of(a);

  const Outcome good = run_session(enclave, host, 1, a.id, a.dw, a.tokens.holder);
  ASSERT_TRUE(good.last.ok) << wire::abort_name(good.last.code);
  ASSERT_TRUE(good.res);
  EXPECT_EQ(good.res->res, 1);
  ASSERT_TRUE(good.res->timings);
  EXPECT_EQ(good.disclosed, std::nullopt);

  const Outcome bad = run_session(enclave, host, 2, a.id, a.unrelated, a.tokens.holder, true, true);
  ASSERT_TRUE(bad.last.ok);
  EXPECT_EQ(bad.res->res, 0);
  EXPECT_EQ(bad.disclosed, std::optional<bool>(false));
  EXPECT_EQ(enclave.runtime().live_sessions(), 0u);
  EXPECT_EQ(enclave.runtime().verify_count(), 2u);
}

INSTANTIATE_TEST_SUITE_P(
    Tee, RuntimeForms,
    ::testing::Combine(::testing::Values(SecretForm::kEncrypted, SecretForm::kDirect),
                       ::testing::Values(wire::Scheme::kFreqyWm, wire::Scheme::kObt)));

TEST(Runtime, PlainModeUsesUnsignedReports) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted, false));
  MapHost host;
  const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 2);
  host.records[a.id] = record_of(a);
  const Outcome run = run_session(enclave, host, 1, a.id, a.dw, a.tokens.holder, false);
  ASSERT_TRUE(run.last.ok);
  EXPECT_EQ(run.res->res, 1);
  EXPECT_EQ(run.report.sig, crypto::Signature{});
  EXPECT_THROW(InlineEnclave(RuntimeOptions{}), InvalidArgument);  // attested needs a key
}

TEST(Runtime, SameMeasurementFreshEpkPerSession) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted));
  MapHost host;
  std::set<crypto::PublicKey> epks;
  for (std::uint64_t sid = 1; sid <= 20; ++sid) {
    HolderHandshake hs;
    const auto r = enclave.call(kOpenSession, OpenSessionIn{sid, hs.hello()}.encode(), host);
    ASSERT_TRUE(r.ok);
    const auto report = wire::RaReport::decode(r.payload);
    EXPECT_EQ(report.measurement, enclave.measurement());
    EXPECT_NO_THROW(check_report(manufacturer().public_key(), report, enclave.measurement()));
    epks.insert(report.epk);
    Bytes close;
    put_u64(close, sid);
    enclave.call(kCloseSession, close, host);
  }
  EXPECT_EQ(epks.size(), 20u);
  EXPECT_EQ(enclave.runtime().live_sessions(), 0u);
}

TEST(Runtime, SessionKeysUniqueOver1000Sessions) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted));
  MapHost host;
  const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 3);
  host.records[a.id] = record_of(a);
  std::set<FixedBytes<32>> keys;
  int valid = 0;
  for (std::uint64_t sid = 1; sid <= 1000; ++sid) {
    const Outcome run = run_session(enclave, host, sid, a.id, a.dw, a.tokens.holder);
    ASSERT_TRUE(run.last.ok);
    valid += run.res->res;
    keys.insert(run.key.bytes());
  }
  EXPECT_EQ(keys.size(), 1000u);
  EXPECT_EQ(valid, 1000);
}

TEST(Runtime, AbortCodes) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted));
  MapHost host;
  const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 4);
  host.records[a.id] = record_of(a);
  std::uint64_t sid = 100;

  EXPECT_EQ(run_session(enclave, host, ++sid, crypto::random_id(), a.dw, a.tokens.holder).last.code,
            AbortCode::kUnknownId);

  Bytes wrong = a.tokens.holder;
  wrong[0] ^= 1;
  EXPECT_EQ(run_session(enclave, host, ++sid, a.id, a.dw, wrong).last.code, AbortCode::kDecryptFailed);

  // Registered under an id the secret is not bound to.
  const crypto::AssetId alias = crypto::random_id();
  const Asset rebound = [&] {
    Asset b = a;
    b.tokens = make_tokens(SecretForm::kEncrypted, alias, as_bytes(a.secret_json));
    return b;
  }();
  host.records[alias] = record_of(rebound);
  EXPECT_EQ(run_session(enclave, host, ++sid, alias, a.dw, rebound.tokens.holder).last.code,
            AbortCode::kIdMismatch);

  const Asset unbound = make_freqywm_asset(SecretForm::kEncrypted, 5, false);
  host.records[unbound.id] = record_of(unbound);
  EXPECT_EQ(run_session(enclave, host, ++sid, unbound.id, unbound.dw, unbound.tokens.holder).last.code,
            AbortCode::kIdMismatch);

  host.records[a.id].status = FetchResult::Status::kRateLimited;
  EXPECT_EQ(run_session(enclave, host, ++sid, a.id, a.dw, a.tokens.holder).last.code,
            AbortCode::kRateLimited);
  host.records[a.id] = record_of(a);
  host.records[a.id].scheme = wire::Scheme::kFreqyWm2pc;
  EXPECT_EQ(run_session(enclave, host, ++sid, a.id, a.dw, a.tokens.holder).last.code,
            AbortCode::kUnsupportedMode);
  host.records[a.id] = record_of(a);

  EXPECT_EQ(enclave.call("dump_secrets", {}, host).code, AbortCode::kUnsupportedMode);
  EXPECT_EQ(enclave.call(kOpenSession, Bytes{1, 2}, host).code, AbortCode::kMalformed);
  EXPECT_EQ(enclave.runtime().live_sessions(), 0u);
}

TEST(Runtime, IdgenCheckCanBeDisabled) {
  RuntimeOptions o = options_for(SecretForm::kEncrypted);
  o.program.check_idgen = false;
  InlineEnclave enclave(std::move(o));
  MapHost host;
  const Asset unbound = make_freqywm_asset(SecretForm::kEncrypted, 6, false);
  host.records[unbound.id] = record_of(unbound);
  const Outcome run = run_session(enclave, host, 1, unbound.id, unbound.dw, unbound.tokens.holder);
  ASSERT_TRUE(run.last.ok);
  EXPECT_EQ(run.res->res, 1);
}

TEST(Runtime, SequencingViolationsAbort) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted));
  MapHost host;
  const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 7);
  host.records[a.id] = record_of(a);

  // Verify on a session that was never opened or finished.
  EXPECT_EQ(enclave.call(kVerify, VerifyIn{9, false, Bytes(40)}.encode(), host).code, AbortCode::kBadSession);
  HolderHandshake hs;
  ASSERT_TRUE(enclave.call(kOpenSession, OpenSessionIn{1, hs.hello()}.encode(), host).ok);
  EXPECT_EQ(enclave.call(kOpenSession, OpenSessionIn{1, hs.hello()}.encode(), host).code,
            AbortCode::kBadSession);
  EXPECT_EQ(enclave.call(kVerify, VerifyIn{1, false, Bytes(40)}.encode(), host).code, AbortCode::kBadSession);

  // A forged finish MAC aborts and tears the session down.
  HolderHandshake hs2;
  const auto open = enclave.call(kOpenSession, OpenSessionIn{2, hs2.hello()}.encode(), host);
  auto fin = hs2.on_report(wire::RaReport::decode(open.payload), manufacturer().public_key(),
                           enclave.measurement());
  fin.mac[0] ^= 1;
  EXPECT_EQ(enclave.call(kFinishSession, FinishSessionIn{2, fin}.encode(), host).code,
            AbortCode::kBadFinish);
  EXPECT_EQ(enclave.call(kFinishSession, FinishSessionIn{2, fin}.encode(), host).code,
            AbortCode::kBadSession);
  EXPECT_EQ(host.fetches.load(), 0);
}

TEST(Runtime, ReplayedRequestIsRejected) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted));
  MapHost host;
  const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 8);
  host.records[a.id] = record_of(a);

  HolderHandshake hs;
  const auto open = enclave.call(kOpenSession, OpenSessionIn{1, hs.hello()}.encode(), host);
  const auto fin = hs.on_report(wire::RaReport::decode(open.payload), manufacturer().public_key(),
                                enclave.measurement());
  ASSERT_TRUE(enclave.call(kFinishSession, FinishSessionIn{1, fin}.encode(), host).ok);
  SecureChannel ch = hs.channel();
  const Bytes sealed = ch.seal(MsgType::kVerifyReq,
                               wire::VerifyReq{a.id, to_bytes(a.dw), a.tokens.holder}.encode());
  ASSERT_TRUE(enclave.call(kVerify, VerifyIn{1, false, sealed}.encode(), host).ok);
  EXPECT_EQ(enclave.call(kVerify, VerifyIn{1, false, sealed}.encode(), host).code, AbortCode::kBadSession);

  // Same ciphertext replayed into a fresh session under a different key.
  HolderHandshake hs2;
  const auto open2 = enclave.call(kOpenSession, OpenSessionIn{2, hs2.hello()}.encode(), host);
  const auto fin2 = hs2.on_report(wire::RaReport::decode(open2.payload), manufacturer().public_key(),
                                  enclave.measurement());
  ASSERT_TRUE(enclave.call(kFinishSession, FinishSessionIn{2, fin2}.encode(), host).ok);
  EXPECT_EQ(enclave.call(kVerify, VerifyIn{2, false, sealed}.encode(), host).code, AbortCode::kBadSession);
  EXPECT_EQ(host.fetches.load(), 1);
}

TEST(Residue, NothingSurvivesVerification) {
  for (auto form : {SecretForm::kEncrypted, SecretForm::kDirect}) {
    RuntimeOptions o = options_for(form);
    std::vector<Bytes> images;
    o.before_erase = [&](ByteView image) { images.emplace_back(image.begin(), image.end()); };
    InlineEnclave enclave(std::move(o));
    MapHost host;
    const Asset a = make_freqywm_asset(form, 9);
    host.records[a.id] = record_of(a);
    const auto patterns = secret_patterns(a, form);
    for (std::uint64_t sid = 1; sid <= 5; ++sid) {
      const Outcome run = run_session(enclave, host, sid, a.id, a.dw, a.tokens.holder);
      ASSERT_TRUE(run.last.ok);
      EXPECT_EQ(run.res->res, 1);
      EXPECT_EQ(residue_hits(enclave.runtime().dump_state(), patterns), 0u) << form_name(form);
    }
    // Positive control: the probe finds D_w and s_H in the arena before erase.
    ASSERT_FALSE(images.empty());
    EXPECT_TRUE(contains(images.back(), to_bytes(a.dw.substr(0, 64))));
    EXPECT_TRUE(contains(images.back(), a.tokens.holder));
  }
}

TEST(Residue, FaultAtEveryStageClearsMemory) {
  for (const char* stage : {"fetch", "reconstruct", "detect"}) {
    RuntimeOptions o = options_for(SecretForm::kEncrypted);
    o.fault = [stage](std::string_view s) {
      if (s == stage) throw std::runtime_error("injected fault");
    };
    InlineEnclave enclave(std::move(o));
    MapHost host;
    const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 10);
    host.records[a.id] = record_of(a);
    const Outcome run = run_session(enclave, host, 1, a.id, a.dw, a.tokens.holder);
    EXPECT_FALSE(run.last.ok);
    EXPECT_EQ(run.last.code, AbortCode::kInternal) << stage;
    EXPECT_EQ(enclave.runtime().live_sessions(), 0u);
    EXPECT_EQ(residue_hits(enclave.runtime().dump_state(), secret_patterns(a, SecretForm::kEncrypted)), 0u)
        << stage;
  }
}

TEST(Runtime, ConcurrentSessionsAreIndependent) {
  InlineEnclave enclave(options_for(SecretForm::kEncrypted));
  MapHost host;
  const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 11);
  const Asset b = make_obt_asset(SecretForm::kEncrypted, 11);
  host.records[a.id] = record_of(a);
  host.records[b.id] = record_of(b);
  std::atomic<int> good{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 15; ++i) {
        const Asset& x = (i + t) % 2 ? a : b;
        const bool unrelated = i % 3 == 0;
        const Outcome run = run_session(enclave, host, 1000 * (t + 1) + i, x.id,
                                    unrelated ? x.unrelated : x.dw, x.tokens.holder);
        if (run.last.ok && run.res->res == (unrelated ? 0 : 1)) ++good;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(good.load(), 60);
  EXPECT_EQ(enclave.runtime().live_sessions(), 0u);
}

TEST(ProcessEnclave, RoundTripOverSocket) {
  const auto dir = std::filesystem::temp_directory_path() / "pvwm_tee_proc";
  std::filesystem::create_directories(dir);
  write_manufacturer_keys(manufacturer(), (dir / "mfr").string());

  ProcessOptions po;
  po.program = ProgramConfig{};
  po.manufacturer_key_path = (dir / "mfr.key").string();
  po.arena_size = 8 << 20;
  pid_t pid = 0;
  {
    auto enclave = ProcessEnclave::spawn(po);
    pid = enclave->pid();
    ASSERT_GT(pid, 0);
    EXPECT_EQ(enclave->measurement(), po.program.measurement());
    MapHost host;
    const Asset a = make_freqywm_asset(SecretForm::kEncrypted, 12);
    host.records[a.id] = record_of(a);
    for (std::uint64_t sid = 1; sid <= 5; ++sid) {
      const Outcome run = run_session(*enclave, host, sid, a.id, sid % 2 ? a.dw : a.unrelated, a.tokens.holder);
      ASSERT_TRUE(run.last.ok) << wire::abort_name(run.last.code);
      EXPECT_EQ(run.res->res, sid % 2);
    }
    EXPECT_EQ(host.fetches.load(), 5);
    EXPECT_EQ(run_session(*enclave, host, 9, crypto::random_id(), a.dw, a.tokens.holder).last.code,
              AbortCode::kUnknownId);
    EXPECT_EQ(enclave->call("no_such_entry", {}, host).code, AbortCode::kUnsupportedMode);
  }
  // The destructor reaps the child.
  EXPECT_EQ(::kill(pid, 0), -1);
  EXPECT_EQ(errno, ESRCH);
  std::filesystem::remove_all(dir);
}

TEST(ProcessEnclave, MissingKeyFailsToStart) {
  ProcessOptions po;
  po.manufacturer_key_path = "/nonexistent/mfr.key";
  EXPECT_THROW(ProcessEnclave::spawn(po), Error);
}
