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


// End-to-end tests: owner, prover service and holder over loopback TCP.

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <random>
#include <thread>

#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/data/synthetic.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"
#include "pvwm/prover/service.hpp"
#include "pvwm/tee/attestation.hpp"

using namespace pvwm;
using client::HolderOptions;
using prover::ServiceMode;

namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("pvwm_service_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void write_text(const std::string& path, const std::string& text) { write_file_atomic(path, as_bytes(text)); }

class Deployment {
 public:
  explicit Deployment(ServiceMode mode, prover::ServiceConfig cfg = {},
                      prover::EnclaveKind kind = prover::EnclaveKind::kInline) {
    tee::write_manufacturer_keys(crypto::SigningKeypair::generate(), dir_.file("mfr"));
    cfg.mode = mode;
    cfg.listen = {"127.0.0.1", 0};
    cfg.manufacturer_key = dir_.file("mfr.key");
    cfg.enclave = kind;
    cfg.arena_mb = 16;
    auto enclave = prover::make_enclave(cfg);
    core_ = std::make_unique<prover::ProverCore>(cfg, std::move(enclave));
    server_ = std::make_unique<prover::Server>(*core_, cfg.listen);
    server_->start();
  }
  ~Deployment() { server_->stop(); }

  net::Endpoint endpoint() const { return {"127.0.0.1", server_->port()}; }
  prover::ProverCore& core() { return *core_; }
  const TempDir& dir() const { return dir_; }

  client::OwnerOptions owner(wire::Scheme scheme, const std::string& asset, const std::string& out) const {
    client::OwnerOptions o;
    o.asset_path = asset;
    o.scheme = scheme;
    o.out_dir = out;
    o.prover = endpoint();
    o.mode = core_->config().mode;
    o.manufacturer_pub = dir_.file("mfr.pub");
    o.date = "2026-05-01";
    o.seed = 11;
    return o;
  }

 private:
  TempDir dir_;
  std::unique_ptr<prover::ProverCore> core_;
  std::unique_ptr<prover::Server> server_;
};

// Original asset, an unrelated one and paths for both.
struct Assets {
  std::string original;
  std::string unrelated;
};

Assets write_assets(const TempDir& dir, wire::Scheme scheme, std::uint64_t seed, std::size_t distinct = 300,
                    std::size_t length = 6000) {
  std::mt19937_64 rng(seed);
  Assets a{dir.file("original.dat"), dir.file("unrelated.dat")};
  if (scheme == wire::Scheme::kObt) {
    write_text(a.original, obt::serialize_table(data::gaussian_table(rng, 1000)));
    write_text(a.unrelated, obt::serialize_table(data::gaussian_table(rng, 1000, 0.0, 1.0, "u")));
  } else {
    data::ZipfOptions zo;
    zo.distinct = distinct;
    zo.length = length;
    write_text(a.original, freqywm::serialize_dataset(data::zipf_dataset(rng, zo)));
    zo.prefix = "other";
    write_text(a.unrelated, freqywm::serialize_dataset(data::zipf_dataset(rng, zo)));
  }
  return a;
}

HolderOptions no_cache() {
  HolderOptions h;
  h.use_cache = false;
  return h;
}

struct ModeCase {
  ServiceMode mode;
  wire::Scheme scheme;
};

std::string case_name(const ::testing::TestParamInfo<ModeCase>& info) {
  std::string s = std::string(prover::mode_name(info.param.mode)) + "_" + client::scheme_name(info.param.scheme);
  for (auto& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

}  // namespace

class EndToEnd : public ::testing::TestWithParam<ModeCase> {};

TEST_P(EndToEnd, GenerateThenVerify) {
  const auto [mode, scheme] = GetParam();
  Deployment d(mode);
  const bool small = scheme == wire::Scheme::kFreqyWm2pc;
  const Assets assets = write_assets(d.dir(), scheme, 5, small ? 24 : 300, small ? 600 : 6000);
  auto opts = d.owner(scheme, assets.original, d.dir().file("owner"));
  if (small) opts.circuit.num_pairs = 6;
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(opts, tcp);
  EXPECT_TRUE(fs::exists(gen.bundle_path));
  EXPECT_TRUE(fs::exists(gen.asset_path));
  EXPECT_EQ(fs::status(gen.keystore_path).permissions() & fs::perms::others_read, fs::perms::none);
  EXPECT_EQ(d.core().stats().registrations.load(), 1u);

  net::RecordingDialer rec;
  const auto good = client::holder_verify_files(gen.bundle_path, gen.asset_path, std::nullopt, {}, rec);
  EXPECT_TRUE(good.valid);
  const auto bad = client::holder_verify_files(gen.bundle_path, assets.unrelated, std::nullopt, {}, rec);
  EXPECT_FALSE(bad.valid);
  // The holder only ever talks to the prover.
  for (const auto& ep : rec.dialled()) EXPECT_EQ(ep, d.endpoint());
  EXPECT_EQ(rec.dialled().size(), 2u);
}

INSTANTIATE_TEST_SUITE_P(
    Service, EndToEnd,
    ::testing::Values(ModeCase{ServiceMode::kTee, wire::Scheme::kFreqyWm}, ModeCase{ServiceMode::kTee, wire::Scheme::kObt},
                      ModeCase{ServiceMode::kTeeDirect, wire::Scheme::kFreqyWm},
                      ModeCase{ServiceMode::kTeeDirect, wire::Scheme::kObt},
                      ModeCase{ServiceMode::kPlain, wire::Scheme::kFreqyWm},
                      ModeCase{ServiceMode::kTwoPc, wire::Scheme::kFreqyWm2pc}),
    case_name);

TEST(Service, UnknownIdAborts) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 6);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  auto bundle = gen.bundle;
  bundle.id = crypto::random_id();
  const Bytes asset = read_file(gen.asset_path);
  try {
    client::holder_verify(bundle, {}, as_chars(asset), d.endpoint(), no_cache(), tcp);
    FAIL() << "expected an abort";
  } catch (const wire::PeerAborted& e) {
    EXPECT_EQ(e.code(), wire::AbortCode::kUnknownId);
  }
}

TEST(Service, WrongTokenAborts) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 7);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  auto bundle = gen.bundle;
  bundle.holder_token[3] ^= 0x40;
  const Bytes asset = read_file(gen.asset_path);
  try {
    client::holder_verify(bundle, {}, as_chars(asset), d.endpoint(), no_cache(), tcp);
    FAIL() << "expected an abort";
  } catch (const wire::PeerAborted& e) {
    EXPECT_EQ(e.code(), wire::AbortCode::kDecryptFailed);
  }
}

TEST(Service, MeasurementMismatchSendsNothing) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 8);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  for (int which = 0; which < 2; ++which) {
    auto bundle = gen.bundle;
    if (which == 0) {
      bundle.measurement = prover::program_for(ServiceMode::kTeeDirect, true).measurement();
    } else {
      bundle.manufacturer = crypto::SigningKeypair::generate().public_key();
    }
    const Bytes asset = read_file(gen.asset_path);
    EXPECT_THROW(client::holder_verify(bundle, {}, as_chars(asset), d.endpoint(), no_cache(), tcp),
                 tee::AttestationError);
  }
  // Sessions were opened but no request ever reached the enclave.
  EXPECT_EQ(d.core().stats().verifications.load(), 0u);
  for (int i = 0; i < 50 && d.core().stats().aborts.load() + d.core().stats().errors.load() < 2; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  for (const auto& line : d.core().log().recent()) EXPECT_EQ(line.find("fetch"), std::string::npos) << line;
}

TEST(Service, UnreachableProverLeavesNoBundle) {
  TempDir dir;
  const Assets assets = write_assets(dir, wire::Scheme::kFreqyWm, 9);
  net::Endpoint dead;
  {
    auto l = net::Listener::bind({"127.0.0.1", 0});
    dead = {"127.0.0.1", l.port()};
  }
  tee::write_manufacturer_keys(crypto::SigningKeypair::generate(), dir.file("mfr"));
  client::OwnerOptions o;
  o.asset_path = assets.original;
  o.out_dir = dir.file("out");
  o.prover = dead;
  o.manufacturer_pub = dir.file("mfr.pub");
  net::TcpDialer tcp;
  EXPECT_THROW(client::owner_generate(o, tcp), Error);
  EXPECT_FALSE(fs::exists(dir.file("out")));
}

TEST(Service, DuplicateRegistrationRejected) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 10);
  net::TcpDialer tcp;
  client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("a")), tcp);
  auto o = d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("b"));
  o.metadata = "fixed";
  client::owner_generate(o, tcp);
  // Same owner, metadata and date: same id.
  o.out_dir = d.dir().file("c");
  try {
    client::owner_generate(o, tcp);
    FAIL() << "expected a duplicate";
  } catch (const client::RegistrationFailed& e) {
    EXPECT_EQ(e.code(), wire::ErrCode::kDuplicate);
  }
  EXPECT_FALSE(fs::exists(d.dir().file("c")));
}

TEST(Service, OwnerPskEnforced) {
  prover::ServiceConfig cfg;
  FixedBytes<32> psk{};
  psk[5] = 7;
  cfg.owner_psk = psk;
  Deployment d(ServiceMode::kTee, cfg);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 11);
  net::TcpDialer tcp;
  auto o = d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("a"));
  try {
    client::owner_generate(o, tcp);
    FAIL() << "expected unauthorized";
  } catch (const client::RegistrationFailed& e) {
    EXPECT_EQ(e.code(), wire::ErrCode::kUnauthorized);
  }
  o.owner_psk = psk;
  const auto gen = client::owner_generate(o, tcp);
  EXPECT_TRUE(client::holder_verify_files(gen.bundle_path, gen.asset_path, std::nullopt, no_cache(), tcp).valid);
}

TEST(Service, CachedRepeatSkipsTheEnclave) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 12);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  const auto first = client::holder_verify_files(gen.bundle_path, gen.asset_path, std::nullopt, {}, tcp);
  EXPECT_TRUE(first.valid);
  EXPECT_FALSE(first.from_cache);
  ASSERT_TRUE(first.similarity);
  EXPECT_DOUBLE_EQ(*first.similarity, 100.0);
  const auto calls = d.core().stats().enclave_calls.load();
  const auto second = client::holder_verify_files(gen.bundle_path, gen.asset_path, std::nullopt, {}, tcp);
  EXPECT_TRUE(second.valid);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(d.core().stats().enclave_calls.load(), calls);

  // An unrelated asset falls below the admission threshold and is never stored.
  const auto u1 = client::holder_verify_files(gen.bundle_path, assets.unrelated, std::nullopt, {}, tcp);
  const auto u2 = client::holder_verify_files(gen.bundle_path, assets.unrelated, std::nullopt, {}, tcp);
  EXPECT_FALSE(u1.valid);
  EXPECT_FALSE(u2.valid);
  EXPECT_FALSE(u2.from_cache);
  ASSERT_TRUE(u1.similarity);
  EXPECT_LT(*u1.similarity, 70.0);
  EXPECT_EQ(d.core().stats().cache_puts.load(), 1u);
}

TEST(Service, TimingsPartitionTheTotal) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 13);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  const auto r = client::holder_verify_files(gen.bundle_path, gen.asset_path, std::nullopt, no_cache(), tcp);
  const auto& t = r.timings;
  EXPECT_EQ(t.establish_ns + t.receive_ns + t.reconstruct_ns + t.detect_ns + t.terminate_ns, t.total_ns);
  EXPECT_GT(t.detect_ns, 0u);
  EXPECT_GT(t.reconstruct_ns, 0u);
  EXPECT_GT(r.bytes_sent, fs::file_size(gen.asset_path));
}

TEST(Service, ThousandConsecutiveVerifications) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 14, 100, 1500);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  const Bytes good = read_file(gen.asset_path);
  const Bytes bad = read_file(assets.unrelated);
  int correct = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool want = i % 4 != 0;
    const auto r = client::holder_verify(gen.bundle, {}, as_chars(want ? good : bad), d.endpoint(), no_cache(), tcp);
    correct += r.valid == want;
  }
  EXPECT_EQ(correct, 1000);
  EXPECT_EQ(d.core().stats().verifications.load(), 1000u);
  auto* enclave = dynamic_cast<tee::InlineEnclave*>(d.core().enclave());
  ASSERT_NE(enclave, nullptr);
  EXPECT_EQ(enclave->runtime().live_sessions(), 0u);
}

TEST(Service, ConcurrentHolders) {
  Deployment d(ServiceMode::kTee);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kFreqyWm, 15);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kFreqyWm, assets.original, d.dir().file("o")), tcp);
  const Bytes good = read_file(gen.asset_path);
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      net::TcpDialer dialer;
      for (int i = 0; i < 10; ++i) {
        ok += client::holder_verify(gen.bundle, {}, as_chars(good), d.endpoint(), no_cache(), dialer).valid;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok.load(), 40);
}

TEST(Service, ProcessEnclaveDeployment) {
  Deployment d(ServiceMode::kTee, {}, prover::EnclaveKind::kProcess);
  const Assets assets = write_assets(d.dir(), wire::Scheme::kObt, 16);
  net::TcpDialer tcp;
  const auto gen = client::owner_generate(d.owner(wire::Scheme::kObt, assets.original, d.dir().file("o")), tcp);
  EXPECT_TRUE(client::holder_verify_files(gen.bundle_path, gen.asset_path, std::nullopt, no_cache(), tcp).valid);
  EXPECT_FALSE(client::holder_verify_files(gen.bundle_path, assets.unrelated, std::nullopt, no_cache(), tcp).valid);
}

TEST(Bundle, JsonRoundTripAndValidation) {
  client::Bundle b;
  b.id = crypto::random_id();
  b.scheme = wire::Scheme::kObt;
  b.mode = ServiceMode::kTeeDirect;
  b.asset = "watermarked.csv";
  b.holder_token = {1, 2, 3};
  b.prover = {"127.0.0.1", 7400};
  b.measurement = prover::program_for(ServiceMode::kTeeDirect, true).measurement();
  b.manufacturer = crypto::SigningKeypair::generate().public_key();
  b.policy = "research use";
  const auto c = client::Bundle::from_json(b.to_json());
  EXPECT_EQ(c.id, b.id);
  EXPECT_EQ(c.scheme, b.scheme);
  EXPECT_EQ(c.mode, b.mode);
  EXPECT_EQ(c.holder_token, b.holder_token);
  EXPECT_EQ(c.prover, b.prover);
  EXPECT_EQ(c.measurement, b.measurement);
  EXPECT_EQ(c.manufacturer, b.manufacturer);
  EXPECT_EQ(c.policy, b.policy);

  auto no_key = b;
  no_key.manufacturer.reset();
  EXPECT_THROW(client::Bundle::from_json(no_key.to_json()), ParseError);
  EXPECT_THROW(client::Bundle::from_json("{}"), ParseError);
  EXPECT_THROW(client::Bundle::from_json("not json"), ParseError);
}
