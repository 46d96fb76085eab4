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

#include <array>
#include <atomic>
#include <random>
#include <set>
#include <thread>
#include <tuple>

#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/crypto/crypto.hpp"

using namespace pvwm;
using namespace pvwm::crypto;

namespace {

// Upper 0.1% point of chi-square with 255 degrees of freedom.
constexpr double kChi2Crit255 = 330.52;

double chi2_uniform(const std::array<std::uint64_t, 256>& counts, std::uint64_t n) {
  const double expected = static_cast<double>(n) / 256.0;
  double chi2 = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

std::array<std::uint64_t, 256> holder_share_histogram(std::uint8_t secret, int sharings) {
  std::array<std::uint64_t, 256> counts{};
  const Bytes s{secret};
  for (int i = 0; i < sharings; ++i) ++counts[share(s).holder.bytes[0]];
  return counts;
}

Bytes hexb(std::string_view h) { return from_hex(h); }

}  // namespace

TEST(Sha256, NistVectors) {
  EXPECT_EQ(to_hex(sha256(as_bytes("abc"))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(to_hex(sha256(as_bytes(""))),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256({as_bytes("a"), as_bytes("bc")}), sha256(as_bytes("abc")));
}

// RFC 4231 test case 2.
TEST(Hmac, Rfc4231Case2) {
  EXPECT_EQ(to_hex(hmac_sha256(as_bytes("Jefe"), as_bytes("what do ya want for nothing?"))),
            "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

// RFC 5869 test case 1.
TEST(Hkdf, Rfc5869Case1) {
  const Bytes ikm(22, 0x0b);
  const Bytes okm = hkdf_sha256(ikm, hexb("000102030405060708090a0b0c"),
                                hexb("f0f1f2f3f4f5f6f7f8f9"), 42);
  EXPECT_EQ(to_hex(okm),
            "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865");
}

// GCM spec test case 16 (AES-256, 60-byte plaintext, 20-byte AAD).
TEST(Aead, GcmTestCase16) {
  const auto key = SymmetricKey::from_bytes(
      hexb("feffe9928665731c6d6a8f9467308308feffe9928665731c6d6a8f9467308308"));
  const auto nonce = fixed_from_hex<kNonceSize>("cafebabefacedbaddecaf888");
  const Bytes pt = hexb(
      "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6"
      "b525b16aedf5aa0de657ba637b39");
  const Bytes aad = hexb("feedfacedeadbeeffeedfacedeadbeefabaddad2");
  const AuthCiphertext ct = encrypt_with_nonce(key, nonce, pt, aad);
  EXPECT_EQ(to_hex(ct.body),
            "522dc1f099567d07f47f37a32a84427d643a8cdcbfe5c0c97598a2bd2555d1aa8cb08e48590dbb3da7b08b10"
            "56828838c5f61e6393ba7a0abcc9f662");
  EXPECT_EQ(to_hex(ct.tag), "76fc6ece0f4e1768cddf8853bb2d551b");
  EXPECT_EQ(decrypt(key, ct, aad), pt);
}

TEST(Aead, RoundTripRandomKeysAndLengths) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const SymmetricKey k = gen_key();
    Bytes m(rng() % 300);
    for (auto& b : m) b = static_cast<std::uint8_t>(rng());
    const Bytes aad = random_bytes(rng() % 8);
    const AuthCiphertext ct = encrypt(k, m, aad);
    EXPECT_EQ(decrypt(k, AuthCiphertext::parse(ct.serialize()), aad), m);
  }
}

TEST(Aead, EverySingleBitFlipIsRejected) {
  const SymmetricKey k = gen_key();
  const Bytes wire = encrypt(k, as_bytes("sec: a short secret")).serialize();
  for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
    Bytes tampered = wire;
    tampered[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_THROW(decrypt(k, AuthCiphertext::parse(tampered)), AuthError) << "bit " << bit;
  }
}

TEST(Aead, WrongKeyOrAadIsRejected) {
  const SymmetricKey k = gen_key();
  const AuthCiphertext ct = encrypt(k, as_bytes("payload"), as_bytes("id-1"));
  EXPECT_THROW(decrypt(gen_key(), ct, as_bytes("id-1")), AuthError);
  EXPECT_THROW(decrypt(k, ct, as_bytes("id-2")), AuthError);
}

TEST(Aead, ParseRejectsShortInput) {
  EXPECT_THROW(AuthCiphertext::parse(Bytes(kNonceSize + kTagSize - 1)), ParseError);
}

TEST(Aead, FreshNoncePerEncryption) {
  const SymmetricKey k = gen_key();
  std::set<FixedBytes<kNonceSize>> nonces;
  for (int i = 0; i < 1000; ++i) nonces.insert(encrypt(k, as_bytes("x")).nonce);
  EXPECT_EQ(nonces.size(), 1000u);
}

TEST(SecretSharing, ExhaustiveOneByteReconstruct) {
  int exact = 0;
  for (int v = 0; v < 256; ++v) {
    const Bytes s{static_cast<std::uint8_t>(v)};
    const SharePair p = share(s);
    EXPECT_EQ(p.holder.role, ShareRole::holder);
    EXPECT_EQ(p.prover.role, ShareRole::prover);
    exact += reconstruct(p.holder, p.prover) == s;
  }
  EXPECT_EQ(exact, 256);
}

TEST(SecretSharing, RandomizedLongSecrets) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    Bytes s(1 + rng() % 4096);
    for (auto& b : s) b = static_cast<std::uint8_t>(rng());
    const SharePair p = share(s);
    ASSERT_EQ(reconstruct(p.prover, p.holder), s);
  }
}

TEST(SecretSharing, HolderMaskVariant) {
  const Bytes s = to_bytes("abc");
  const Bytes mask{1, 2, 3};
  const SharePair p = share_with_holder_mask(s, mask);
  EXPECT_EQ(p.holder.bytes, mask);
  EXPECT_EQ(p.prover.bytes, (Bytes{'a' ^ 1, 'b' ^ 2, 'c' ^ 3}));
  EXPECT_THROW(share_with_holder_mask(s, Bytes{1}), InvalidArgument);
  EXPECT_THROW(share(Bytes{}), InvalidArgument);
  EXPECT_THROW(reconstruct(Bytes{1}, Bytes{1, 2}), InvalidArgument);
}

TEST(SecretSharing, SingleShareIsUniformForAnySecret) {
  constexpr int kSharings = 10000;
  for (std::uint8_t secret : {std::uint8_t{0x00}, std::uint8_t{0xa5}}) {
    const auto counts = holder_share_histogram(secret, kSharings);
    EXPECT_LT(chi2_uniform(counts, kSharings), kChi2Crit255) << "secret " << int(secret);
  }
}

TEST(SecretSharing, ProverShareMarginalsIndistinguishable) {
  // Two-sample chi-square between the s_P marginals of two fixed secrets.
  constexpr int kSharings = 10000;
  std::array<std::uint64_t, 256> a{}, b{};
  for (int i = 0; i < kSharings; ++i) {
    ++a[share(Bytes{0x00}).prover.bytes[0]];
    ++b[share(Bytes{0xff}).prover.bytes[0]];
  }
  double chi2 = 0.0;
  for (int v = 0; v < 256; ++v) {
    const double sum = static_cast<double>(a[v] + b[v]);
    if (sum == 0) continue;
    const double d = static_cast<double>(a[v]) - static_cast<double>(b[v]);
    chi2 += d * d / sum;
  }
  EXPECT_LT(chi2, kChi2Crit255);
}

TEST(Idgen, GoldenValue) {
  // sha256(u64be(len) || field) over the three fields, computed independently.
  EXPECT_EQ(to_hex(idgen(as_bytes("alice"), as_bytes("dataset-v1"), as_bytes("2026-01-01")).digest),
            "3ea0d29ae146f429a84d91968149f15a1340c62d0e9cfd3833bb4ac13f573c8e");
}

TEST(Idgen, FramingSeparatesConcatenations) {
  EXPECT_NE(idgen(as_bytes("ab"), as_bytes("c"), as_bytes("")),
            idgen(as_bytes("a"), as_bytes("bc"), as_bytes("")));
  EXPECT_NE(idgen(as_bytes(""), as_bytes("abc"), as_bytes("")),
            idgen(as_bytes("abc"), as_bytes(""), as_bytes("")));
}

TEST(Idgen, InjectiveOnRandomTriples) {
  // Short fields over a two-letter alphabet make boundary shifts common.
  std::mt19937_64 rng(17);
  std::set<std::tuple<std::string, std::string, std::string>> triples;
  std::set<AssetId> ids;
  auto field = [&] {
    std::string s(rng() % 6, 'a');
    for (auto& c : s) c = "ab"[rng() & 1];
    return s;
  };
  while (triples.size() < 100000) {
    auto t = std::make_tuple(field(), field(), field() + std::to_string(rng() % 64));
    if (!triples.insert(t).second) continue;
    ids.insert(idgen(as_bytes(std::get<0>(t)), as_bytes(std::get<1>(t)), as_bytes(std::get<2>(t))));
  }
  EXPECT_EQ(ids.size(), triples.size());
}

TEST(Idgen, BindingMatchesIdgen) {
  const IdBinding b{"o", "m", "d"};
  EXPECT_EQ(b.id(), idgen(as_bytes("o"), as_bytes("m"), as_bytes("d")));
  EXPECT_NE(random_id(), random_id());
}

// RFC 8032 section 7.1 test 1.
TEST(Ed25519, Rfc8032Test1) {
  const auto kp = SigningKeypair::from_seed(
      fixed_from_hex<32>("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60"));
  EXPECT_EQ(to_hex(kp.public_key()),
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const Signature sig = kp.sign({});
  EXPECT_EQ(to_hex(sig),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39"
            "701cf9b46bd25bf5f0595bbe24655141438e7a100b");
  EXPECT_TRUE(verify_sig(kp.public_key(), sig, {}));
}

TEST(Ed25519, RejectsTamperingAndWrongKey) {
  const auto kp = SigningKeypair::generate();
  const Bytes msg = to_bytes("measurement||epk");
  Signature sig = kp.sign(msg);
  EXPECT_TRUE(verify_sig(kp.public_key(), sig, msg));
  EXPECT_FALSE(verify_sig(SigningKeypair::generate().public_key(), sig, msg));
  Bytes other = msg;
  other[0] ^= 1;
  EXPECT_FALSE(verify_sig(kp.public_key(), sig, other));
  sig[5] ^= 0x40;
  EXPECT_FALSE(verify_sig(kp.public_key(), sig, msg));
  EXPECT_FALSE(verify_sig(kp.public_key(), Bytes(10), msg));
}

TEST(X25519, AgreementIsSymmetric) {
  const auto a = DhKeypair::generate();
  const auto b = DhKeypair::generate();
  EXPECT_EQ(a.agree(b.public_key()), b.agree(a.public_key()));
  EXPECT_NE(a.agree(b.public_key()), a.agree(DhKeypair::generate().public_key()));
}

TEST(X25519, RejectsLowOrderPeer) {
  const auto a = DhKeypair::generate();
  EXPECT_THROW(a.agree(PublicKey{}), ProtocolError);
}

TEST(Crypto, ConcurrentUseIsSafe) {
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        const SymmetricKey k = gen_key();
        const Bytes m = random_bytes(64);
        if (decrypt(k, encrypt(k, m)) != m) ++failures;
        const SharePair p = share(m);
        if (reconstruct(p.holder, p.prover) != m) ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(failures.load(), 0);
}
