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

#include <benchmark/benchmark.h>

#include "pvwm/crypto/crypto.hpp"

namespace {

using namespace pvwm;

void BM_Share(benchmark::State& state) {
  const Bytes secret = crypto::random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crypto::share(secret));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Share)->Arg(32)->Arg(1024);

void BM_Reconstruct(benchmark::State& state) {
  const auto pair = crypto::share(crypto::random_bytes(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(crypto::reconstruct(pair.holder, pair.prover));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reconstruct)->Arg(32)->Arg(1024);

void BM_Encrypt(benchmark::State& state) {
  const auto key = crypto::gen_key();
  const Bytes msg = crypto::random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crypto::encrypt(key, msg));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Encrypt)->Arg(256)->Arg(64 << 10);

void BM_Sha256(benchmark::State& state) {
  const Bytes msg = crypto::random_bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crypto::sha256(msg));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(64 << 10);

void BM_IdGen(benchmark::State& state) {
  const Bytes owner = to_bytes("owner"), meta = to_bytes("dataset v1"), date = to_bytes("2026-01-01");
  for (auto _ : state) benchmark::DoNotOptimize(crypto::idgen(owner, meta, date));
}
BENCHMARK(BM_IdGen);

}  // namespace
