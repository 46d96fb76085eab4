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

#include <random>

#include "pvwm/data/synthetic.hpp"
#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"

namespace {

using namespace pvwm;

freqywm::TokenDataset zipf(std::size_t distinct, std::size_t length) {
  std::mt19937_64 rng(42);
  data::ZipfOptions z;
  z.distinct = distinct;
  z.length = length;
  return data::zipf_dataset(rng, z);
}

FixedBytes<32> fixed_key() {
  FixedBytes<32> key{};
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(i * 7 + 1);
  return key;
}

void BM_FreqyInsert(benchmark::State& state) {
  const auto data = zipf(static_cast<std::size_t>(state.range(0)), 50 * static_cast<std::size_t>(state.range(0)));
  freqywm::InsertOptions o;
  o.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(freqywm::insert(data, fixed_key(), o));
}
BENCHMARK(BM_FreqyInsert)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FreqyDetect(benchmark::State& state) {
  const auto data = zipf(static_cast<std::size_t>(state.range(0)), 50 * static_cast<std::size_t>(state.range(0)));
  freqywm::InsertOptions o;
  o.seed = 1;
  const auto r = freqywm::insert(data, fixed_key(), o);
  const auto params = freqywm::default_params(r.secret);
  for (auto _ : state) benchmark::DoNotOptimize(freqywm::detect(r.watermarked, r.secret, params));
}
BENCHMARK(BM_FreqyDetect)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_ObtInsert(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const auto table = data::gaussian_table(rng, static_cast<std::size_t>(state.range(0)), 0.0, 10.0, "row");
  const auto secret = obt::secret_gen(32, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(obt::insert(table, secret));
}
BENCHMARK(BM_ObtInsert)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_ObtDetect(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const auto table = data::gaussian_table(rng, static_cast<std::size_t>(state.range(0)), 0.0, 10.0, "row");
  const auto secret = obt::secret_gen(32, 5.0);
  const auto marked = obt::insert(table, secret);
  for (auto _ : state) benchmark::DoNotOptimize(obt::detect(marked, secret));
}
BENCHMARK(BM_ObtDetect)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace
