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
#include <vector>

#include "pvwm/cache/cache.hpp"
#include "pvwm/data/synthetic.hpp"
#include "pvwm/freqywm/freqywm.hpp"

namespace {

using namespace pvwm;

std::vector<cache::CacheEntry> entries(std::size_t n, std::mt19937_64& rng) {
  std::vector<cache::CacheEntry> out(n);
  std::uniform_int_distribution<int> sim(70, 100);
  for (auto& e : out) {
    for (auto& b : e.h) b = static_cast<std::uint8_t>(rng());
    e.id = crypto::random_id();
    e.res = rng() & 1;
    e.sim = sim(rng);
  }
  return out;
}

void BM_ProportionalGet(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto es = entries(c, rng);
  cache::ProportionalCache cache(c, 70.0);
  for (const auto& e : es) cache.put(e);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& e = es[i++ % es.size()];
    benchmark::DoNotOptimize(cache.get(e.h, e.id, 85.0));
  }
}
BENCHMARK(BM_ProportionalGet)->Arg(100)->Arg(1000);

void BM_ProportionalPut(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto es = entries(4 * c, rng);
  cache::ProportionalCache cache(c, 70.0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cache.put(es[i++ % es.size()]));
}
BENCHMARK(BM_ProportionalPut)->Arg(100)->Arg(1000);

void BM_MinHash(benchmark::State& state) {
  std::mt19937_64 rng(3);
  data::ZipfOptions z;
  z.distinct = 1000;
  z.length = static_cast<std::size_t>(state.range(0));
  const auto data = data::zipf_dataset(rng, z);
  for (auto _ : state) benchmark::DoNotOptimize(cache::minhash(data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MinHash)->Arg(1000)->Arg(50000)->Unit(benchmark::kMicrosecond);

}  // namespace
