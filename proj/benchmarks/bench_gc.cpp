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

#include "pvwm/gc/circuit.hpp"
#include "pvwm/gc/garble.hpp"
#include "pvwm/gc/verify_circuit.hpp"

namespace {

using namespace pvwm;

gc::Circuit verify_circuit(std::int64_t pairs) {
  gc::VerifyCircuitParams p;
  p.num_pairs = static_cast<std::uint32_t>(pairs);
  p.num_slots = 64;
  p.modulus_bits = 4;
  p.min_pairs = 1;
  return gc::build_verify_circuit(p);
}

void BM_Garble(benchmark::State& state) {
  const auto c = verify_circuit(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gc::garble(c));
  state.counters["and_gates"] = static_cast<double>(c.and_count());
}
BENCHMARK(BM_Garble)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto c = verify_circuit(state.range(0));
  const auto g = gc::garble(c);
  std::mt19937_64 rng(4);
  gc::BitVector bits(c.num_inputs());
  for (auto&& b : bits) b = rng() & 1;
  const auto labels = gc::encode(g.e, bits);
  for (auto _ : state) benchmark::DoNotOptimize(gc::eval(c, g.f, labels));
  state.counters["and_gates"] = static_cast<double>(c.and_count());
}
BENCHMARK(BM_Evaluate)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
