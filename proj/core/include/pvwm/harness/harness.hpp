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
#include <string>
#include <vector>

#include "pvwm/cache/cache.hpp"
#include "pvwm/prover/config.hpp"
#include "pvwm/tee/enclave.hpp"
#include "pvwm/wire/wire.hpp"

namespace pvwm::harness {

// Cache policies compared in the hit-ratio study.
//   kLruBase:  classic LRU, Type-1 workload (re-requests repeat the triple)
//   kLruBaseR: classic LRU, Type-2 workload (fresh similarity per request)
//   kLruProp:  proportional cache, Type-2 workload
enum class Policy : std::uint8_t { kLruBase, kLruBaseR, kLruProp };

const char* policy_name(Policy p) noexcept;
Policy parse_policy(std::string_view text);

struct CacheExperimentConfig {
  std::vector<std::size_t> capacities{10, 20, 50, 100, 250};
  std::size_t pairs = 250;
  std::size_t requests = 1000;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double t_cache = 70.0;
  bool admit_on_miss = false;
  cache::ServeRule rule = cache::ServeRule::literal;
};

struct CacheCell {
  Policy policy{};
  std::size_t capacity = 0;
  double mean_hr = 0.0;
  double min_hr = 0.0;
  double max_hr = 0.0;
};

struct CacheResults {
  std::vector<CacheCell> cells;
  // Mean over every capacity of one policy.
  double mean_hr(Policy p) const;
  const CacheCell* find(Policy p, std::size_t capacity) const;
  // "policy,capacity,mean_hr,min_hr,max_hr"
  std::string to_csv() const;
};

// Hit ratio of one trial.
double run_cache_trial(Policy policy, std::size_t capacity, const CacheExperimentConfig& config,
                       std::uint64_t trial_seed);

CacheResults run_cache_experiment(const CacheExperimentConfig& config,
                                  const std::vector<Policy>& policies = {Policy::kLruBase,
                                                                         Policy::kLruBaseR,
                                                                         Policy::kLruProp});

inline constexpr const char* kTaskNames[5] = {"establish_session", "receive_data",
                                              "reconstruct_secret", "detect_watermark",
                                              "terminate_session"};

struct LatencyConfig {
  wire::Scheme scheme = wire::Scheme::kFreqyWm;
  prover::ServiceMode mode = prover::ServiceMode::kTee;
  std::size_t runs = 10;
  std::size_t warmup = 1;
  std::uint64_t seed = 7;
  prover::EnclaveKind enclave = prover::EnclaveKind::kProcess;
  // Asset sizes.
  std::size_t freqywm_distinct = 1000;
  std::size_t freqywm_length = 50000;
  std::size_t obt_rows = 1000;
};

struct LatencyRow {
  wire::Scheme scheme{};
  prover::ServiceMode mode{};
  double task_mean_ms[5] = {};
  double total_mean_ms = 0.0;
  double holder_cpu_mean_ms = 0.0;
  std::size_t runs = 0;
  bool all_valid = false;
};

// Starts a local prover, generates an asset and times `runs` verifications.
LatencyRow run_latency_breakdown(const LatencyConfig& config);

// "scheme,mode,task,mean_ms" with one row per task plus a "total" row.
std::string latency_csv(const std::vector<LatencyRow>& rows);

}  // namespace pvwm::harness
