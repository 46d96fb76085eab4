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
#include <random>
#include <string>

#include "pvwm/freqywm/freqywm.hpp"
#include "pvwm/obt/obt.hpp"

// Seeded synthetic assets for tests, benchmarks and experiments.
namespace pvwm::data {

struct ZipfOptions {
  std::size_t distinct = 1000;
  std::size_t length = 50000;
  double exponent = 1.0;
  std::string prefix = "tok";
};

// Tokens "<prefix><rank>" with frequency proportional to 1/rank^exponent; each
// token appears at least once. Order is shuffled.
freqywm::TokenDataset zipf_dataset(std::mt19937_64& rng, const ZipfOptions& options);

// Rows "<prefix><i>" with N(mean, stdev) values.
obt::NumericTable gaussian_table(std::mt19937_64& rng, std::size_t rows, double mean = 0.0,
                                 double stdev = 1.0, const std::string& prefix = "row");

}  // namespace pvwm::data
