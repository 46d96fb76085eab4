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

#include "pvwm/data/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "pvwm/common/error.hpp"

namespace pvwm::data {

freqywm::TokenDataset zipf_dataset(std::mt19937_64& rng, const ZipfOptions& o) {
  if (o.distinct == 0 || o.length < o.distinct) {
    throw InvalidArgument("zipf dataset needs length >= distinct >= 1");
  }
  std::vector<double> weight(o.distinct);
  double total = 0.0;
  for (std::size_t r = 0; r < o.distinct; ++r) {
    weight[r] = 1.0 / std::pow(static_cast<double>(r + 1), o.exponent);
    total += weight[r];
  }
  // One guaranteed occurrence each, the rest spread by weight.
  const double spare = static_cast<double>(o.length - o.distinct);
  freqywm::TokenDataset out;
  out.reserve(o.length);
  std::size_t placed = 0;
  for (std::size_t r = 0; r < o.distinct; ++r) {
    const auto extra = static_cast<std::size_t>(std::floor(spare * weight[r] / total));
    out.insert(out.end(), 1 + extra, o.prefix + std::to_string(r));
    placed += 1 + extra;
  }
  std::uniform_int_distribution<std::size_t> pick(0, o.distinct - 1);
  while (placed < o.length) {
    out.push_back(o.prefix + std::to_string(pick(rng)));
    ++placed;
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

obt::NumericTable gaussian_table(std::mt19937_64& rng, std::size_t rows, double mean,
                                 double stdev, const std::string& prefix) {
  std::normal_distribution<double> dist(mean, stdev);
  obt::NumericTable out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.push_back({prefix + std::to_string(i), dist(rng)});
  return out;
}

}  // namespace pvwm::data
