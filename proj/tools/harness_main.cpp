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

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "cli_util.hpp"
#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/data/synthetic.hpp"
#include "pvwm/harness/harness.hpp"
#include "pvwm/obt/obt.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoul(item));
  }
  if (out.empty()) throw pvwm::InvalidArgument("empty capacity list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pvwm;
  CLI::App app{"Experiment harness"};
  app.require_subcommand(1);

  harness::CacheExperimentConfig cc;
  std::string capacities = "10,20,50,100,250";
  std::string out_dir = "results";
  std::string rule = "literal";
  auto* cache_cmd = app.add_subcommand("cache", "Cache hit-ratio study");
  cache_cmd->add_option("--capacities", capacities, "Comma-separated capacities");
  cache_cmd->add_option("--pairs", cc.pairs, "Distinct (h, id) pairs");
  cache_cmd->add_option("--requests", cc.requests, "Requests per trial");
  cache_cmd->add_option("--trials", cc.trials, "Trials per cell");
  cache_cmd->add_option("--seed", cc.seed, "Workload seed");
  cache_cmd->add_option("--threshold", cc.t_cache, "Similarity threshold for caching");
  cache_cmd->add_flag("--admit-on-miss", cc.admit_on_miss, "Insert missed requests");
  cache_cmd->add_option("--rule", rule, "literal or intuitive serving rule");
  cache_cmd->add_option("--out", out_dir, "Output directory");

  harness::LatencyConfig lc;
  std::string scheme = "freqywm";
  std::string mode = "tee";
  std::string enclave = "process";
  auto* lat_cmd = app.add_subcommand("latency", "Five-task verification latency breakdown");
  lat_cmd->add_option("--scheme", scheme, "freqywm, obt or freqywm-2pc")
      ->check(CLI::IsMember({"freqywm", "obt", "freqywm-2pc"}));
  lat_cmd->add_option("--mode", mode, "tee, tee-direct, plain or 2pc")
      ->check(CLI::IsMember({"tee", "tee-direct", "plain", "2pc"}));
  lat_cmd->add_option("--runs", lc.runs, "Measured runs");
  lat_cmd->add_option("--seed", lc.seed, "Asset seed");
  lat_cmd->add_option("--enclave", enclave, "process or inline");
  lat_cmd->add_option("--distinct", lc.freqywm_distinct, "FreqyWM distinct tokens");
  lat_cmd->add_option("--length", lc.freqywm_length, "FreqyWM dataset length");
  lat_cmd->add_option("--rows", lc.obt_rows, "OBT table rows");
  lat_cmd->add_option("--out", out_dir, "Output directory");

  std::string kind = "zipf";
  std::string synth_out;
  std::uint64_t synth_seed = 1;
  data::ZipfOptions zipf;
  std::size_t rows = 1000;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic asset");
  synth_cmd->add_option("--kind", kind, "zipf (tokens) or gaussian (numeric table)");
  synth_cmd->add_option("--out", synth_out, "Output file")->required();
  synth_cmd->add_option("--seed", synth_seed, "Seed");
  synth_cmd->add_option("--distinct", zipf.distinct, "Distinct tokens");
  synth_cmd->add_option("--length", zipf.length, "Tokens");
  synth_cmd->add_option("--rows", rows, "Table rows");

  if (const int rc = tools::parse_or_exit(app, argc, argv); rc >= 0) return rc;

  try {
    if (*cache_cmd) {
      cc.capacities = parse_list(capacities);
      if (rule == "intuitive") {
        cc.rule = cache::ServeRule::intuitive;
      } else if (rule != "literal") {
        throw InvalidArgument("rule must be literal or intuitive");
      }
      const auto res = harness::run_cache_experiment(cc);
      fs::create_directories(out_dir);
      const auto path = (fs::path(out_dir) / "cache_hit_ratio.csv").string();
      write_file_atomic(path, as_bytes(res.to_csv()));
      std::cout << res.to_csv();
      std::printf("mean LRU-Base %.4f  LRU-Base-R %.4f  LRU-Prop %.4f\n",
                  res.mean_hr(harness::Policy::kLruBase), res.mean_hr(harness::Policy::kLruBaseR),
                  res.mean_hr(harness::Policy::kLruProp));
      std::cout << "wrote " << path << "\n";
      return 0;
    }
    if (*lat_cmd) {
      lc.scheme = client::parse_scheme(scheme);
      lc.mode = prover::parse_mode(mode);
      if (enclave == "inline") {
        lc.enclave = prover::EnclaveKind::kInline;
      } else if (enclave != "process") {
        throw InvalidArgument("enclave must be process or inline");
      }
      const auto row = harness::run_latency_breakdown(lc);
      const std::string csv = harness::latency_csv({row});
      fs::create_directories(out_dir);
      const auto path =
          (fs::path(out_dir) / ("latency_" + scheme + "_" + mode + ".csv")).string();
      write_file_atomic(path, as_bytes(csv));
      std::cout << csv;
      std::printf("runs %zu  all valid %s  holder cpu %.3f ms\n", row.runs,
                  row.all_valid ? "yes" : "no", row.holder_cpu_mean_ms);
      std::cout << "wrote " << path << "\n";
      return row.all_valid ? 0 : 1;
    }
    if (*synth_cmd) {
      std::mt19937_64 rng(synth_seed);
      std::string text;
      if (kind == "zipf") {
        text = freqywm::serialize_dataset(data::zipf_dataset(rng, zipf));
      } else if (kind == "gaussian") {
        text = obt::serialize_table(data::gaussian_table(rng, rows, 100.0, 15.0));
      } else {
        throw InvalidArgument("kind must be zipf or gaussian");
      }
      write_file_atomic(synth_out, as_bytes(text));
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tools::kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return tools::kUsageExit;
}
