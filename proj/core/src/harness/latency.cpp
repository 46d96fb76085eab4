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

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "pvwm/client/client.hpp"
#include "pvwm/common/encoding.hpp"
#include "pvwm/common/error.hpp"
#include "pvwm/data/synthetic.hpp"
#include "pvwm/harness/harness.hpp"
#include "pvwm/obt/obt.hpp"
#include "pvwm/prover/service.hpp"
#include "pvwm/tee/attestation.hpp"

namespace pvwm::harness {

namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "pvwm-latency-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw IoError("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

std::string make_asset(const LatencyConfig& c, std::mt19937_64& rng) {
  if (c.scheme == wire::Scheme::kObt) {
    return obt::serialize_table(data::gaussian_table(rng, c.obt_rows, 0.0, 15.0));
  }
  data::ZipfOptions z;
  z.distinct = c.freqywm_distinct;
  z.length = c.freqywm_length;
  return freqywm::serialize_dataset(data::zipf_dataset(rng, z));
}

}  // namespace

LatencyRow run_latency_breakdown(const LatencyConfig& c) {
  if ((c.scheme == wire::Scheme::kFreqyWm2pc) != (c.mode == prover::ServiceMode::kTwoPc)) {
    throw InvalidArgument("scheme freqywm-2pc goes with mode 2pc and only with it");
  }
  TempDir dir;
  const auto manufacturer = crypto::SigningKeypair::generate();
  const std::string key_prefix = (dir.path() / "manufacturer").string();
  tee::write_manufacturer_keys(manufacturer, key_prefix);

  prover::ServiceConfig sc;
  sc.listen = net::Endpoint{"127.0.0.1", 0};
  sc.mode = c.mode;
  sc.cache_capacity = 0;
  sc.manufacturer_key = key_prefix + ".key";
  sc.enclave = c.enclave;
  prover::ProverCore core(sc, prover::make_enclave(sc));
  prover::Server server(core, sc.listen);
  server.start();
  const net::Endpoint ep{"127.0.0.1", server.port()};

  std::mt19937_64 rng(c.seed);
  const std::string asset_path = (dir.path() / "asset.dat").string();
  write_file_atomic(asset_path, as_bytes(make_asset(c, rng)));

  client::OwnerOptions oo;
  oo.asset_path = asset_path;
  oo.scheme = c.scheme;
  oo.mode = c.mode;
  oo.out_dir = (dir.path() / "owner").string();
  oo.prover = ep;
  oo.manufacturer_pub = key_prefix + ".pub";
  oo.seed = c.seed;
  net::TcpDialer dialer;
  const auto gen = client::owner_generate(oo, dialer);
  const Bytes marked = read_file(gen.asset_path);

  client::HolderOptions ho;
  ho.use_cache = false;
  LatencyRow row;
  row.scheme = c.scheme;
  row.mode = c.mode;
  row.all_valid = true;
  for (std::size_t i = 0; i < c.warmup + c.runs; ++i) {
    const auto v = client::holder_verify(gen.bundle, as_chars(marked), as_chars(marked), ep, ho, dialer);
    if (i < c.warmup) continue;
    row.all_valid = row.all_valid && v.valid;
    const std::uint64_t tasks[5] = {v.timings.establish_ns, v.timings.receive_ns,
                                    v.timings.reconstruct_ns, v.timings.detect_ns,
                                    v.timings.terminate_ns};
    for (int t = 0; t < 5; ++t) row.task_mean_ms[t] += static_cast<double>(tasks[t]) / 1e6;
    row.total_mean_ms += static_cast<double>(v.timings.total_ns) / 1e6;
    row.holder_cpu_mean_ms += static_cast<double>(v.timings.holder_cpu_ns) / 1e6;
    ++row.runs;
  }
  server.stop();
  if (row.runs > 0) {
    const double n = static_cast<double>(row.runs);
    for (double& m : row.task_mean_ms) m /= n;
    row.total_mean_ms /= n;
    row.holder_cpu_mean_ms /= n;
  }
  return row;
}

std::string latency_csv(const std::vector<LatencyRow>& rows) {
  std::ostringstream os;
  os << "scheme,mode,task,mean_ms\n";
  char buf[160];
  for (const auto& r : rows) {
    for (int t = 0; t < 5; ++t) {
      std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6f\n", client::scheme_name(r.scheme),
                    prover::mode_name(r.mode), kTaskNames[t], r.task_mean_ms[t]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%s,%s,total,%.6f\n", client::scheme_name(r.scheme),
                  prover::mode_name(r.mode), r.total_mean_ms);
    os << buf;
  }
  return os.str();
}

}  // namespace pvwm::harness
