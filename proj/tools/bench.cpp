// SPDX-License-Identifier: Apache-2.0
//
// afdm-slp: AFDM link-level simulator with sparse Bayesian channel
// estimation and symbol-level precoding.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Micro benchmarks comparing the fast paths against their reference
// implementations, plus a threaded-vs-serial sweep that doubles as a
// determinism check: both runs must serialize to identical CSV.

#include "afdm/channel.hpp"
#include "afdm/experiment.hpp"
#include "afdm/io.hpp"
#include "afdm/rng.hpp"
#include "afdm/transform.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

namespace {

using namespace afdm;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Keeps the optimizer from discarding benchmark results.
volatile double g_sink = 0.0;

void bench_transform(int reps) {
  const AfdmConfig cfg = make_config(64, 3.0 / 128.0, 0.0, 2);
  std::mt19937_64 rng = trial_rng(1, RngStream::kBench, 0);
  CVec x(cfg.n);
  for (int i = 0; i < cfg.n; ++i) x(i) = complex_normal(rng, 1.0);

  auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) g_sink = g_sink + reference::idaft_direct(x, cfg)(0).real();
  const double direct = seconds_since(t0);

  t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) g_sink = g_sink + idaft(x, cfg)(0).real();
  const double fast = seconds_since(t0);

  std::printf("transform n=%d         direct %8.2f us/op   fft %8.2f us/op   speedup %.1fx\n",
              cfg.n, 1e6 * direct / reps, 1e6 * fast / reps, direct / fast);
}

void bench_channel(int reps) {
  const AfdmConfig cfg = make_config(64, 3.0 / 128.0, 0.0, 2);
  std::mt19937_64 rng = trial_rng(1, RngStream::kBench, 1);
  std::uniform_real_distribution<double> dop(-1.0, 1.0);

  auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r)
    g_sink = g_sink + path_matrix_exact(cfg, r % 3, dop(rng))(0, 0).real();
  const double exact = seconds_since(t0);

  rng = trial_rng(1, RngStream::kBench, 1);
  t0 = clock_type::now();
  for (int r = 0; r < reps; ++r)
    g_sink = g_sink + path_matrix_fractional(cfg, r % 3, dop(rng))(0, 0).real();
  const double closed = seconds_since(t0);

  std::printf("path matrix n=%d       product %7.2f us/op   closed %6.2f us/op   speedup %.1fx\n",
              cfg.n, 1e6 * exact / reps, 1e6 * closed / reps, exact / closed);
}

int bench_sweep() {
  ExperimentConfig cfg;
  cfg.n = 32;
  cfg.paths = 3;
  cfg.l_max = 2;
  cfg.frame_len = 2;
  cfg.trials = 12;
  cfg.snr_db = {10.0, 20.0};
  cfg.seed = 3;

  cfg.parallelism = 1;
  auto t0 = clock_type::now();
  const UplinkResult serial = run_uplink_sweep(cfg);
  const double t_serial = seconds_since(t0);

  cfg.parallelism = 0;  // runtime thread count
  t0 = clock_type::now();
  const UplinkResult threaded = run_uplink_sweep(cfg);
  const double t_threaded = seconds_since(t0);

  const bool same = csv_string(uplink_nmse_table(serial)) ==
                        csv_string(uplink_nmse_table(threaded)) &&
                    csv_string(uplink_ber_table(serial)) ==
                        csv_string(uplink_ber_table(threaded));
  std::printf("uplink sweep           serial %7.2f ms      threaded %7.2f ms   identical %s\n",
              1e3 * t_serial, 1e3 * t_threaded, same ? "yes" : "NO");
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 400;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) reps = 50;

  bench_transform(reps);
  bench_channel(reps);
  const int rc = bench_sweep();
  if (g_sink == 12345.6789) std::printf("\n");  // defeat dead-code elimination
  return rc;
}
