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

#pragma once

#include "afdm/channel.hpp"
#include "afdm/config.hpp"
#include "afdm/metrics.hpp"
#include "afdm/sbl.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace afdm {

// Full description of a Monte Carlo experiment.  SNR is defined against unit
// average transmit power per time-domain sample: noise variance per complex
// sample is 10^(-snr_db/10).
struct ExperimentConfig {
  // waveform
  int n = 64;
  double c2 = 0.0;
  int q = 4;            // PSK order
  int frame_len = 8;    // transform-domain symbol vectors per frame, pilot first
  int pilot_root = 1;
  // channel
  int paths = 3;
  int l_max = 2;
  double v_max_kmh = 625.0;
  double fc_hz = 4.0e9;
  double delta_f_hz = 15.0e3;
  bool fractional = true;
  bool distinct = false;
  // estimator
  int grid_density = 1;  // Doppler grid points per bin
  double eta = 0.0;      // partial combination factor; 0 = keep all
  double sbl_a = 1e-4;
  double sbl_b = 1e-4;
  double sbl_nu0 = 1.0;
  double sbl_epsilon = 1e-6;
  int sbl_n_max = 200;
  // precoder
  double power = -1.0;   // transmit power budget; < 0 means n
  double qp_tol = 1e-8;
  int k_v = -1;          // truncation half-width for truncated CSI; < 0 means n/2
  // sweep
  std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
  int trials = 100;            // uplink channel draws per SNR point
  int downlink_frames = 200;   // precoded frames per SNR point (n symbols each)
  std::uint64_t seed = 1;
  int parallelism = 0;         // OpenMP threads; 0 = runtime default

  double alpha_max() const { return alpha_max_normalized(v_max_kmh, fc_hz, delta_f_hz); }
  int alpha_max_ceil() const { return static_cast<int>(std::ceil(alpha_max())); }
  double effective_power() const { return power < 0.0 ? static_cast<double>(n) : power; }
  int effective_k_v() const { return k_v < 0 ? n / 2 : k_v; }
  AfdmConfig afdm() const {
    return make_config(n, (2.0 * alpha_max_ceil() + 1.0) / (2.0 * n), c2, l_max);
  }
  SblHyperConfig sbl_hyper() const;
  void check() const;  // throws std::invalid_argument on inconsistent settings
};

// One aggregated uplink sweep cell.  Estimators: "sbl", "omp", "mmse" (genie
// prior), "bound" (the Bayesian lower bound, normalized by the received
// pilot power).  BER is reported for "sbl", "omp" and "perfect" CSI.
struct UplinkPoint {
  double snr_db = 0.0;
  std::string estimator;
  MeanDb nmse;
  double ber = -1.0;        // < 0: not applicable
  long long bits = 0;
  int trials_used = 0;
  int trials_excluded = 0;
};

struct UplinkResult {
  std::vector<UplinkPoint> points;
  std::vector<SblTraceRow> sample_trace;  // first trial of the first SNR point
};

UplinkResult run_uplink_sweep(const ExperimentConfig& cfg);

enum class CsiMode { kPerfect, kEstimated, kTruncated };
std::string csi_mode_name(CsiMode mode);

struct DownlinkPoint {
  double snr_db = 0.0;
  std::string precoder;  // "slp" or "mmse"
  std::string csi;
  double ber = 0.0;
  long long symbols = 0;
  long long excluded_frames = 0;
};

struct ConstellationSample {
  double snr_db = 0.0;
  std::string precoder;
  double re = 0.0, im = 0.0;
  int target = 0;  // transmitted constellation position
};

struct DownlinkResult {
  std::vector<DownlinkPoint> points;
  std::vector<ConstellationSample> constellation;
};

// Precode, propagate through the true channel, hard-demodulate.  The CSI
// handed to both precoders is exact, re-estimated per frame, or truncated,
// per mode.  Infeasible precodes exclude the frame (counted).
DownlinkResult run_downlink_sweep(const ExperimentConfig& cfg, CsiMode mode);

}  // namespace afdm
