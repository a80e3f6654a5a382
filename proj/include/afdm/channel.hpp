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

#include "afdm/common.hpp"
#include "afdm/config.hpp"

#include <random>
#include <vector>

namespace afdm {

// One propagation path.  doppler is normalized to Doppler bins (digital
// frequency doppler/N cycles per sample); delay is in samples.
struct PathTap {
  cxd gain{0.0, 0.0};
  int delay = 0;
  double doppler = 0.0;
};

struct ChannelRealization {
  AfdmConfig cfg;
  std::vector<PathTap> taps;
};

// Doppler values closer than this to an integer are treated as integer;
// the closed forms coincide at that point, so the switch is seamless.
inline constexpr double kIntegerDopplerTol = 1e-12;

inline bool is_integer_doppler(double doppler_bins) {
  return std::abs(doppler_bins - std::nearbyint(doppler_bins)) < kIntegerDopplerTol;
}

// Unit-gain single-path response in the transform domain, three ways.
//
// exact:      A * Gamma * diag(exp(-j*2*pi*(v/N)*n)) * CyclicShift(l) * A^H
//             built from dense factors; the independent reference.
// integer:    one unit-modulus entry per row at column (p + loc) mod N,
//             loc = v + 2*N*c1*l.
// fractional: dense Dirichlet-kernel spread around the same diagonal.
// The integer and fractional forms agree wherever both apply.
CMat path_matrix_exact(const AfdmConfig& cfg, int delay, double doppler_bins);
CMat path_matrix_integer(const AfdmConfig& cfg, int delay, long long doppler_int);
CMat path_matrix_fractional(const AfdmConfig& cfg, int delay, double doppler_bins);

// Dispatches to the integer form when the Doppler is integral, else the
// fractional form.
CMat path_matrix(const AfdmConfig& cfg, int delay, double doppler_bins);

// Sum of gain-weighted path matrices: y = H x maps transmitted transform-
// domain symbols to the noiseless received ones.
CMat effective_channel(const ChannelRealization& ch);

// Band-limited approximation: per path, keep only the entries within cyclic
// distance k_v of the path's shifted diagonal (the receiver-side model for
// reduced-complexity processing).  k_v >= N/2 keeps everything.
CMat truncated_channel(const ChannelRealization& ch, int k_v);

// Time-domain propagation of a prefixed frame:
//   r_i = sum_p gain_p * s[i - delay_p] * exp(-j*2*pi*(doppler_p/N)*(i - cpp_len)) + w_i
// with w ~ CN(0, noise_var) i.i.d. (real part drawn before imaginary, samples
// in ascending order).  Samples before the frame start are zero.  Throws
// std::domain_error when a path delay exceeds the prefix length.
CVec apply_channel_time(const CVec& s_cpp, const ChannelRealization& ch, double noise_var,
                        std::mt19937_64& rng);

// Draws p paths: gain ~ CN(0, 1/p), delay ~ U{0..l_max}, doppler ~
// U[-alpha_max, alpha_max] (rounded to nearest integer, ties toward zero,
// when fractional == false).  Draw order per tap is gain, delay, doppler.
// With distinct == true, (delay, doppler) pairs are redrawn until unique.
ChannelRealization sample_channel(std::mt19937_64& rng, const AfdmConfig& cfg, int p, int l_max,
                                  double alpha_max, bool fractional, bool distinct = false);

// Maximum normalized Doppler (in bins) for a carrier at fc_hz, subcarrier
// spacing delta_f_hz and speed v_kmh, with the nominal c = 3e8 m/s.
double alpha_max_normalized(double v_kmh, double fc_hz, double delta_f_hz);

}  // namespace afdm
