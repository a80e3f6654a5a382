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

#include <cmath>
#include <stdexcept>
#include <string>

namespace afdm {

// Chirp parameters of one AFDM frame.
//
// The transform is IDAFT(x) = Lc1^H * F^H * Lc2^H * x with
// Lc = diag(exp(-j*2*pi*c*n^2)).  Validity requires:
//   * n even, so the quadratic chirp phase is n-periodic in the index,
//   * 2*n*c1 an integer, so the chirp-periodic prefix degenerates to a
//     plain cyclic prefix and the per-path phase correction is identity.
// Both are enforced here once; downstream code relies on them.
struct AfdmConfig {
  int n = 0;         // subcarriers per frame
  double c1 = 0.0;   // first chirp rate (Doppler axis)
  double c2 = 0.0;   // second chirp rate
  int cpp_len = 0;   // prefix length in samples

  // 2*n*c1 as the exact integer it was validated to be.
  int two_n_c1() const { return static_cast<int>(std::llround(2.0 * n * c1)); }
};

inline void validate(const AfdmConfig& cfg) {
  if (cfg.n <= 0 || cfg.n % 2 != 0)
    throw std::invalid_argument("AfdmConfig: n must be a positive even integer, got " +
                                std::to_string(cfg.n));
  if (!std::isfinite(cfg.c1) || !std::isfinite(cfg.c2))
    throw std::invalid_argument("AfdmConfig: chirp rates must be finite");
  const double tnc1 = 2.0 * cfg.n * cfg.c1;
  if (std::abs(tnc1 - std::nearbyint(tnc1)) > 1e-9)
    throw std::invalid_argument("AfdmConfig: 2*n*c1 must be an integer, got " +
                                std::to_string(tnc1));
  if (cfg.cpp_len < 0 || cfg.cpp_len >= cfg.n)
    throw std::invalid_argument("AfdmConfig: cpp_len must lie in [0, n), got " +
                                std::to_string(cfg.cpp_len));
}

inline AfdmConfig make_config(int n, double c1, double c2, int cpp_len) {
  AfdmConfig cfg{n, c1, c2, cpp_len};
  validate(cfg);
  return cfg;
}

// Doppler-aware default: c1 = (2*ceil(alpha_max)+1)/(2n) separates delay-Doppler
// paths along the transform-domain diagonal; c2 = 0; prefix sized to the
// maximum delay.
inline AfdmConfig default_config(int n, int alpha_max_ceil, int l_max) {
  if (alpha_max_ceil < 0) throw std::invalid_argument("default_config: alpha_max_ceil < 0");
  if (l_max < 0) throw std::invalid_argument("default_config: l_max < 0");
  return make_config(n, (2.0 * alpha_max_ceil + 1.0) / (2.0 * n), 0.0, l_max);
}

}  // namespace afdm
