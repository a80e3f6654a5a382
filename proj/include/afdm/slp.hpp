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

namespace afdm {

// Constructive-interference symbol-level precoder for PSK.  Per receive
// index n the noiseless observation z_n = (H x)_n * conj(s_n), rotated into
// the target symbol's frame, must stay inside the correct decision sector
// with margin t:
//   Re(z_n) sin(phi) - |Im(z_n)| cos(phi) >= t,   phi = pi/Q.
// Maximizing t under ||x||^2 = P is equivalent (by strong duality) to the
// simplex-constrained quadratic program
//   min_delta ||T^T delta||^2,  delta >= 0, sum(delta) = 1,
// whose solution yields w = sqrt(P) T^T delta / ||T^T delta|| and
// t = sqrt(P) ||T^T delta||.

struct PrecodeProblem {
  RMat t;          // 2n x 2n stacked real constraint matrix
  CMat h;          // channel the problem was built from
  CVec s;          // unit-modulus target symbols
  int q = 4;       // PSK order
  double phi_angle = 0.0;  // pi/q
  double power = 0.0;      // transmit power budget P
};

struct DualQpOptions {
  double tol = 1e-8;        // stop when L*||delta - proj(delta - grad/L)|| <= tol
  long long max_iter = 0;   // 0: defaults to 10*(2n)^2
};

struct DualQpResult {
  RVec delta;
  double objective = 0.0;      // ||T^T delta||^2 at exit
  long long iterations = 0;
  bool converged = false;
  double pg_residual = 0.0;
};

struct PrecodeSolution {
  CVec x;             // precoded transform-domain frame, ||x||^2 = P
  RVec w;             // stacked real waveform [Re x; Im x]
  RVec delta;         // dual simplex point
  double margin = 0.0;         // achieved worst-case margin t
  double objective = 0.0;      // dual objective at exit
  double slack_residual = 0.0; // max_k |delta_k ((T w)_k - t)|
  long long iterations = 0;
  bool converged = false;
};

// Euclidean projection onto the probability simplex (sort-based, exact).
RVec simplex_project(const RVec& v);

// Margin of one receive index for a candidate x.
double ci_margin(const CVec& h_row, const CVec& x, cxd s_n, double phi_angle);

PrecodeProblem build_precode_problem(const CMat& h, const CVec& s, int q, double power);

// Accelerated projected-gradient solve of the dual simplex QP with fixed
// step 1/L (L from power iteration on T T^T) and adaptive restart.
DualQpResult solve_dual_qp(const RMat& t, const DualQpOptions& opts = {});

// Maps a dual point back to the transmit waveform.  Throws
// std::runtime_error when ||T^T delta|| == 0 (no positive margin exists).
PrecodeSolution recover_waveform(const PrecodeProblem& prob, const DualQpResult& dual);

PrecodeSolution slp_precode(const CMat& h, const CVec& s, int q, double power,
                            const DualQpOptions& opts = {});

// Regularized zero-forcing baseline: v = (H^H H + (n*noise_var/power) I)^-1 H^H s,
// x = gamma v with gamma = sqrt(power)/||v||.
struct MmsePrecodeResult {
  CVec x;
  double gamma = 0.0;
};
MmsePrecodeResult mmse_precode(const CMat& h, const CVec& s, double power, double noise_var);

}  // namespace afdm
