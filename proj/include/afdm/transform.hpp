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

namespace afdm {

// Discrete affine Fourier transform pair, factorized as chirp * DFT * chirp.
//
//   idaft: s_n = (1/sqrt(N)) sum_m exp(+j*2*pi*(c1*n^2 + n*m/N + c2*m^2)) x_m
//   daft:  x_m = (1/sqrt(N)) sum_n exp(-j*2*pi*(c1*n^2 + n*m/N + c2*m^2)) s_n
//
// Both run through an FFT for the middle factor; the quadratic chirp phases
// are evaluated in exact integer arithmetic (2*N*c1 is an integer by config
// contract), so daft(idaft(x)) == x to rounding error.
CVec idaft(const CVec& x, const AfdmConfig& cfg);
CVec daft(const CVec& r, const AfdmConfig& cfg);

// Chirp-periodic prefix: prepends cpp_len samples
//   out[i] = s[n + N] * exp(j*2*pi*c1*(N^2 + 2*N*n)),  n = i - cpp_len in [-cpp_len, 0)
// which reduces to a plain cyclic prefix under the config contract (the phase
// factor is exactly 1 for even N with integer 2*N*c1).
CVec add_cpp(const CVec& s, const AfdmConfig& cfg);
CVec remove_cpp(const CVec& s_cpp, const AfdmConfig& cfg);

// Phase of the c1 chirp at index n, in cycles, reduced exactly mod 1.
// Valid for any integer n (prefix indices are negative).
double chirp1_cycles(const AfdmConfig& cfg, long long n);

// Dense unitary forward-transform matrix A with x = A * s; A(m,n) =
// (1/sqrt(N)) exp(-j*2*pi*(c1*n^2 + n*m/N + c2*m^2)).  Used by the exact
// per-path channel construction and by tests.
CMat daft_matrix(const AfdmConfig& cfg);

namespace reference {

// O(N^2) double-sum evaluation of the same pair.  Serial, allocation-heavy,
// kept as the independent oracle for the FFT path and for benchmarks.
CVec idaft_direct(const CVec& x, const AfdmConfig& cfg);
CVec daft_direct(const CVec& r, const AfdmConfig& cfg);

}  // namespace reference

}  // namespace afdm
