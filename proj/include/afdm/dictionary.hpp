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

#include <vector>

namespace afdm {

struct DictionaryAtom {
  int delay = 0;
  double doppler = 0.0;  // Doppler bins; grid point d/g
};

// Delay-Doppler dictionary for a fixed pilot: column j is the received
// transform-domain response of a unit-gain path at atom j.  Atoms are
// ordered delay-major, Doppler ascending from -ceil(alpha_max) to
// +ceil(alpha_max) in steps of 1/g, so m = (l_max+1) * (2*g*ceil(alpha_max)+1).
struct Dictionary {
  CMat phi;                         // n x m sensing matrix
  CMat gram;                        // phi^H * phi, cached for the estimators
  std::vector<DictionaryAtom> atoms;
  std::vector<CMat> atom_matrices;  // unit-gain path matrices per atom
  int grid_density = 1;             // g
  bool overcomplete = false;        // m > n
};

Dictionary build_dictionary(const CVec& x_pilot, const AfdmConfig& cfg, int l_max,
                            double alpha_max, int g);

// H_hat = sum_j coeffs_j * atom_matrix_j.  Exact zeros are skipped, so a
// partially combined coefficient vector costs only its support.
CMat reconstruct_channel(const Dictionary& dict, const CVec& coeffs);

}  // namespace afdm
