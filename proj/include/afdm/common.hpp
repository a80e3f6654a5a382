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

#include <Eigen/Dense>
#include <complex>
#include <cmath>

namespace afdm {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.1415926535897932384626433832795;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// exp(j*2*pi*cycles), with the argument reduced to [-0.5, 0.5) cycles first
// so large quadratic chirp phases keep full precision.
inline cxd cis_cycles(double cycles) {
  const double r = cycles - std::nearbyint(cycles);
  return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

}  // namespace afdm
