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

#include "afdm/special.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("digamma: argument must be finite and > 0");

  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }

  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // ln x - 1/(2x) - sum B_2n / (2n x^2n), n = 1..6
  double series = -1.0 / 12.0;
  double p = inv2;
  double sum = series * p;
  p *= inv2;
  sum += (1.0 / 120.0) * p;
  p *= inv2;
  sum += (-1.0 / 252.0) * p;
  p *= inv2;
  sum += (1.0 / 240.0) * p;
  p *= inv2;
  sum += (-1.0 / 132.0) * p;
  p *= inv2;
  sum += (691.0 / 32760.0) * p;

  return acc + std::log(x) - 0.5 * inv + sum;
}

}  // namespace afdm
