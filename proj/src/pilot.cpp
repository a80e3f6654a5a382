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

#include "afdm/pilot.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace afdm {

CVec zc_pilot(int n, int root) {
  if (n <= 0 || n % 2 != 0)
    throw std::invalid_argument("zc_pilot: length must be a positive even integer, got " +
                                std::to_string(n));
  if (root < 1 || root >= n || std::gcd(root, n) != 1)
    throw std::invalid_argument("zc_pilot: root must satisfy 1 <= root < n and gcd(root, n) == 1");
  CVec p(n);
  const long long period = 2LL * n;
  for (int k = 0; k < n; ++k) {
    // -root*k^2/(2n) cycles, reduced exactly mod 1 in integer arithmetic.
    const long long num = (static_cast<long long>(root) * ((1LL * k * k) % period)) % period;
    p(k) = cis_cycles(-static_cast<double>(num) / static_cast<double>(period));
  }
  return p;
}

}  // namespace afdm
