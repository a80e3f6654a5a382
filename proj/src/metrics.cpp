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

#include "afdm/metrics.hpp"

#include "afdm/constellation.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace afdm {

double nmse_ratio(const CMat& h_est, const CMat& h_true) {
  if (h_est.rows() != h_true.rows() || h_est.cols() != h_true.cols())
    throw std::invalid_argument("nmse: shape mismatch");
  const double denom = h_true.squaredNorm();
  if (denom == 0.0) throw std::domain_error("nmse: zero reference channel");
  return (h_est - h_true).squaredNorm() / denom;
}

double nmse_db(const CMat& h_est, const CMat& h_true) {
  const double r = nmse_ratio(h_est, h_true);
  if (r < 1e-30) return -300.0;
  return 10.0 * std::log10(r);
}

MeanDb nmse_aggregate(const std::vector<double>& ratios) {
  if (ratios.empty()) throw std::invalid_argument("nmse_aggregate: no samples");
  const double n = static_cast<double>(ratios.size());
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= n;

  MeanDb out;
  if (mean <= 1e-30) {
    out.mean_db = -300.0;
    out.stderr_db = 0.0;
    return out;
  }
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  const double se = ratios.size() > 1 ? std::sqrt(var / (n * (n - 1.0))) : 0.0;
  out.mean_db = 10.0 * std::log10(mean);
  out.stderr_db = (10.0 / std::log(10.0)) * se / mean;
  return out;
}

double ber(const std::vector<int>& decided, const std::vector<int>& truth, int q) {
  const int bps = psk_bits_per_symbol(q);
  if (decided.size() != truth.size()) throw std::invalid_argument("ber: length mismatch");
  if (decided.empty()) throw std::invalid_argument("ber: no symbols");
  long long errs = 0;
  for (std::size_t i = 0; i < decided.size(); ++i) {
    if (decided[i] < 0 || decided[i] >= q || truth[i] < 0 || truth[i] >= q)
      throw std::invalid_argument("ber: position out of range");
    const unsigned x = gray_encode(static_cast<unsigned>(decided[i])) ^
                       gray_encode(static_cast<unsigned>(truth[i]));
    errs += std::popcount(x);
  }
  return static_cast<double>(errs) /
         (static_cast<double>(decided.size()) * static_cast<double>(bps));
}

}  // namespace afdm
