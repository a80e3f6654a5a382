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

#include <vector>

namespace afdm {

// Frobenius-norm error ratio ||h_est - h_true||^2 / ||h_true||^2.
// Throws std::domain_error for a zero reference.
double nmse_ratio(const CMat& h_est, const CMat& h_true);

// 10*log10 of the ratio, floored at -300 dB for (near-)exact reconstruction.
double nmse_db(const CMat& h_est, const CMat& h_true);

// Sweep-point aggregate: dB of the mean ratio (the expectation sits inside
// the log), with a delta-method standard error in dB.
struct MeanDb {
  double mean_db = 0.0;
  double stderr_db = 0.0;
};
MeanDb nmse_aggregate(const std::vector<double>& ratios);

// Bit error rate between decided and transmitted PSK positions under the
// Gray labeling.
double ber(const std::vector<int>& decided, const std::vector<int>& truth, int q);

}  // namespace afdm
