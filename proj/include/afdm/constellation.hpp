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

#include <cstdint>
#include <vector>

namespace afdm {

// Q-ary PSK with points offset half a sector from the real axis:
// position k in [0, Q) sits at angle pi*(2k+1)/Q.  No point lies on a
// decision boundary; the boundaries are the multiples of 2*pi/Q.
// Labels are Gray-coded so adjacent positions differ in one bit.

int psk_bits_per_symbol(int q);     // log2(q); rejects q not a power of two >= 2
CVec psk_constellation(int q);      // the Q unit-modulus points, by position
cxd psk_point(int position, int q);

inline unsigned gray_encode(unsigned k) { return k ^ (k >> 1); }
unsigned gray_decode(unsigned g);

// MSB-first bit groups; each group is the Gray label of the transmitted
// position.  bits.size() must be a multiple of log2(q).
CVec psk_modulate(const std::vector<std::uint8_t>& bits, int q);

// Hard decision to the nearest constellation position.  Implemented on the
// angle so the tie rule is exact: a sample on a decision boundary goes to
// the smaller of the two adjacent positions (position 0 for the boundary at
// angle zero).  y == 0 also decides position 0.
std::vector<int> psk_demodulate(const CVec& y, int q);

std::vector<std::uint8_t> psk_bits_from_positions(const std::vector<int>& pos, int q);

}  // namespace afdm
