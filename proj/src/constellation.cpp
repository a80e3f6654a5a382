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

#include "afdm/constellation.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afdm {

int psk_bits_per_symbol(int q) {
  if (q < 2 || (q & (q - 1)) != 0)
    throw std::invalid_argument("psk: order must be a power of two >= 2, got " +
                                std::to_string(q));
  return std::countr_zero(static_cast<unsigned>(q));
}

cxd psk_point(int position, int q) {
  psk_bits_per_symbol(q);
  if (position < 0 || position >= q)
    throw std::invalid_argument("psk_point: position out of range");
  return cis_cycles((2.0 * position + 1.0) / (2.0 * q));
}

CVec psk_constellation(int q) {
  psk_bits_per_symbol(q);
  CVec c(q);
  for (int k = 0; k < q; ++k) c(k) = psk_point(k, q);
  return c;
}

unsigned gray_decode(unsigned g) {
  unsigned k = g;
  while (g >>= 1) k ^= g;
  return k;
}

CVec psk_modulate(const std::vector<std::uint8_t>& bits, int q) {
  const int bps = psk_bits_per_symbol(q);
  if (bits.size() % static_cast<std::size_t>(bps) != 0)
    throw std::invalid_argument("psk_modulate: bit count not a multiple of log2(q)");
  const std::size_t n = bits.size() / static_cast<std::size_t>(bps);
  CVec s(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    unsigned label = 0;
    for (int b = 0; b < bps; ++b) {
      const std::uint8_t bit = bits[i * bps + b];
      if (bit > 1) throw std::invalid_argument("psk_modulate: bits must be 0/1");
      label = (label << 1) | bit;
    }
    s(static_cast<Eigen::Index>(i)) = psk_point(static_cast<int>(gray_decode(label)), q);
  }
  return s;
}

std::vector<int> psk_demodulate(const CVec& y, int q) {
  psk_bits_per_symbol(q);
  std::vector<int> pos(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // Angle in cycles in [0, 1).  atan2(+-0, x) conventions make the
    // boundary at angle zero land on u == 0 exactly.
    double u = std::atan2(y(i).imag(), y(i).real()) / kTwoPi;
    if (u < 0.0) u += 1.0;
    if (u >= 1.0) u = 0.0;
    const double g = u * q;
    const double gf = std::floor(g);
    int k;
    if (g == gf) {
      // Exactly on a sector boundary: smaller adjacent position wins
      // (wrapping at angle zero, where position 0 is the smaller).
      k = (gf == 0.0) ? 0 : static_cast<int>(gf) - 1;
    } else {
      k = static_cast<int>(gf);
    }
    if (k >= q) k = q - 1;
    pos[static_cast<std::size_t>(i)] = k;
  }
  return pos;
}

std::vector<std::uint8_t> psk_bits_from_positions(const std::vector<int>& pos, int q) {
  const int bps = psk_bits_per_symbol(q);
  std::vector<std::uint8_t> bits;
  bits.reserve(pos.size() * static_cast<std::size_t>(bps));
  for (int k : pos) {
    if (k < 0 || k >= q) throw std::invalid_argument("psk_bits_from_positions: bad position");
    const unsigned label = gray_encode(static_cast<unsigned>(k));
    for (int b = bps - 1; b >= 0; --b)
      bits.push_back(static_cast<std::uint8_t>((label >> b) & 1u));
  }
  return bits;
}

}  // namespace afdm
