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

#include "afdm/dictionary.hpp"

#include "afdm/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace afdm {

Dictionary build_dictionary(const CVec& x_pilot, const AfdmConfig& cfg, int l_max,
                            double alpha_max, int g) {
  validate(cfg);
  if (x_pilot.size() != cfg.n)
    throw std::invalid_argument("build_dictionary: pilot length must equal n");
  if (l_max < 0 || l_max >= cfg.n)
    throw std::invalid_argument("build_dictionary: l_max must lie in [0, n)");
  if (!(alpha_max >= 0.0) || !std::isfinite(alpha_max))
    throw std::invalid_argument("build_dictionary: alpha_max must be finite and >= 0");
  if (g < 1) throw std::invalid_argument("build_dictionary: grid density must be >= 1");

  const int a = static_cast<int>(std::ceil(alpha_max));
  const int dops = 2 * g * a + 1;
  const int m = (l_max + 1) * dops;

  Dictionary dict;
  dict.grid_density = g;
  dict.atoms.resize(static_cast<std::size_t>(m));
  dict.atom_matrices.resize(static_cast<std::size_t>(m));
  dict.phi.resize(cfg.n, m);
  dict.overcomplete = m > cfg.n;

  for (int l = 0; l <= l_max; ++l)
    for (int d = -g * a; d <= g * a; ++d) {
      const int j = l * dops + (d + g * a);
      dict.atoms[static_cast<std::size_t>(j)] = {l, static_cast<double>(d) / g};
    }

  // Independent columns: safe to fill in parallel, identical for any
  // thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int j = 0; j < m; ++j) {
    const DictionaryAtom& atom = dict.atoms[static_cast<std::size_t>(j)];
    dict.atom_matrices[static_cast<std::size_t>(j)] =
        path_matrix(cfg, atom.delay, atom.doppler);
    dict.phi.col(j) = dict.atom_matrices[static_cast<std::size_t>(j)] * x_pilot;
  }

  dict.gram = dict.phi.adjoint() * dict.phi;
  return dict;
}

CMat reconstruct_channel(const Dictionary& dict, const CVec& coeffs) {
  const int m = static_cast<int>(dict.atoms.size());
  if (coeffs.size() != m)
    throw std::invalid_argument("reconstruct_channel: expected " + std::to_string(m) +
                                " coefficients, got " + std::to_string(coeffs.size()));
  const int n = static_cast<int>(dict.phi.rows());
  CMat h = CMat::Zero(n, n);
  for (int j = 0; j < m; ++j) {
    if (coeffs(j) == cxd{0.0, 0.0}) continue;
    h += coeffs(j) * dict.atom_matrices[static_cast<std::size_t>(j)];
  }
  return h;
}

}  // namespace afdm
