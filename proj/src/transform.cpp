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

#include "afdm/transform.hpp"

#include <unsupported/Eigen/FFT>

#include <stdexcept>
#include <string>

namespace afdm {

namespace {

void check_len(const CVec& v, int want, const char* op) {
  if (v.size() != want)
    throw std::invalid_argument(std::string(op) + ": expected length " +
                                std::to_string(want) + ", got " + std::to_string(v.size()));
}

// c2*m^2 in cycles.  c2 is an arbitrary real, so this is plain floating
// point; cis_cycles reduces the argument before the trig call.
inline double chirp2_cycles(const AfdmConfig& cfg, long long m) {
  return cfg.c2 * static_cast<double>(m) * static_cast<double>(m);
}

}  // namespace

double chirp1_cycles(const AfdmConfig& cfg, long long n) {
  // c1*n^2 = (2*N*c1) * n^2 / (2*N) with integer numerator: reduce mod 2N
  // exactly so the phase carries no accumulation error.
  const long long period = 2LL * cfg.n;
  long long m = n % period;
  if (m < 0) m += period;
  const long long num = (static_cast<long long>(cfg.two_n_c1()) * ((m * m) % period)) % period;
  return static_cast<double>(num) / static_cast<double>(period);
}

CVec idaft(const CVec& x, const AfdmConfig& cfg) {
  check_len(x, cfg.n, "idaft");
  const int n = cfg.n;
  const double root_n = std::sqrt(static_cast<double>(n));

  CVec v(n);
  for (int m = 0; m < n; ++m) v(m) = x(m) * cis_cycles(chirp2_cycles(cfg, m));

  // Unitary F^H = sqrt(N) * (scaled inverse FFT).
  Eigen::FFT<double> fft;
  CVec u(n);
  fft.inv(u, v);
  u *= root_n;

  CVec s(n);
  for (int k = 0; k < n; ++k) s(k) = u(k) * cis_cycles(chirp1_cycles(cfg, k));
  return s;
}

CVec daft(const CVec& r, const AfdmConfig& cfg) {
  check_len(r, cfg.n, "daft");
  const int n = cfg.n;
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));

  CVec u(n);
  for (int k = 0; k < n; ++k) u(k) = r(k) * cis_cycles(-chirp1_cycles(cfg, k));

  Eigen::FFT<double> fft;
  CVec v(n);
  fft.fwd(v, u);
  v *= inv_root_n;

  CVec x(n);
  for (int m = 0; m < n; ++m) x(m) = v(m) * cis_cycles(-chirp2_cycles(cfg, m));
  return x;
}

CVec add_cpp(const CVec& s, const AfdmConfig& cfg) {
  check_len(s, cfg.n, "add_cpp");
  const int n = cfg.n;
  const int l = cfg.cpp_len;
  CVec out(n + l);
  for (int i = 0; i < l; ++i) {
    const long long t = static_cast<long long>(i) - l;  // t in [-cpp_len, 0)
    // Prefix phase exp(j*2*pi*c1*(N^2 + 2*N*t)): an exact integer number of
    // cycles under the config contract, hence exactly 1; evaluated anyway to
    // keep the formula visible.
    const double cycles =
        cfg.two_n_c1() * (static_cast<double>(n) / 2.0 + static_cast<double>(t));
    out(i) = s(n + t) * cis_cycles(cycles);
  }
  out.tail(n) = s;
  return out;
}

CVec remove_cpp(const CVec& s_cpp, const AfdmConfig& cfg) {
  check_len(s_cpp, cfg.n + cfg.cpp_len, "remove_cpp");
  return s_cpp.tail(cfg.n);
}

CMat daft_matrix(const AfdmConfig& cfg) {
  const int n = cfg.n;
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
  CMat a(n, n);
  for (int m = 0; m < n; ++m) {
    const double c2_cyc = chirp2_cycles(cfg, m);
    for (int k = 0; k < n; ++k) {
      const double cyc = chirp1_cycles(cfg, k) +
                         static_cast<double>(k) * static_cast<double>(m) / n + c2_cyc;
      a(m, k) = inv_root_n * cis_cycles(-cyc);
    }
  }
  return a;
}

namespace reference {

CVec idaft_direct(const CVec& x, const AfdmConfig& cfg) {
  check_len(x, cfg.n, "idaft_direct");
  const int n = cfg.n;
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
  CVec s = CVec::Zero(n);
  for (int k = 0; k < n; ++k) {
    cxd acc{0.0, 0.0};
    for (int m = 0; m < n; ++m) {
      const double cyc = chirp1_cycles(cfg, k) +
                         static_cast<double>(k) * static_cast<double>(m) / n +
                         chirp2_cycles(cfg, m);
      acc += cis_cycles(cyc) * x(m);
    }
    s(k) = inv_root_n * acc;
  }
  return s;
}

CVec daft_direct(const CVec& r, const AfdmConfig& cfg) {
  check_len(r, cfg.n, "daft_direct");
  const int n = cfg.n;
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
  CVec x = CVec::Zero(n);
  for (int m = 0; m < n; ++m) {
    cxd acc{0.0, 0.0};
    for (int k = 0; k < n; ++k) {
      const double cyc = chirp1_cycles(cfg, k) +
                         static_cast<double>(k) * static_cast<double>(m) / n +
                         chirp2_cycles(cfg, m);
      acc += cis_cycles(-cyc) * r(k);
    }
    x(m) = inv_root_n * acc;
  }
  return x;
}

}  // namespace reference

}  // namespace afdm
