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

#include "afdm/channel.hpp"

#include "afdm/rng.hpp"
#include "afdm/transform.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace afdm {

namespace {

void check_delay(const AfdmConfig& cfg, int delay) {
  if (delay < 0 || delay >= cfg.n)
    throw std::invalid_argument("channel: delay must lie in [0, n), got " +
                                std::to_string(delay));
}

// Phase common to the integer and fractional closed forms:
//   (N*c1*l^2 - q*l)/N + c2*(q^2 - p^2)   [cycles]
// The c1 part has an integer numerator over 2N and is reduced exactly.
double closed_form_pref_cycles(const AfdmConfig& cfg, int delay, int p, int q) {
  const long long period = 2LL * cfg.n;
  long long num = (static_cast<long long>(cfg.two_n_c1()) * delay * delay -
                   2LL * q * delay) % period;
  if (num < 0) num += period;
  const double c1_part = static_cast<double>(num) / static_cast<double>(period);
  const double c2_part = cfg.c2 * (static_cast<double>(q) * q - static_cast<double>(p) * p);
  return c1_part + c2_part;
}

// Geometric sum S(u) = sum_{n=0}^{N-1} exp(-j*2*pi*u*n/N), evaluated through
// the closed half-angle form after exact reduction of u to [-N/2, N/2].
cxd dirichlet_sum(int n, double u) {
  const double k = std::nearbyint(u / n);
  const double u_red = u - n * k;
  if (u_red == 0.0) return {static_cast<double>(n), 0.0};
  const double num = std::sin(kPi * u_red);
  const double den = std::sin(kPi * u_red / n);
  return cis_cycles(-u_red * (n - 1) / (2.0 * n)) * (num / den);
}

int nearest_int_ties_to_zero(double v) {
  const double a = std::abs(v);
  double r = std::floor(a + 0.5);
  if (r == a + 0.5 && r > 0.0) r -= 1.0;  // exact half: toward zero
  return static_cast<int>(std::copysign(r, v));
}

}  // namespace

CMat path_matrix_exact(const AfdmConfig& cfg, int delay, double doppler_bins) {
  check_delay(cfg, delay);
  const int n = cfg.n;
  const CMat a = daft_matrix(cfg);

  // Time-domain operator: Gamma * Doppler * cyclic delay.
  CMat m = CMat::Zero(n, n);
  for (int t = 0; t < n; ++t) {
    const int src = ((t - delay) % n + n) % n;
    cxd gamma{1.0, 0.0};
    if (t < delay) {
      // Prefix phase correction; exactly 1 under the config contract but
      // written out so the factorization stands on its own.
      gamma = cis_cycles(-cfg.c1 * (static_cast<double>(n) * n -
                                    2.0 * n * (delay - t)));
    }
    m(t, src) = gamma * cis_cycles(-(doppler_bins / n) * t);
  }
  return a * m * a.adjoint();
}

CMat path_matrix_integer(const AfdmConfig& cfg, int delay, long long doppler_int) {
  check_delay(cfg, delay);
  const int n = cfg.n;
  const long long loc = doppler_int + static_cast<long long>(cfg.two_n_c1()) * delay;
  CMat h = CMat::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    const int q = static_cast<int>((((p + loc) % n) + n) % n);
    h(p, q) = cis_cycles(closed_form_pref_cycles(cfg, delay, p, q));
  }
  return h;
}

CMat path_matrix_fractional(const AfdmConfig& cfg, int delay, double doppler_bins) {
  check_delay(cfg, delay);
  const int n = cfg.n;
  const long long shift = static_cast<long long>(cfg.two_n_c1()) * delay;
  CMat h(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      // u = p - q + 2*N*c1*l + v; integer part reduced mod N exactly so the
      // kernel evaluation never sees a large argument.
      long long ui = (p - q + shift) % n;
      if (ui < 0) ui += n;
      const cxd s = dirichlet_sum(n, static_cast<double>(ui) + doppler_bins);
      h(p, q) = cis_cycles(closed_form_pref_cycles(cfg, delay, p, q)) * s /
                static_cast<double>(n);
    }
  }
  return h;
}

CMat path_matrix(const AfdmConfig& cfg, int delay, double doppler_bins) {
  if (is_integer_doppler(doppler_bins))
    return path_matrix_integer(cfg, delay,
                               static_cast<long long>(std::llround(doppler_bins)));
  return path_matrix_fractional(cfg, delay, doppler_bins);
}

CMat effective_channel(const ChannelRealization& ch) {
  validate(ch.cfg);
  CMat h = CMat::Zero(ch.cfg.n, ch.cfg.n);
  for (const PathTap& tap : ch.taps)
    h += tap.gain * path_matrix(ch.cfg, tap.delay, tap.doppler);
  return h;
}

CMat truncated_channel(const ChannelRealization& ch, int k_v) {
  validate(ch.cfg);
  if (k_v < 0) throw std::invalid_argument("truncated_channel: k_v must be >= 0");
  const int n = ch.cfg.n;
  CMat h = CMat::Zero(n, n);
  for (const PathTap& tap : ch.taps) {
    const long long loc = nearest_int_ties_to_zero(tap.doppler) +
                          static_cast<long long>(ch.cfg.two_n_c1()) * tap.delay;
    CMat m = tap.gain * path_matrix(ch.cfg, tap.delay, tap.doppler);
    for (int p = 0; p < n; ++p) {
      const int center = static_cast<int>((((p + loc) % n) + n) % n);
      for (int q = 0; q < n; ++q) {
        int d = std::abs(q - center);
        d = std::min(d, n - d);
        if (d > k_v) m(p, q) = 0.0;
      }
    }
    h += m;
  }
  return h;
}

CVec apply_channel_time(const CVec& s_cpp, const ChannelRealization& ch, double noise_var,
                        std::mt19937_64& rng) {
  validate(ch.cfg);
  const int n = ch.cfg.n;
  const int l = ch.cfg.cpp_len;
  if (s_cpp.size() != n + l)
    throw std::invalid_argument("apply_channel_time: expected length " +
                                std::to_string(n + l) + ", got " +
                                std::to_string(s_cpp.size()));
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw std::invalid_argument("apply_channel_time: noise_var must be finite and >= 0");
  for (const PathTap& tap : ch.taps) {
    if (tap.delay < 0 || tap.delay > l)
      throw std::domain_error("apply_channel_time: path delay " + std::to_string(tap.delay) +
                              " exceeds prefix length " + std::to_string(l));
  }

  CVec r = CVec::Zero(n + l);
  for (const PathTap& tap : ch.taps) {
    const double f = tap.doppler / n;  // cycles per sample
    for (int i = tap.delay; i < n + l; ++i) {
      // Doppler phase referenced to the first post-prefix sample.
      r(i) += tap.gain * s_cpp(i - tap.delay) * cis_cycles(-f * (i - l));
    }
  }
  if (noise_var > 0.0) {
    std::normal_distribution<double> dist(0.0, std::sqrt(noise_var / 2.0));
    for (int i = 0; i < n + l; ++i) {
      const double re = dist(rng);
      const double im = dist(rng);
      r(i) += cxd{re, im};
    }
  }
  return r;
}

ChannelRealization sample_channel(std::mt19937_64& rng, const AfdmConfig& cfg, int p, int l_max,
                                  double alpha_max, bool fractional, bool distinct) {
  validate(cfg);
  if (p < 1) throw std::invalid_argument("sample_channel: need at least one path");
  if (l_max < 0 || l_max >= cfg.n)
    throw std::invalid_argument("sample_channel: l_max must lie in [0, n)");
  if (!(alpha_max >= 0.0) || !std::isfinite(alpha_max))
    throw std::invalid_argument("sample_channel: alpha_max must be finite and >= 0");

  std::normal_distribution<double> gauss(0.0, std::sqrt(1.0 / (2.0 * p)));
  std::uniform_int_distribution<int> delay_dist(0, l_max);
  std::uniform_real_distribution<double> dop_dist(-alpha_max, alpha_max);

  ChannelRealization ch{cfg, {}};
  ch.taps.reserve(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    PathTap tap;
    const double re = gauss(rng);
    const double im = gauss(rng);
    tap.gain = {re, im};
    int attempts = 0;
    for (;;) {
      tap.delay = delay_dist(rng);
      double v = dop_dist(rng);
      if (!fractional) v = nearest_int_ties_to_zero(v);
      tap.doppler = v;
      if (!distinct) break;
      const bool clash = std::any_of(ch.taps.begin(), ch.taps.end(), [&](const PathTap& t) {
        return t.delay == tap.delay && t.doppler == tap.doppler;
      });
      if (!clash) break;
      if (++attempts > 1000)
        throw std::runtime_error("sample_channel: could not draw distinct delay-Doppler pairs");
    }
    ch.taps.push_back(tap);
  }
  return ch;
}

double alpha_max_normalized(double v_kmh, double fc_hz, double delta_f_hz) {
  if (!(v_kmh >= 0.0) || !(fc_hz > 0.0) || !(delta_f_hz > 0.0))
    throw std::invalid_argument("alpha_max_normalized: bad physical parameters");
  const double c = 3.0e8;  // nominal propagation speed, m/s
  return (v_kmh / 3.6) * fc_hz / (c * delta_f_hz);
}

}  // namespace afdm
