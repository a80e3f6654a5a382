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

#include "afdm/slp.hpp"

#include "afdm/constellation.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace afdm {

RVec simplex_project(const RVec& v) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw std::invalid_argument("simplex_project: empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int rho = -1;
  for (int i = 0; i < n; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double cand = (css - 1.0) / (i + 1);
    if (u[static_cast<std::size_t>(i)] - cand > 0.0) {
      rho = i;
      tau = cand;
    }
  }
  // rho >= 0 always: at i = 0 the test reads u_0 > u_0 - 1.
  (void)rho;
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

double ci_margin(const CVec& h_row, const CVec& x, cxd s_n, double phi_angle) {
  if (h_row.size() != x.size()) throw std::invalid_argument("ci_margin: length mismatch");
  const cxd z = (h_row.transpose() * x).value() * std::conj(s_n);
  return z.real() * std::sin(phi_angle) - std::abs(z.imag()) * std::cos(phi_angle);
}

PrecodeProblem build_precode_problem(const CMat& h, const CVec& s, int q, double power) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n) throw std::invalid_argument("build_precode_problem: channel must be square");
  if (s.size() != n) throw std::invalid_argument("build_precode_problem: symbol length mismatch");
  psk_bits_per_symbol(q);
  if (!(power > 0.0) || !std::isfinite(power))
    throw std::invalid_argument("build_precode_problem: power must be finite and > 0");
  for (int i = 0; i < n; ++i)
    if (std::abs(std::abs(s(i)) - 1.0) > 1e-9)
      throw std::invalid_argument("build_precode_problem: targets must be unit modulus");

  PrecodeProblem prob;
  prob.h = h;
  prob.s = s;
  prob.q = q;
  prob.power = power;
  prob.phi_angle = kPi / q;

  const double sp = std::sin(prob.phi_angle);
  const double cp = std::cos(prob.phi_angle);
  const cxd lam_a{sp, -cp};
  const cxd lam_b{sp, cp};

  const CMat sh = s.conjugate().asDiagonal() * h;
  const CMat a = lam_a * sh;
  const CMat b = lam_b * sh;

  prob.t.resize(2 * n, 2 * n);
  prob.t.topLeftCorner(n, n) = a.real();
  prob.t.topRightCorner(n, n) = -a.imag();
  prob.t.bottomLeftCorner(n, n) = b.real();
  prob.t.bottomRightCorner(n, n) = -b.imag();
  return prob;
}

namespace {

// Largest eigenvalue of the symmetric PSD matrix k, by power iteration with
// a fixed deterministic start.
double spectral_bound(const RMat& k) {
  const int n = static_cast<int>(k.rows());
  RVec v = RVec::Ones(n) / std::sqrt(static_cast<double>(n));
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    RVec w = k * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    lam = nw;
  }
  return lam;
}

}  // namespace

DualQpResult solve_dual_qp(const RMat& t, const DualQpOptions& opts) {
  const int d = static_cast<int>(t.rows());
  if (t.cols() != d) throw std::invalid_argument("solve_dual_qp: T must be square (stacked real form)");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_dual_qp: tol must be > 0");
  const long long max_iter =
      opts.max_iter > 0 ? opts.max_iter : 10LL * static_cast<long long>(d) * d;

  const RMat k = t * t.transpose();
  const double lam_max = spectral_bound(k);

  DualQpResult res;
  if (lam_max <= 0.0) {
    // T is identically zero: every simplex point is optimal.
    res.delta = RVec::Constant(d, 1.0 / d);
    res.objective = 0.0;
    res.converged = true;
    return res;
  }
  const double lips = 2.0 * lam_max * 1.02;  // small safety factor on 1/L

  RVec x = RVec::Constant(d, 1.0 / d);
  RVec x_prev = x;
  RVec y = x;
  double theta_prev = 1.0;
  double f_prev = x.dot(k * x);

  RVec best = x;
  double best_pg = std::numeric_limits<double>::infinity();
  double best_f = f_prev;

  for (long long it = 1; it <= max_iter; ++it) {
    const RVec grad_y = 2.0 * (k * y);
    const RVec x_new = simplex_project(y - grad_y / lips);

    const RVec kx = k * x_new;
    const double f_new = x_new.dot(kx);
    const RVec pg_point = simplex_project(x_new - 2.0 * kx / lips);
    const double pg = lips * (x_new - pg_point).norm();

    res.iterations = it;
    if (f_new < best_f || (f_new == best_f && pg < best_pg)) {
      best = x_new;
      best_f = f_new;
      best_pg = pg;
    }
    if (pg <= opts.tol) {
      res.delta = x_new;
      res.objective = f_new;
      res.pg_residual = pg;
      res.converged = true;
      return res;
    }

    double theta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_prev * theta_prev));
    if (f_new > f_prev) {
      // Adaptive restart: drop momentum when the objective rises.
      y = x_new;
      theta = 1.0;
    } else {
      y = x_new + ((theta_prev - 1.0) / theta) * (x_new - x_prev);
    }
    x_prev = x;
    x = x_new;
    f_prev = f_new;
    theta_prev = theta;
  }

  res.delta = best;
  res.objective = best_f;
  res.pg_residual = best_pg;
  res.converged = false;
  return res;
}

PrecodeSolution recover_waveform(const PrecodeProblem& prob, const DualQpResult& dual) {
  const int d = static_cast<int>(prob.t.rows());
  if (dual.delta.size() != d) throw std::invalid_argument("recover_waveform: dual length mismatch");
  const int n = d / 2;

  const RVec g = prob.t.transpose() * dual.delta;
  const double ng = g.norm();
  if (!(ng > 1e-15))
    throw std::runtime_error(
        "recover_waveform: zero dual certificate, no positive-margin waveform exists");

  const double root_p = std::sqrt(prob.power);
  PrecodeSolution sol;
  sol.w = (root_p / ng) * g;
  sol.x.resize(n);
  for (int i = 0; i < n; ++i) sol.x(i) = cxd{sol.w(i), sol.w(n + i)};
  sol.delta = dual.delta;
  sol.margin = root_p * ng;
  sol.objective = dual.objective;
  sol.iterations = dual.iterations;
  sol.converged = dual.converged;

  const RVec tw = prob.t * sol.w;
  double slack = 0.0;
  for (int kk = 0; kk < d; ++kk)
    slack = std::max(slack, std::abs(dual.delta(kk) * (tw(kk) - sol.margin)));
  sol.slack_residual = slack;
  return sol;
}

PrecodeSolution slp_precode(const CMat& h, const CVec& s, int q, double power,
                            const DualQpOptions& opts) {
  const PrecodeProblem prob = build_precode_problem(h, s, q, power);
  const DualQpResult dual = solve_dual_qp(prob.t, opts);
  return recover_waveform(prob, dual);
}

MmsePrecodeResult mmse_precode(const CMat& h, const CVec& s, double power, double noise_var) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n) throw std::invalid_argument("mmse_precode: channel must be square");
  if (s.size() != n) throw std::invalid_argument("mmse_precode: symbol length mismatch");
  if (!(power > 0.0) || !std::isfinite(power))
    throw std::invalid_argument("mmse_precode: power must be finite and > 0");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw std::invalid_argument("mmse_precode: noise_var must be finite and >= 0");

  CMat j = h.adjoint() * h;
  j.diagonal().array() += cxd{n * noise_var / power, 0.0};
  const CVec v = Eigen::LDLT<CMat>(j).solve(h.adjoint() * s);
  const double nv = v.norm();
  if (!(nv > 0.0) || !v.allFinite())
    throw std::runtime_error("mmse_precode: singular precoding system");
  MmsePrecodeResult res;
  res.gamma = std::sqrt(power) / nv;
  res.x = res.gamma * v;
  return res;
}

}  // namespace afdm
