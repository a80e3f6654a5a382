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

#include "afdm/sbl.hpp"

#include "afdm/special.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace afdm {

namespace {

constexpr double kAlphaFloor = 1e-12;

std::vector<int> active_atoms(const RVec& alpha) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(alpha.size()));
  for (int i = 0; i < alpha.size(); ++i)
    if (alpha(i) > 0.0) idx.push_back(i);
  return idx;
}

bool all_finite(const CVec& v) { return v.allFinite(); }

}  // namespace

void sbl_e_step(const CVec& y, const CMat& phi, const CMat& gram, SblState& st) {
  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(phi.cols());
  if (y.size() != n) throw std::invalid_argument("sbl_e_step: measurement length mismatch");
  if (st.alpha.size() != m) throw std::invalid_argument("sbl_e_step: alpha length mismatch");
  if (gram.rows() != m || gram.cols() != m)
    throw std::invalid_argument("sbl_e_step: gram shape mismatch");
  if (!(st.beta > 0.0) || !std::isfinite(st.beta))
    throw std::invalid_argument("sbl_e_step: beta must be finite and > 0");
  for (int i = 0; i < m; ++i)
    if (!(st.alpha(i) >= 0.0))
      throw std::invalid_argument("sbl_e_step: alpha must be >= 0");

  const std::vector<int> act = active_atoms(st.alpha);
  const int k = static_cast<int>(act.size());

  st.mu = CVec::Zero(m);
  st.sigma = CMat::Zero(m, m);
  if (k == 0) return;  // everything pruned: degenerate posterior at zero

  CMat b(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) b(r, c) = gram(act[r], act[c]) / st.beta;
  for (int r = 0; r < k; ++r) b(r, r) += cxd{1.0 / st.alpha(act[r]), 0.0};

  Eigen::LLT<CMat> llt(b);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sbl_e_step: posterior precision not positive definite");

  CVec rhs(k);
  const CVec phy = phi.adjoint() * y;
  for (int r = 0; r < k; ++r) rhs(r) = phy(act[r]) / st.beta;

  const CMat sigma_act = llt.solve(CMat::Identity(k, k));
  const CVec mu_act = sigma_act * rhs;

  for (int r = 0; r < k; ++r) {
    st.mu(act[r]) = mu_act(r);
    for (int c = 0; c < k; ++c) st.sigma(act[r], act[c]) = sigma_act(r, c);
  }
  // Symmetrize to keep the diagonal exactly real after the solve.
  st.sigma = 0.5 * (st.sigma + st.sigma.adjoint()).eval();
}

NuRoot solve_nu_equation(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solve_nu_equation: lambda must be finite and > 0");
  const double log_term = std::log(lambda) - lambda;
  auto g = [log_term](double nu) {
    return std::log(nu / 2.0) + 1.0 - digamma(nu) + log_term;
  };
  double lo = 1e-6, hi = 1e3;
  double glo = g(lo), ghi = g(hi);
  if (!(glo > 0.0) || !(ghi < 0.0)) return {0.0, false};
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), true};
}

void sbl_m_step(const CVec& y, const CMat& phi, SblState& st, const SblHyperConfig& hyper,
                int* nu_root_failures) {
  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(phi.cols());
  if (y.size() != n) throw std::invalid_argument("sbl_m_step: measurement length mismatch");
  if (2.0 * hyper.a - 2.0 + n <= 0.0)
    throw std::invalid_argument("sbl_m_step: need n > 2 - 2a measurements");

  // Expected residual power under the posterior the E-step just produced;
  // the trace identity holds for the alpha/beta that built sigma, and keeps
  // this nonnegative.
  double trace_term = 0.0;
  for (int i = 0; i < m; ++i)
    if (st.alpha(i) > 0.0) trace_term += 1.0 - st.sigma(i, i).real() / st.alpha(i);
  const double resid = (y - phi * st.mu).squaredNorm();
  const double expected_err = st.beta * trace_term + resid;

  // Per-atom variance update from the Laplace-type prior.
  RVec alpha_new(m);
  for (int i = 0; i < m; ++i) {
    const double c = st.sigma(i, i).real() + std::norm(st.mu(i));
    double a;
    if (st.lambda < 1e-12) {
      a = c;  // lambda -> 0 limit of (sqrt(1+4*lambda*c)-1)/(2*lambda)
    } else {
      a = (std::sqrt(1.0 + 4.0 * st.lambda * c) - 1.0) / (2.0 * st.lambda);
    }
    alpha_new(i) = std::max(a, kAlphaFloor);
  }

  const double beta_new = (2.0 * hyper.b + expected_err) / (2.0 * hyper.a - 2.0 + n);
  const double lambda_new =
      (m + st.nu / 2.0 - 1.0) / (alpha_new.sum() / 2.0 + st.nu / 2.0);

  double nu_new = st.nu;
  const NuRoot root = solve_nu_equation(lambda_new);
  if (root.found) {
    nu_new = root.nu;
  } else if (nu_root_failures != nullptr) {
    ++*nu_root_failures;
  }

  st.alpha = alpha_new;
  st.beta = beta_new;
  st.lambda = lambda_new;
  st.nu = nu_new;
}

SblResult sbl_estimate(const CVec& y, const Dictionary& dict, const SblHyperConfig& hyper) {
  const int m = static_cast<int>(dict.phi.cols());
  if (y.size() != dict.phi.rows())
    throw std::invalid_argument("sbl_estimate: measurement length mismatch");
  if (hyper.n_max < 1) throw std::invalid_argument("sbl_estimate: n_max must be >= 1");
  if (!(hyper.epsilon >= 0.0)) throw std::invalid_argument("sbl_estimate: epsilon must be >= 0");
  if (hyper.combination_delta < 0 || hyper.combination_delta > m)
    throw std::invalid_argument("sbl_estimate: combination_delta out of range");

  SblResult res;
  SblState& st = res.state;
  st.alpha = RVec::Ones(m);
  st.beta = std::max(y.squaredNorm() / y.size() / 10.0, 1e-12);
  st.lambda = 1.0;
  st.nu = hyper.nu0;

  for (int p = 1; p <= hyper.n_max; ++p) {
    const RVec alpha_prev = st.alpha;
    sbl_e_step(y, dict.phi, dict.gram, st);
    sbl_m_step(y, dict.phi, st, hyper, &res.nu_root_failures);

    const double step_sq = (st.alpha - alpha_prev).squaredNorm();
    res.trace.push_back({p, st.mu.norm(), step_sq, st.beta, st.lambda, st.nu});
    res.iterations = p;

    if (!all_finite(st.mu) || !st.alpha.allFinite() || !std::isfinite(st.beta) ||
        !std::isfinite(st.lambda) || !std::isfinite(st.nu) || st.beta <= 0.0)
      throw SblDivergenceError("sbl_estimate: non-finite EM iterate", st, p);

    if (step_sq <= hyper.epsilon) {
      res.converged = true;
      break;
    }
  }

  res.mu_full = st.mu;
  res.h = st.mu;
  if (hyper.combination_delta > 0 && hyper.combination_delta < m) {
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::norm(st.mu(a)) > std::norm(st.mu(b));
    });
    CVec kept = CVec::Zero(m);
    for (int i = 0; i < hyper.combination_delta; ++i)
      kept(idx[static_cast<std::size_t>(i)]) = st.mu(idx[static_cast<std::size_t>(i)]);
    res.h = kept;
  }
  return res;
}

CVec omp_estimate(const CVec& y, const Dictionary& dict, int k) {
  const CMat& phi = dict.phi;
  const int m = static_cast<int>(phi.cols());
  if (y.size() != phi.rows()) throw std::invalid_argument("omp_estimate: measurement length mismatch");
  if (k < 1 || k > m) throw std::invalid_argument("omp_estimate: sparsity k out of range");

  std::vector<int> support;
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  CVec residual = y;
  CVec coeffs;

  for (int it = 0; it < k; ++it) {
    int best = -1;
    double best_score = -1.0;
    for (int j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double score = std::abs(phi.col(j).dot(residual));
      if (score > best_score) {  // strict: ties keep the smaller index
        best_score = score;
        best = j;
      }
    }
    support.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;

    CMat sub(phi.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = phi.col(support[c]);
    Eigen::ColPivHouseholderQR<CMat> qr(sub);
    if (qr.rank() < static_cast<Eigen::Index>(support.size())) {
      // Newly added column is dependent: drop it and stop with the
      // previous support.
      support.pop_back();
      break;
    }
    coeffs = qr.solve(y);
    residual = y - sub * coeffs;
  }

  CVec h = CVec::Zero(m);
  for (std::size_t c = 0; c < support.size(); ++c) h(support[c]) = coeffs(static_cast<Eigen::Index>(c));
  return h;
}

CVec mmse_estimate(const CVec& y, const CMat& phi, const CMat& r_h, const CMat& r_w) {
  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(phi.cols());
  if (y.size() != n) throw std::invalid_argument("mmse_estimate: measurement length mismatch");
  if (r_h.rows() != m || r_h.cols() != m || r_w.rows() != n || r_w.cols() != n)
    throw std::invalid_argument("mmse_estimate: covariance shape mismatch");

  Eigen::LLT<CMat> llt_w(r_w);
  if (llt_w.info() != Eigen::Success)
    throw std::runtime_error("mmse_estimate: noise covariance not positive definite");
  Eigen::LLT<CMat> llt_h(r_h);
  if (llt_h.info() != Eigen::Success)
    throw std::runtime_error("mmse_estimate: prior covariance not positive definite");

  const CMat a = llt_w.solve(phi);                       // R_w^-1 phi
  CMat j = phi.adjoint() * a + llt_h.solve(CMat::Identity(m, m));
  j = 0.5 * (j + j.adjoint()).eval();
  Eigen::LLT<CMat> llt_j(j);
  if (llt_j.info() != Eigen::Success)
    throw std::runtime_error("mmse_estimate: normal equations not positive definite");
  return llt_j.solve(a.adjoint() * y);
}

double bcrlb(const CMat& phi, const CMat& r_h, const CMat& r_w) {
  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(phi.cols());
  if (r_h.rows() != m || r_h.cols() != m || r_w.rows() != n || r_w.cols() != n)
    throw std::invalid_argument("bcrlb: covariance shape mismatch");

  Eigen::LLT<CMat> llt_w(r_w);
  if (llt_w.info() != Eigen::Success)
    throw std::runtime_error("bcrlb: noise covariance not positive definite");
  Eigen::LLT<CMat> llt_h(r_h);
  if (llt_h.info() != Eigen::Success)
    throw std::runtime_error("bcrlb: prior covariance not positive definite");

  CMat j = phi.adjoint() * llt_w.solve(phi) + llt_h.solve(CMat::Identity(m, m));
  j = 0.5 * (j + j.adjoint()).eval();
  Eigen::LLT<CMat> llt_j(j);
  if (llt_j.info() != Eigen::Success)
    throw std::runtime_error("bcrlb: information matrix not positive definite");
  const CMat x = llt_j.solve(phi.adjoint());  // m x n
  return (phi.cwiseProduct(x.transpose())).sum().real();
}

CVec mmse_equalize(const CVec& y, const CMat& h, double noise_var) {
  const int n = static_cast<int>(h.rows());
  if (y.size() != n) throw std::invalid_argument("mmse_equalize: length mismatch");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    throw std::invalid_argument("mmse_equalize: noise_var must be finite and >= 0");
  CMat j = h.adjoint() * h;
  j.diagonal().array() += cxd{noise_var, 0.0};
  const CVec x = Eigen::LDLT<CMat>(j).solve(h.adjoint() * y);
  if (!x.allFinite()) throw std::runtime_error("mmse_equalize: singular equalization system");
  return x;
}

}  // namespace afdm
