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
#include "afdm/dictionary.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace afdm {

// Hierarchical sparse Bayesian estimator over a delay-Doppler dictionary.
// Priors: h_i ~ CN(0, alpha_i), alpha_i ~ Gamma(1, lambda/2) (Laplace-type
// shrinkage), lambda ~ Gamma(nu/2, nu/2), noise variance beta ~ inverse-
// gamma(a, b).  Expectation-maximization alternates the Gaussian posterior
// of h with closed-form hyperparameter updates; the nu update is the root
// of a scalar digamma equation.

struct SblHyperConfig {
  double a = 1e-4;            // noise-variance prior shape
  double b = 1e-4;            // noise-variance prior scale
  double nu0 = 1.0;           // initial hyperprior shape
  double epsilon = 1e-6;      // stop when ||alpha step||_2^2 <= epsilon
  int n_max = 200;            // EM iteration cap
  int combination_delta = 0;  // keep this many largest-|mu| coefficients (0 = all)
};

struct SblState {
  CVec mu;        // posterior mean of the coefficients
  CMat sigma;     // posterior covariance
  RVec alpha;     // per-atom prior variances (exact zero = pruned atom)
  double beta = 0.0;    // noise variance estimate
  double lambda = 0.0;  // shrinkage rate
  double nu = 0.0;      // hyperprior shape
};

struct SblTraceRow {
  int iteration = 0;       // 1-based EM iteration
  double mu_norm = 0.0;    // ||mu||_2 after the E-step
  double alpha_step_sq = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double nu = 0.0;
};

struct SblResult {
  CVec h;          // final coefficients, after optional partial combination
  CVec mu_full;    // raw posterior mean before combination
  SblState state;  // hyperparameters at exit
  std::vector<SblTraceRow> trace;
  int iterations = 0;
  bool converged = false;
  int nu_root_failures = 0;  // iterations where the digamma equation had no
                             // root in the search bracket (previous nu kept)
};

// Raised when an EM iterate stops being finite; carries the offending state.
class SblDivergenceError : public std::runtime_error {
 public:
  SblDivergenceError(const std::string& what, SblState state, int iteration)
      : std::runtime_error(what), state_(std::move(state)), iteration_(iteration) {}
  const SblState& state() const { return state_; }
  int iteration() const { return iteration_; }

 private:
  SblState state_;
  int iteration_;
};

// Posterior update for fixed hyperparameters:
//   sigma = ((1/beta) phi^H phi + diag(alpha)^-1)^-1   (Cholesky)
//   mu    = (1/beta) sigma phi^H y
// Atoms with alpha_i == 0 are pruned exactly (mu_i = 0, zero row/column).
void sbl_e_step(const CVec& y, const CMat& phi, const CMat& gram, SblState& st);

// Hyperparameter update.  The expected residual power uses the alpha/beta
// that produced the current sigma (st.alpha/st.beta on entry), which keeps
// the noise-variance update positive by construction.
void sbl_m_step(const CVec& y, const CMat& phi, SblState& st, const SblHyperConfig& hyper,
                int* nu_root_failures);

struct NuRoot {
  double nu = 0.0;
  bool found = false;
};

// Unique root of log(nu/2) + 1 - digamma(nu) + log(lambda) - lambda = 0 on
// [1e-6, 1e3] (the left side is strictly decreasing in nu).  found == false
// when the bracket excludes the root.
NuRoot solve_nu_equation(double lambda);

SblResult sbl_estimate(const CVec& y, const Dictionary& dict, const SblHyperConfig& hyper);

// Greedy matched-pursuit baseline: k atoms, least-squares refit each step,
// ties broken toward the smaller atom index.  Stops early (with the support
// found so far) if the selected columns become rank deficient.
CVec omp_estimate(const CVec& y, const Dictionary& dict, int k);

// Linear MMSE coefficient estimate for known covariances:
//   h = (phi^H R_w^-1 phi + R_h^-1)^-1 phi^H R_w^-1 y
CVec mmse_estimate(const CVec& y, const CMat& phi, const CMat& r_h, const CMat& r_w);

// Bayesian bound on E||phi h - phi h_hat||^2 for the same model:
//   trace(phi (phi^H R_w^-1 phi + R_h^-1)^-1 phi^H)
double bcrlb(const CMat& phi, const CMat& r_h, const CMat& r_w);

// Regularized linear equalizer: (H^H H + noise_var I)^-1 H^H y.
CVec mmse_equalize(const CVec& y, const CMat& h, double noise_var);

}  // namespace afdm
