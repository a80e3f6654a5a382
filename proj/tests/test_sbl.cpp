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
#include "afdm/metrics.hpp"
#include "afdm/pilot.hpp"
#include "afdm/rng.hpp"
#include "afdm/sbl.hpp"
#include "afdm/special.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <utility>

using namespace afdm;

namespace {

const AfdmConfig kCfg = make_config(64, 3.0 / 128.0, 0.0, 2);

// Three on-grid paths for the g = 1 dictionary over l <= 2, |v| <= 1:
// atom index = delay * 3 + (doppler + 1).
struct GridScene {
  Dictionary dict;
  CVec h_true;
  CVec y_clean;
};

GridScene make_grid_scene() {
  GridScene s;
  const CVec pilot = zc_pilot(64, 1);
  s.dict = build_dictionary(pilot, kCfg, 2, 0.9, 1);
  s.h_true = CVec::Zero(9);
  s.h_true(2) = cxd{0.8, -0.5};   // (delay 0, doppler +1)
  s.h_true(3) = cxd{-0.3, 0.4};   // (delay 1, doppler -1)
  s.h_true(7) = cxd{0.5, 0.25};   // (delay 2, doppler 0)
  s.y_clean = s.dict.phi * s.h_true;
  return s;
}

}  // namespace

TEST_CASE("digamma matches reference values") {
  CHECK(digamma(0.5) == doctest::Approx(-1.96351002602142348).epsilon(1e-13));
  CHECK(digamma(1.0) == doctest::Approx(-0.577215664901532861).epsilon(1e-13));
  CHECK(digamma(2.0) == doctest::Approx(0.422784335098467139).epsilon(1e-13));
  CHECK(digamma(6.5) == doctest::Approx(1.79291133039993294).epsilon(1e-13));
  CHECK(digamma(1e-4) == doctest::Approx(-10000.5770511835143).epsilon(1e-13));
  CHECK(digamma(123.456) == doctest::Approx(4.81182932382898539).epsilon(1e-13));
  CHECK(digamma(3.25) == doctest::Approx(1.01699091106817904).epsilon(1e-13));
  // Recurrence psi(x+1) = psi(x) + 1/x across the series/recursion boundary.
  for (double x : {0.3, 2.7, 9.9, 41.5}) {
    CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
  }
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-3.0), std::domain_error);
}

TEST_CASE("nu equation roots are reproducible") {
  const NuRoot r1 = solve_nu_equation(1.0);
  REQUIRE(r1.found);
  CHECK(r1.nu == doctest::Approx(0.849569991232898311).epsilon(1e-6));
  const NuRoot r2 = solve_nu_equation(0.5);
  REQUIRE(r2.found);
  CHECK(r2.nu == doctest::Approx(0.68408007327651504).epsilon(1e-6));
  const NuRoot r3 = solve_nu_equation(2.0);
  REQUIRE(r3.found);
  CHECK(r3.nu == doctest::Approx(0.615556766479594379).epsilon(1e-6));
  // Residual of the defining equation at the returned root.
  const std::pair<double, double> cases[] = {{1.0, r1.nu}, {0.5, r2.nu}, {2.0, r3.nu}};
  for (const auto& [lambda, nu] : cases) {
    const double g = std::log(nu / 2.0) + 1.0 - digamma(nu) + std::log(lambda) - lambda;
    CHECK(std::abs(g) < 1e-6);
  }
  CHECK_FALSE(solve_nu_equation(1e9).found);  // bracket excludes the root
  CHECK_THROWS_AS(solve_nu_equation(0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_nu_equation(-1.0), std::invalid_argument);
}

TEST_CASE("e-step reproduces the scalar posterior") {
  CMat phi(2, 1);
  phi << cxd{1.0, 0.0}, cxd{0.0, 1.0};
  CVec y(2);
  y << cxd{2.0, 0.0}, cxd{0.0, 2.0};
  SblState st;
  st.alpha = RVec::Ones(1);
  st.beta = 0.5;
  // sigma = 1 / ((1/beta)|phi|^2 + 1/alpha) = 1/5, mu = (1/beta) sigma phi^H y
  sbl_e_step(y, phi, phi.adjoint() * phi, st);
  CHECK(st.sigma(0, 0).real() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(st.sigma(0, 0).imag()) < 1e-15);
  CHECK(st.mu(0).real() == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(std::abs(st.mu(0).imag()) < 1e-12);
}

TEST_CASE("e-step prunes exact-zero prior variances") {
  const CMat phi = CMat::Identity(2, 2);
  CVec y(2);
  y << cxd{5.0, 0.0}, cxd{5.0, 0.0};
  SblState st;
  st.alpha = RVec::Ones(2);
  st.alpha(0) = 0.0;
  st.beta = 1.0;
  sbl_e_step(y, phi, phi.adjoint() * phi, st);
  CHECK(st.mu(0) == cxd{0.0, 0.0});
  CHECK(st.sigma(0, 0) == cxd{0.0, 0.0});
  CHECK(st.sigma(0, 1) == cxd{0.0, 0.0});
  CHECK(st.mu(1).real() == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(st.sigma(1, 1).real() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("e-step validates its inputs") {
  const CMat phi = CMat::Identity(2, 2);
  const CVec y = CVec::Zero(2);
  SblState st;
  st.alpha = RVec::Ones(3);  // wrong length
  st.beta = 1.0;
  CHECK_THROWS_AS(sbl_e_step(y, phi, phi.adjoint() * phi, st), std::invalid_argument);
  st.alpha = RVec::Ones(2);
  st.beta = 0.0;
  CHECK_THROWS_AS(sbl_e_step(y, phi, phi.adjoint() * phi, st), std::invalid_argument);
  st.beta = 1.0;
  st.alpha(1) = -0.5;
  CHECK_THROWS_AS(sbl_e_step(y, phi, phi.adjoint() * phi, st), std::invalid_argument);
}

TEST_CASE("m-step updates match hand-computed values") {
  CMat phi(2, 1);
  phi << cxd{1.0, 0.0}, cxd{0.0, 1.0};
  CVec y(2);
  y << cxd{2.0, 0.0}, cxd{0.0, 2.0};
  SblState st;
  st.alpha = RVec::Ones(1);
  st.beta = 0.5;
  st.lambda = 1.0;
  st.nu = 1.0;
  sbl_e_step(y, phi, phi.adjoint() * phi, st);

  SblHyperConfig hyper;
  int failures = 0;
  sbl_m_step(y, phi, st, hyper, &failures);

  // Residual power: beta*(1 - sigma/alpha) + ||y - phi mu||^2
  //               = 0.5*0.8 + 0.32 = 0.72, so beta = 0.7202 / 0.0002.
  CHECK(st.beta == doctest::Approx(3601.0).epsilon(1e-9));
  // c = sigma + |mu|^2 = 2.76; alpha = (sqrt(1 + 4c) - 1) / 2.
  CHECK(st.alpha(0) == doctest::Approx(1.23493516).epsilon(1e-6));
  // lambda = (m + nu/2 - 1) / (sum(alpha)/2 + nu/2) with m = 1, nu = 1.
  CHECK(st.lambda == doctest::Approx(0.4474404).epsilon(1e-5));
  CHECK(st.nu > 0.0);
  CHECK(st.nu < 1e3);
  CHECK(failures == 0);
}

TEST_CASE("m-step takes the small-lambda limit of the variance update") {
  const CMat phi = CMat::Identity(3, 3);
  CVec y(3);
  y << cxd{1.0, 0.0}, cxd{0.0, 0.0}, cxd{0.0, 0.0};
  SblState st;
  st.alpha = RVec::Ones(3);
  st.beta = 1.0;
  st.lambda = 1e-13;  // below the limit threshold
  st.nu = 1.0;
  sbl_e_step(y, phi, phi.adjoint() * phi, st);
  RVec c_expected(3);
  for (int i = 0; i < 3; ++i)
    c_expected(i) = st.sigma(i, i).real() + std::norm(st.mu(i));
  SblHyperConfig hyper;
  sbl_m_step(y, phi, st, hyper, nullptr);
  for (int i = 0; i < 3; ++i)
    CHECK(st.alpha(i) == doctest::Approx(c_expected(i)).epsilon(1e-12));
}

TEST_CASE("m-step refuses degenerate measurement counts") {
  CMat phi(1, 1);
  phi(0, 0) = cxd{1.0, 0.0};
  CVec y(1);
  y(0) = cxd{1.0, 0.0};
  SblState st;
  st.alpha = RVec::Ones(1);
  st.beta = 1.0;
  st.lambda = 1.0;
  st.nu = 1.0;
  st.mu = CVec::Zero(1);
  st.sigma = CMat::Zero(1, 1);
  SblHyperConfig hyper;  // 2a - 2 + 1 < 0 for a = 1e-4
  CHECK_THROWS_AS(sbl_m_step(y, phi, st, hyper, nullptr), std::invalid_argument);
}

TEST_CASE("sbl recovers an on-grid sparse channel") {
  GridScene s = make_grid_scene();
  std::mt19937_64 rng(5);
  CVec y = s.y_clean;
  for (int i = 0; i < y.size(); ++i) y(i) += complex_normal(rng, 1e-6);

  SblHyperConfig hyper;
  const SblResult res = sbl_estimate(y, s.dict, hyper);
  CHECK(res.converged);
  CHECK(res.iterations <= hyper.n_max);
  CHECK(res.trace.size() == static_cast<std::size_t>(res.iterations));
  for (const SblTraceRow& row : res.trace) {
    CHECK(row.beta > 0.0);
    CHECK(row.lambda > 0.0);
  }
  CHECK(nmse_ratio(res.h, s.h_true) < 1e-3);
  // On-grid taps should dominate the recovered support.
  double off_grid_power = 0.0;
  for (int i : {0, 1, 4, 5, 6, 8}) off_grid_power += std::norm(res.h(i));
  CHECK(off_grid_power < 1e-3 * s.h_true.squaredNorm());
}

TEST_CASE("partial combination keeps only the strongest coefficients") {
  GridScene s = make_grid_scene();
  std::mt19937_64 rng(6);
  CVec y = s.y_clean;
  for (int i = 0; i < y.size(); ++i) y(i) += complex_normal(rng, 1e-6);

  SblHyperConfig hyper;
  hyper.combination_delta = 3;
  const SblResult res = sbl_estimate(y, s.dict, hyper);
  int nonzeros = 0;
  double kept_min = 1e300;
  for (int i = 0; i < res.h.size(); ++i) {
    if (res.h(i) != cxd{0.0, 0.0}) {
      ++nonzeros;
      CHECK(res.h(i) == res.mu_full(i));
      kept_min = std::min(kept_min, std::abs(res.h(i)));
    }
  }
  CHECK(nonzeros == 3);
  // No dropped coefficient may exceed a kept one.
  for (int i = 0; i < res.h.size(); ++i)
    if (res.h(i) == cxd{0.0, 0.0}) CHECK(std::abs(res.mu_full(i)) <= kept_min + 1e-15);
  CHECK(nmse_ratio(res.h, s.h_true) < 1e-3);
}

TEST_CASE("omp recovers the exact support on grid") {
  const GridScene s = make_grid_scene();
  const CVec h = omp_estimate(s.y_clean, s.dict, 3);
  for (int i = 0; i < 9; ++i) {
    if (i == 2 || i == 3 || i == 7)
      CHECK(std::abs(h(i) - s.h_true(i)) < 1e-8);
    else
      CHECK(h(i) == cxd{0.0, 0.0});
  }
  CHECK(nmse_ratio(h, s.h_true) < 1e-10);
}

TEST_CASE("omp breaks ties toward the smaller index and stops on rank loss") {
  Dictionary d;
  d.phi = CMat(2, 3);
  d.phi.col(0) << cxd{1.0, 0.0}, cxd{0.0, 0.0};
  d.phi.col(1) = d.phi.col(0);  // duplicate atom
  d.phi.col(2) << cxd{0.0, 0.0}, cxd{1.0, 0.0};
  d.gram = d.phi.adjoint() * d.phi;
  d.atoms.resize(3);
  CVec y(2);
  y << cxd{1.0, 0.0}, cxd{0.0, 0.0};
  const CVec h = omp_estimate(y, d, 2);
  CHECK(std::abs(h(0) - cxd{1.0, 0.0}) < 1e-12);
  CHECK(h(1) == cxd{0.0, 0.0});  // duplicate never enters the support
  CHECK(h(2) == cxd{0.0, 0.0});  // zero residual adds nothing useful
  CHECK_THROWS_AS(omp_estimate(y, d, 0), std::invalid_argument);
  CHECK_THROWS_AS(omp_estimate(y, d, 4), std::invalid_argument);
}

TEST_CASE("mmse estimate approaches least squares under a flat prior") {
  std::mt19937_64 rng(9);
  CMat phi(8, 3);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 3; ++c) phi(r, c) = complex_normal(rng, 1.0);
  CVec y(8);
  for (int r = 0; r < 8; ++r) y(r) = complex_normal(rng, 1.0);

  const CMat flat = 1e12 * CMat::Identity(3, 3);
  const CMat noise = CMat::Identity(8, 8);
  const CVec h_mmse = mmse_estimate(y, phi, flat, noise);
  const CVec h_ls = phi.colPivHouseholderQr().solve(y);
  CHECK((h_mmse - h_ls).norm() / h_ls.norm() < 1e-6);

  // A vanishing prior shrinks the estimate to zero.
  const CVec h_tight = mmse_estimate(y, phi, 1e-12 * CMat::Identity(3, 3), noise);
  CHECK(h_tight.norm() < 1e-6 * h_ls.norm());
}

TEST_CASE("information bound matches a hand-computed scalar case") {
  CMat phi(2, 1);
  phi << cxd{1.0, 0.0}, cxd{1.0, 0.0};
  const CMat r_w = 0.5 * CMat::Identity(2, 2);
  CMat r_h(1, 1);
  r_h(0, 0) = cxd{2.0, 0.0};
  // J = 2/0.5 + 1/2 = 4.5, bound = trace(phi J^-1 phi^H) = 2/4.5.
  CHECK(bcrlb(phi, r_h, r_w) == doctest::Approx(2.0 / 4.5).epsilon(1e-12));
  CHECK_THROWS_AS(bcrlb(phi, CMat::Identity(2, 2), r_w), std::invalid_argument);
}

TEST_CASE("equalizer solves the regularized normal equations") {
  const CMat h = 2.0 * CMat::Identity(2, 2);
  CVec y(2);
  y << cxd{4.0, 0.0}, cxd{0.0, 2.0};
  const CVec x0 = mmse_equalize(y, h, 0.0);
  CHECK((x0 - y / 2.0).norm() < 1e-12);
  const CVec x1 = mmse_equalize(y, h, 1.0);
  CHECK((x1 - 0.4 * y).norm() < 1e-12);
  CHECK_THROWS_AS(mmse_equalize(y, h, -1.0), std::invalid_argument);
  CMat broken = h;
  broken(0, 0) = cxd{std::numeric_limits<double>::infinity(), 0.0};
  CHECK_THROWS_AS(mmse_equalize(y, broken, 0.0), std::runtime_error);
}

TEST_CASE("divergence error carries the failing state") {
  SblState st;
  st.beta = -1.0;
  const SblDivergenceError err("broken", st, 7);
  CHECK(err.iteration() == 7);
  CHECK(err.state().beta == -1.0);
  CHECK(std::string(err.what()) == "broken");
}

TEST_CASE("sbl estimate validates arguments") {
  const GridScene s = make_grid_scene();
  SblHyperConfig hyper;
  CHECK_THROWS_AS(sbl_estimate(CVec::Zero(10), s.dict, hyper), std::invalid_argument);
  hyper.combination_delta = 10;  // more than the atom count
  CHECK_THROWS_AS(sbl_estimate(s.y_clean, s.dict, hyper), std::invalid_argument);
  hyper.combination_delta = 0;
  hyper.n_max = 0;
  CHECK_THROWS_AS(sbl_estimate(s.y_clean, s.dict, hyper), std::invalid_argument);
}
