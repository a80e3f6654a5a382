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
#include "afdm/rng.hpp"
#include "afdm/slp.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace afdm;

namespace {

CMat random_channel(std::mt19937_64& rng, int n) {
  CMat h(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) h(r, c) = complex_normal(rng, 1.0);
  return h;
}

CVec random_psk_targets(std::mt19937_64& rng, int n, int q) {
  std::uniform_int_distribution<int> pos(0, q - 1);
  CVec s(n);
  for (int i = 0; i < n; ++i) s(i) = psk_point(pos(rng), q);
  return s;
}

Eigen::MatrixXd random_real(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd t(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) t(r, c) = g(rng);
  return t;
}

}  // namespace

TEST_CASE("simplex projection hand cases") {
  RVec v(2);
  v << 0.5, 0.5;
  CHECK((simplex_project(v) - v).norm() < 1e-15);
  v << 2.0, 0.0;
  RVec expect(2);
  expect << 1.0, 0.0;
  CHECK((simplex_project(v) - expect).norm() < 1e-15);
  v << 0.8, 0.6;
  expect << 0.6, 0.4;
  CHECK((simplex_project(v) - expect).norm() < 1e-12);
  v << -1.0, -2.0;
  expect << 1.0, 0.0;
  CHECK((simplex_project(v) - expect).norm() < 1e-15);
  RVec u = RVec::Ones(3);
  CHECK((simplex_project(u) - RVec::Constant(3, 1.0 / 3.0)).norm() < 1e-15);
  CHECK_THROWS_AS(simplex_project(RVec()), std::invalid_argument);
}

TEST_CASE("simplex projection agrees with the sorted reference and is optimal") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(rng);
    RVec v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    const RVec p = simplex_project(v);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((p - test_oracles::simplex_project_sorted(v)).norm() < 1e-12);
    CHECK((simplex_project(p) - p).norm() < 1e-12);  // idempotent
    // No feasible point may be closer to v than the projection.
    RVec z = RVec::Zero(n);
    z(trial % n) = 1.0;
    CHECK((v - p).norm() <= (v - z).norm() + 1e-12);
  }
}

TEST_CASE("margin of a single observation has the sector form") {
  CVec h_row(2);
  h_row << cxd{1.0, 0.0}, cxd{0.0, 0.0};
  CVec x(2);
  x << cxd{1.0, 0.5}, cxd{7.0, -3.0};
  const double phi = kPi / 4;
  const double root_half = std::sqrt(0.5);
  // z = 1 + 0.5j: margin = (1 - 0.5)/sqrt(2)
  CHECK(ci_margin(h_row, x, cxd{1.0, 0.0}, phi) == doctest::Approx(0.5 * root_half).epsilon(1e-12));
  // Rotating the target by j moves z to 0.5 - 1j: margin = (0.5 - 1)/sqrt(2)
  CHECK(ci_margin(h_row, x, cxd{0.0, 1.0}, phi) == doctest::Approx(-0.5 * root_half).epsilon(1e-12));
  // The sector is symmetric in the imaginary part.
  x(0) = cxd{1.0, -0.5};
  CHECK(ci_margin(h_row, x, cxd{1.0, 0.0}, phi) == doctest::Approx(0.5 * root_half).epsilon(1e-12));
  CHECK_THROWS_AS(ci_margin(h_row, CVec::Zero(3), cxd{1.0, 0.0}, phi), std::invalid_argument);
}

TEST_CASE("stacked constraint rows reproduce the per-symbol margins") {
  std::mt19937_64 rng(11);
  const int n = 5;
  const CMat h = random_channel(rng, n);
  const CVec s = random_psk_targets(rng, n, 4);
  const PrecodeProblem prob = build_precode_problem(h, s, 4, 10.0);
  REQUIRE(prob.t.rows() == 2 * n);

  for (int trial = 0; trial < 5; ++trial) {
    RVec w(2 * n);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 2 * n; ++i) w(i) = g(rng);
    CVec x(n);
    for (int i = 0; i < n; ++i) x(i) = cxd{w(i), w(n + i)};
    const RVec tw = prob.t * w;
    for (int i = 0; i < n; ++i) {
      const double via_rows = std::min(tw(i), tw(n + i));
      const CVec row = h.row(i).transpose();
      CHECK(via_rows == doctest::Approx(ci_margin(row, x, s(i), prob.phi_angle)).epsilon(1e-10));
    }
  }
}

TEST_CASE("problem construction validates its inputs") {
  std::mt19937_64 rng(2);
  const CMat h = random_channel(rng, 3);
  const CVec s = random_psk_targets(rng, 3, 4);
  CHECK_THROWS_AS(build_precode_problem(h, s, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_precode_problem(h, CVec::Zero(2), 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_precode_problem(h, 2.0 * s, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_precode_problem(CMat::Zero(3, 2), s, 4, 1.0), std::invalid_argument);
}

TEST_CASE("identity channel reaches the closed-form margin") {
  for (int q : {4, 8}) {
    const int n = 8;
    std::mt19937_64 rng(40 + q);
    const CVec s = random_psk_targets(rng, n, q);
    const PrecodeSolution sol = slp_precode(CMat::Identity(n, n), s, q, static_cast<double>(n));
    CHECK(sol.converged);
    CHECK(sol.margin == doctest::Approx(std::sin(kPi / q)).epsilon(1e-6));
    // The optimal waveform simply transmits the targets.
    CHECK((sol.x - s).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("margin scales with the square root of the power budget") {
  std::mt19937_64 rng(21);
  const int n = 4;
  const CMat h = random_channel(rng, n);
  const CVec s = random_psk_targets(rng, n, 4);
  const PrecodeSolution a = slp_precode(h, s, 4, 2.0);
  const PrecodeSolution b = slp_precode(h, s, 4, 8.0);
  CHECK((a.delta - b.delta).cwiseAbs().maxCoeff() == 0.0);  // dual unaffected by power
  CHECK(b.margin == doctest::Approx(2.0 * a.margin).epsilon(1e-14));
  CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-14));
}

TEST_CASE("precoded frames meet the power budget exactly and certify their margin") {
  std::mt19937_64 rng(33);
  for (int n : {4, 8}) {
    for (int trial = 0; trial < 5; ++trial) {
      const CMat h = random_channel(rng, n);
      const CVec s = random_psk_targets(rng, n, 4);
      const double power = 3.5;
      const PrecodeSolution sol = slp_precode(h, s, 4, power);
      CHECK(sol.x.squaredNorm() == doctest::Approx(power).epsilon(1e-10));
      CHECK(sol.slack_residual < 1e-5);
      // The achieved worst-case margin matches the dual certificate.
      double worst = 1e300;
      for (int i = 0; i < n; ++i) {
        const CVec row = h.row(i).transpose();
        worst = std::min(worst, ci_margin(row, sol.x, s(i), kPi / 4));
      }
      CHECK(worst == doctest::Approx(sol.margin).epsilon(1e-5));
      CHECK(worst > 0.0);
    }
  }
}

TEST_CASE("zero channel admits no positive margin") {
  const int n = 3;
  CVec s(3);
  s << cxd{1.0, 0.0}, cxd{0.0, 1.0}, cxd{-1.0, 0.0};
  CHECK_THROWS_AS(slp_precode(CMat::Zero(n, n), s, 4, 1.0), std::runtime_error);
  // The dual solve itself reports the degenerate optimum.
  const DualQpResult dual = solve_dual_qp(RMat::Zero(6, 6));
  CHECK(dual.converged);
  CHECK(dual.objective == 0.0);
  CHECK(dual.delta.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dual solve matches the primal bisection oracle") {
  std::mt19937_64 rng(55);
  const double power = 5.0;
  const double root_p = std::sqrt(power);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = (trial < 8) ? 8 : 16;
    const Eigen::MatrixXd t = random_real(rng, d);
    const DualQpResult dual = solve_dual_qp(t);
    REQUIRE(dual.converged);
    const double t_dual = root_p * std::sqrt(dual.objective);
    const test_oracles::PrimalMargin primal = test_oracles::max_margin_bisection(t, power);
    CHECK(t_dual == doctest::Approx(primal.t).epsilon(1e-4));
    // The oracle's waveform is primal feasible at its reported margin.
    CHECK(primal.w.squaredNorm() <= power * (1.0 + 1e-6));
    CHECK((t * primal.w).minCoeff() >= primal.t - 1e-8);
  }
}

TEST_CASE("accelerated and plain projected gradient agree on the optimum") {
  std::mt19937_64 rng(77);
  const Eigen::MatrixXd t = random_real(rng, 8);
  const DualQpResult fista = solve_dual_qp(t);
  REQUIRE(fista.converged);
  const Eigen::VectorXd ref = test_oracles::simplex_pg_reference(t, 300000);
  const double f_ref = (t.transpose() * ref).squaredNorm();
  CHECK(fista.objective == doctest::Approx(f_ref).epsilon(1e-6));
}

TEST_CASE("dual solver handles a hand-solvable problem") {
  // T = I: min ||delta||^2 on the simplex is the uniform point, value 1/d.
  const DualQpResult dual = solve_dual_qp(RMat::Identity(6, 6));
  CHECK(dual.converged);
  CHECK(dual.objective == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
  CHECK((dual.delta - RVec::Constant(6, 1.0 / 6.0)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("dual solver respects iteration and tolerance options") {
  std::mt19937_64 rng(91);
  const Eigen::MatrixXd t = random_real(rng, 8);
  DualQpOptions opts;
  opts.max_iter = 1;
  const DualQpResult one = solve_dual_qp(t, opts);
  CHECK(one.iterations == 1);
  CHECK_FALSE(one.converged);
  CHECK(one.delta.sum() == doctest::Approx(1.0).epsilon(1e-12));  // best iterate is feasible
  opts.max_iter = 0;
  opts.tol = -1.0;
  CHECK_THROWS_AS(solve_dual_qp(t, opts), std::invalid_argument);
  CHECK_THROWS_AS(solve_dual_qp(Eigen::MatrixXd::Zero(4, 2)), std::invalid_argument);
}

TEST_CASE("recover_waveform validates the dual point") {
  std::mt19937_64 rng(8);
  const CMat h = random_channel(rng, 3);
  const CVec s = random_psk_targets(rng, 3, 4);
  const PrecodeProblem prob = build_precode_problem(h, s, 4, 1.0);
  DualQpResult dual;
  dual.delta = RVec::Constant(4, 0.25);  // wrong length: problem wants 6
  CHECK_THROWS_AS(recover_waveform(prob, dual), std::invalid_argument);
}

TEST_CASE("regularized inversion precoder meets the budget and inverts at zero noise") {
  std::mt19937_64 rng(66);
  const int n = 4;
  const CMat h = random_channel(rng, n);
  const CVec s = random_psk_targets(rng, n, 4);
  const double power = 4.0;
  const MmsePrecodeResult res = mmse_precode(h, s, power, 0.1);
  CHECK(res.x.squaredNorm() == doctest::Approx(power).epsilon(1e-10));
  CHECK(res.gamma > 0.0);
  // Zero noise: pure channel inversion, received frame is a scaled target.
  const MmsePrecodeResult zf = mmse_precode(h, s, power, 0.0);
  CHECK((h * zf.x - zf.gamma * s).norm() < 1e-8 * zf.gamma);
  CHECK_THROWS_AS(mmse_precode(h, s, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(mmse_precode(h, CVec::Zero(2), 1.0, 0.1), std::invalid_argument);
}
