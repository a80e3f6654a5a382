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
#include "afdm/io.hpp"
#include "afdm/rng.hpp"
#include "afdm/transform.hpp"

#include <doctest.h>

#include <random>

using namespace afdm;

namespace {

const AfdmConfig kCfg = make_config(64, 3.0 / 128.0, 0.0, 2);

CVec random_cvec(std::mt19937_64& rng, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_normal(rng, 1.0);
  return v;
}

// Noiseless end-to-end propagation in the transform domain.
CVec pipeline(const CVec& x, const ChannelRealization& ch) {
  std::mt19937_64 dummy(0);
  const CVec r = apply_channel_time(add_cpp(idaft(x, ch.cfg), ch.cfg), ch, 0.0, dummy);
  return daft(remove_cpp(r, ch.cfg), ch.cfg);
}

}  // namespace

TEST_CASE("integer closed form equals the factorized product") {
  for (int delay : {0, 1, 2}) {
    for (long long dop : {-1LL, 0LL, 1LL}) {
      const CMat exact = path_matrix_exact(kCfg, delay, static_cast<double>(dop));
      const CMat closed = path_matrix_integer(kCfg, delay, dop);
      CHECK((exact - closed).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("fractional closed form equals the factorized product") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dop(-1.0, 1.0);
  std::uniform_int_distribution<int> del(0, 2);
  for (int trial = 0; trial < 25; ++trial) {
    const int delay = del(rng);
    const double v = dop(rng);
    const CMat exact = path_matrix_exact(kCfg, delay, v);
    const CMat closed = path_matrix_fractional(kCfg, delay, v);
    CHECK((exact - closed).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("fractional form degenerates to the integer form at grid points") {
  for (int delay : {0, 2}) {
    for (long long dop : {-1LL, 0LL, 1LL}) {
      const CMat a = path_matrix_fractional(kCfg, delay, static_cast<double>(dop));
      const CMat b = path_matrix_integer(kCfg, delay, dop);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  // Dispatch continuity just off the grid point.
  const CMat near = path_matrix(kCfg, 1, 1.0 + 5e-13);
  const CMat at = path_matrix_integer(kCfg, 1, 1);
  CHECK((near - at).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("unit-gain path matrices are unitary") {
  for (double v : {0.0, 0.37, -0.82}) {
    const CMat h = path_matrix(kCfg, 1, v);
    CHECK((h * h.adjoint() - CMat::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("integer path matrix has one unit entry per row on the shifted diagonal") {
  const int delay = 2;
  const long long dop = -1;
  const CMat h = path_matrix_integer(kCfg, delay, dop);
  const long long loc = dop + 3LL * delay;  // 2*n*c1 = 3
  for (int p = 0; p < 64; ++p) {
    int nonzeros = 0;
    for (int q = 0; q < 64; ++q) {
      if (std::abs(h(p, q)) > 0.0) {
        ++nonzeros;
        CHECK(q == static_cast<int>((((p + loc) % 64) + 64) % 64));
        CHECK(std::abs(std::abs(h(p, q)) - 1.0) < 1e-12);
      }
    }
    CHECK(nonzeros == 1);
  }
}

TEST_CASE("time-domain pipeline realizes the effective channel") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 0.5, true);
    const CMat h = effective_channel(ch);
    const CVec x = random_cvec(rng, 64);
    const CVec via_time = pipeline(x, ch);
    CHECK((via_time - h * x).cwiseAbs().maxCoeff() < 1e-9);
  }
  // Integer-Doppler channels as well.
  for (int trial = 0; trial < 5; ++trial) {
    const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 1.5, false);
    const CMat h = effective_channel(ch);
    const CVec x = random_cvec(rng, 64);
    CHECK((pipeline(x, ch) - h * x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("truncation with k=0 keeps exactly the integer support") {
  const ChannelRealization ch{kCfg, {{cxd{0.8, -0.3}, 1, 1.0}, {cxd{-0.2, 0.5}, 2, -1.0}}};
  const CMat full = effective_channel(ch);
  const CMat trunc = truncated_channel(ch, 0);
  CHECK((trunc - full).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("truncation bands nest and recover the full channel") {
  std::mt19937_64 rng(31);
  const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 0.5, true);
  const CMat full = effective_channel(ch);
  CHECK((truncated_channel(ch, 32) - full).cwiseAbs().maxCoeff() < 1e-12);

  double prev_err = 1e300;
  for (int k : {0, 1, 2, 4, 8, 16, 32}) {
    const double err = (truncated_channel(ch, k) - full).norm();
    CHECK(err <= prev_err + 1e-12);  // wider band never increases the residual
    prev_err = err;
  }
}

TEST_CASE("apply_channel_time validates delays and lengths") {
  std::mt19937_64 rng(1);
  const ChannelRealization bad{kCfg, {{cxd{1.0, 0.0}, 3, 0.0}}};  // delay 3 > prefix 2
  CHECK_THROWS_AS(apply_channel_time(CVec::Zero(66), bad, 0.0, rng), std::domain_error);
  const ChannelRealization ok{kCfg, {{cxd{1.0, 0.0}, 1, 0.0}}};
  CHECK_THROWS_AS(apply_channel_time(CVec::Zero(64), ok, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(apply_channel_time(CVec::Zero(66), ok, -1.0, rng), std::invalid_argument);
}

TEST_CASE("injected noise has the requested variance") {
  std::mt19937_64 rng(77);
  const ChannelRealization ch{kCfg, {{cxd{1.0, 0.0}, 0, 0.0}}};
  const double sigma2 = 0.04;
  double acc = 0.0;
  long long count = 0;
  const CVec silent = CVec::Zero(66);
  for (int rep = 0; rep < 2000; ++rep) {
    const CVec r = apply_channel_time(silent, ch, sigma2, rng);
    acc += r.squaredNorm();
    count += r.size();
  }
  const double emp = acc / static_cast<double>(count);
  CHECK(emp == doctest::Approx(sigma2).epsilon(0.05));
}

TEST_CASE("sampled taps follow the configured distributions") {
  std::mt19937_64 rng(101);
  double power = 0.0;
  int n_taps = 0;
  for (int rep = 0; rep < 40000; ++rep) {
    const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 0.154321, true);
    REQUIRE(ch.taps.size() == 3);
    for (const PathTap& t : ch.taps) {
      CHECK(t.delay >= 0);
      CHECK(t.delay <= 2);
      CHECK(std::abs(t.doppler) <= 0.154321);
      power += std::norm(t.gain);
      ++n_taps;
    }
  }
  // E|gain|^2 = 1/paths
  CHECK(power / n_taps == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("integer sampling mode rounds the Doppler to whole bins") {
  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 200; ++rep) {
    const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 1.7, false);
    for (const PathTap& t : ch.taps) {
      CHECK(t.doppler == std::nearbyint(t.doppler));
      CHECK(std::abs(t.doppler) <= 2.0);
    }
  }
}

TEST_CASE("distinct mode forbids coincident delay-Doppler pairs") {
  std::mt19937_64 rng(13);
  bool saw_collision_without_flag = false;
  for (int rep = 0; rep < 300; ++rep) {
    const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 0.4, false, true);
    for (std::size_t i = 0; i < ch.taps.size(); ++i)
      for (std::size_t j = i + 1; j < ch.taps.size(); ++j)
        CHECK((ch.taps[i].delay != ch.taps[j].delay ||
               ch.taps[i].doppler != ch.taps[j].doppler));
  }
  for (int rep = 0; rep < 300; ++rep) {
    const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 0.4, false, false);
    for (std::size_t i = 0; i < ch.taps.size(); ++i)
      for (std::size_t j = i + 1; j < ch.taps.size(); ++j)
        if (ch.taps[i].delay == ch.taps[j].delay && ch.taps[i].doppler == ch.taps[j].doppler)
          saw_collision_without_flag = true;
  }
  CHECK(saw_collision_without_flag);  // the default sampler permits collisions
  // Impossible distinctness request fails loudly.
  CHECK_THROWS_AS(sample_channel(rng, kCfg, 5, 0, 0.0, false, true), std::runtime_error);
}

TEST_CASE("channel serialization round trip") {
  std::mt19937_64 rng(19);
  const ChannelRealization ch = sample_channel(rng, kCfg, 3, 2, 0.5, true);
  const ChannelRealization back = channel_from_json(channel_to_json(ch));
  CHECK(back.cfg.n == ch.cfg.n);
  CHECK(back.cfg.c1 == ch.cfg.c1);
  CHECK(back.cfg.cpp_len == ch.cfg.cpp_len);
  REQUIRE(back.taps.size() == ch.taps.size());
  for (std::size_t i = 0; i < ch.taps.size(); ++i) {
    CHECK(back.taps[i].gain == ch.taps[i].gain);
    CHECK(back.taps[i].delay == ch.taps[i].delay);
    CHECK(back.taps[i].doppler == ch.taps[i].doppler);
  }
  CHECK_THROWS_AS(channel_from_json(nlohmann::json::object()), std::invalid_argument);
  nlohmann::json bad = channel_to_json(ch);
  bad["taps"][0]["delay"] = 99;
  CHECK_THROWS_AS(channel_from_json(bad), std::invalid_argument);
}

TEST_CASE("physical Doppler normalization matches the design numbers") {
  CHECK(alpha_max_normalized(625.0, 4.0e9, 15.0e3) == doctest::Approx(0.15432).epsilon(1e-4));
  CHECK(alpha_max_normalized(0.0, 4.0e9, 15.0e3) == 0.0);
  CHECK_THROWS_AS(alpha_max_normalized(10.0, -1.0, 15.0e3), std::invalid_argument);
}
