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

#include "afdm/experiment.hpp"

#include "afdm/constellation.hpp"
#include "afdm/dictionary.hpp"
#include "afdm/pilot.hpp"
#include "afdm/rng.hpp"
#include "afdm/slp.hpp"
#include "afdm/transform.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace afdm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long long kTrialStride = 1'000'000;

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Transform-domain frame through the full time-domain pipeline.
CVec transmit_through(const CVec& x_af, const ChannelRealization& ch, double noise_var,
                      std::mt19937_64& rng) {
  const CVec s = idaft(x_af, ch.cfg);
  const CVec r = apply_channel_time(add_cpp(s, ch.cfg), ch, noise_var, rng);
  return daft(remove_cpp(r, ch.cfg), ch.cfg);
}

// Diagonal oracle prior: 1/paths at the grid atom nearest each true tap
// (same delay, closest Doppler), a small floor elsewhere.
CMat genie_prior(const Dictionary& dict, const ChannelRealization& ch, int paths) {
  const int m = static_cast<int>(dict.atoms.size());
  CMat r = CMat::Zero(m, m);
  for (const PathTap& tap : ch.taps) {
    int best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      const DictionaryAtom& atom = dict.atoms[static_cast<std::size_t>(j)];
      if (atom.delay != tap.delay) continue;
      const double gap = std::abs(atom.doppler - tap.doppler);
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best < 0) throw std::runtime_error("genie prior: tap delay outside dictionary");
    r(best, best) += cxd{1.0 / paths, 0.0};
  }
  for (int j = 0; j < m; ++j)
    if (r(j, j).real() < 1e-12) r(j, j) = cxd{1e-12, 0.0};
  return r;
}

std::vector<int> draw_positions(std::mt19937_64& rng, int count, int q) {
  std::uniform_int_distribution<int> dist(0, q - 1);
  std::vector<int> pos(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pos[static_cast<std::size_t>(i)] = dist(rng);
  return pos;
}

CVec positions_to_symbols(const std::vector<int>& pos, int q) {
  CVec s(static_cast<Eigen::Index>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i)
    s(static_cast<Eigen::Index>(i)) = psk_point(pos[i], q);
  return s;
}

long long count_bit_errors(const std::vector<int>& decided, const std::vector<int>& truth) {
  long long errs = 0;
  for (std::size_t i = 0; i < decided.size(); ++i)
    errs += std::popcount(gray_encode(static_cast<unsigned>(decided[i])) ^
                          gray_encode(static_cast<unsigned>(truth[i])));
  return errs;
}

}  // namespace

SblHyperConfig ExperimentConfig::sbl_hyper() const {
  SblHyperConfig hyper;
  hyper.a = sbl_a;
  hyper.b = sbl_b;
  hyper.nu0 = sbl_nu0;
  hyper.epsilon = sbl_epsilon;
  hyper.n_max = sbl_n_max;
  hyper.combination_delta = eta > 0.0 ? static_cast<int>(std::lround(eta * paths)) : 0;
  return hyper;
}

void ExperimentConfig::check() const {
  validate(afdm());  // n, c1, c2, prefix coherence
  psk_bits_per_symbol(q);
  if (frame_len < 1) throw std::invalid_argument("config: frame_len must be >= 1");
  if (pilot_root < 1 || pilot_root >= n || std::gcd(pilot_root, n) != 1)
    throw std::invalid_argument("config: pilot_root must be coprime with n and in [1, n)");
  if (paths < 1) throw std::invalid_argument("config: paths must be >= 1");
  if (l_max < 0 || l_max >= n) throw std::invalid_argument("config: l_max must lie in [0, n)");
  if (!(v_max_kmh >= 0.0) || !(fc_hz > 0.0) || !(delta_f_hz > 0.0))
    throw std::invalid_argument("config: bad physical channel parameters");
  if (grid_density < 1) throw std::invalid_argument("config: grid_density must be >= 1");
  if (eta != 0.0 && !(eta > 1.0))
    throw std::invalid_argument("config: eta must be 0 (keep all) or > 1");
  if (!(sbl_a > 0.0) || !(sbl_b > 0.0)) throw std::invalid_argument("config: sbl a, b must be > 0");
  if (!(sbl_nu0 > 0.0)) throw std::invalid_argument("config: sbl nu0 must be > 0");
  if (!(sbl_epsilon >= 0.0)) throw std::invalid_argument("config: sbl epsilon must be >= 0");
  if (sbl_n_max < 1) throw std::invalid_argument("config: sbl n_max must be >= 1");
  if (power >= 0.0 && !(power > 0.0))
    throw std::invalid_argument("config: power must be > 0 (or negative for the default n)");
  if (!(qp_tol > 0.0)) throw std::invalid_argument("config: qp_tol must be > 0");
  if (snr_db.empty() || snr_db.size() > 1000)
    throw std::invalid_argument("config: snr_db must hold 1..1000 points");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw std::invalid_argument("config: snr_db must be finite");
  if (trials < 1 || trials > kTrialStride)
    throw std::invalid_argument("config: trials out of range");
  if (downlink_frames < 1 || downlink_frames > kTrialStride)
    throw std::invalid_argument("config: downlink_frames out of range");
  if (parallelism < 0) throw std::invalid_argument("config: parallelism must be >= 0");
}

namespace {

struct UplinkTrialOut {
  bool ok = false;
  bool excluded = false;
  double r_sbl = 0.0, r_omp = 0.0, r_mmse = 0.0, r_bound = 0.0;
  long long e_sbl = 0, e_omp = 0, e_perfect = 0, bits = 0;
  std::vector<SblTraceRow> trace;  // filled only when requested
};

UplinkTrialOut run_uplink_trial(const ExperimentConfig& cfg, const AfdmConfig& acfg,
                                const Dictionary& dict, const SblHyperConfig& hyper,
                                const CVec& x_p, double sigma2, std::mt19937_64 rng,
                                bool want_trace) {
  UplinkTrialOut out;
  const ChannelRealization ch =
      sample_channel(rng, acfg, cfg.paths, cfg.l_max, cfg.alpha_max(), cfg.fractional,
                     cfg.distinct);
  const CMat h_true = effective_channel(ch);
  const CVec y_p = transmit_through(x_p, ch, sigma2, rng);

  SblResult sbl;
  try {
    sbl = sbl_estimate(y_p, dict, hyper);
  } catch (const SblDivergenceError&) {
    out.excluded = true;
    return out;
  }
  if (want_trace) out.trace = sbl.trace;

  const CMat h_sbl = reconstruct_channel(dict, sbl.h);
  const CMat h_omp = reconstruct_channel(dict, omp_estimate(y_p, dict, cfg.paths));

  const CMat r_h = genie_prior(dict, ch, cfg.paths);
  const CMat r_w = sigma2 * CMat::Identity(acfg.n, acfg.n);
  const CMat h_mmse = reconstruct_channel(dict, mmse_estimate(y_p, dict.phi, r_h, r_w));
  const double bound = bcrlb(dict.phi, r_h, r_w);

  out.r_sbl = nmse_ratio(h_sbl, h_true);
  out.r_omp = nmse_ratio(h_omp, h_true);
  out.r_mmse = nmse_ratio(h_mmse, h_true);
  out.r_bound = bound / (h_true * x_p).squaredNorm();

  for (int d = 1; d < cfg.frame_len; ++d) {
    const std::vector<int> pos = draw_positions(rng, cfg.n, cfg.q);
    const CVec s = positions_to_symbols(pos, cfg.q);
    const CVec y_d = transmit_through(s, ch, sigma2, rng);
    out.e_sbl += count_bit_errors(psk_demodulate(mmse_equalize(y_d, h_sbl, sigma2), cfg.q), pos);
    out.e_omp += count_bit_errors(psk_demodulate(mmse_equalize(y_d, h_omp, sigma2), cfg.q), pos);
    out.e_perfect +=
        count_bit_errors(psk_demodulate(mmse_equalize(y_d, h_true, sigma2), cfg.q), pos);
    out.bits += static_cast<long long>(cfg.n) * psk_bits_per_symbol(cfg.q);
  }
  out.ok = true;
  return out;
}

}  // namespace

UplinkResult run_uplink_sweep(const ExperimentConfig& cfg) {
  cfg.check();
  const AfdmConfig acfg = cfg.afdm();
  const CVec x_p = zc_pilot(cfg.n, cfg.pilot_root);
  const Dictionary dict =
      build_dictionary(x_p, acfg, cfg.l_max, cfg.alpha_max(), cfg.grid_density);
  const SblHyperConfig hyper = cfg.sbl_hyper();
  if (hyper.combination_delta > static_cast<int>(dict.atoms.size()))
    throw std::invalid_argument("config: eta * paths exceeds the dictionary size");

  const int nt = resolve_threads(cfg.parallelism);
  UplinkResult out;

  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double sigma2 = std::pow(10.0, -cfg.snr_db[si] / 10.0);
    std::vector<UplinkTrialOut> slots(static_cast<std::size_t>(cfg.trials));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nt)
#endif
    for (int t = 0; t < cfg.trials; ++t) {
      std::mt19937_64 rng = trial_rng(cfg.seed, RngStream::kUplink,
                                      static_cast<std::uint64_t>(si) * kTrialStride +
                                          static_cast<std::uint64_t>(t));
      slots[static_cast<std::size_t>(t)] =
          run_uplink_trial(cfg, acfg, dict, hyper, x_p, sigma2, std::move(rng),
                           si == 0 && t == 0);
    }
    (void)nt;

    std::vector<double> rs, ro, rm, rb;
    long long e_sbl = 0, e_omp = 0, e_perf = 0, bits = 0;
    int used = 0, excluded = 0;
    for (const UplinkTrialOut& s : slots) {
      if (s.excluded) {
        ++excluded;
        continue;
      }
      ++used;
      rs.push_back(s.r_sbl);
      ro.push_back(s.r_omp);
      rm.push_back(s.r_mmse);
      rb.push_back(s.r_bound);
      e_sbl += s.e_sbl;
      e_omp += s.e_omp;
      e_perf += s.e_perfect;
      bits += s.bits;
      if (!s.trace.empty() && out.sample_trace.empty()) out.sample_trace = s.trace;
    }

    auto agg = [&](const std::vector<double>& r) {
      return r.empty() ? MeanDb{kNaN, kNaN} : nmse_aggregate(r);
    };
    auto berv = [&](long long e) {
      return bits > 0 ? static_cast<double>(e) / static_cast<double>(bits) : -1.0;
    };
    const double snr = cfg.snr_db[si];
    out.points.push_back({snr, "sbl", agg(rs), berv(e_sbl), bits, used, excluded});
    out.points.push_back({snr, "omp", agg(ro), berv(e_omp), bits, used, excluded});
    out.points.push_back({snr, "mmse", agg(rm), -1.0, 0, used, excluded});
    out.points.push_back({snr, "bound", agg(rb), -1.0, 0, used, excluded});
    out.points.push_back({snr, "perfect", MeanDb{kNaN, kNaN}, berv(e_perf), bits, used, excluded});
  }
  return out;
}

std::string csi_mode_name(CsiMode mode) {
  switch (mode) {
    case CsiMode::kPerfect: return "perfect";
    case CsiMode::kEstimated: return "estimated";
    case CsiMode::kTruncated: return "truncated";
  }
  return "unknown";
}

namespace {

struct DownlinkFrameOut {
  bool ex_slp = false, ex_mmse = false, ex_frame = false;
  long long e_slp = 0, e_mmse = 0;
  std::vector<ConstellationSample> samples;
};

}  // namespace

DownlinkResult run_downlink_sweep(const ExperimentConfig& cfg, CsiMode mode) {
  cfg.check();
  const AfdmConfig acfg = cfg.afdm();
  const double p_m = cfg.effective_power();
  const int bps = psk_bits_per_symbol(cfg.q);
  constexpr int kConstellationFrames = 2;

  // Estimation machinery is only needed when CSI comes from the pilot loop.
  CVec x_p;
  Dictionary dict;
  SblHyperConfig hyper;
  if (mode == CsiMode::kEstimated) {
    x_p = zc_pilot(cfg.n, cfg.pilot_root);
    dict = build_dictionary(x_p, acfg, cfg.l_max, cfg.alpha_max(), cfg.grid_density);
    hyper = cfg.sbl_hyper();
    if (hyper.combination_delta > static_cast<int>(dict.atoms.size()))
      throw std::invalid_argument("config: eta * paths exceeds the dictionary size");
  }

  const int nt = resolve_threads(cfg.parallelism);
  DownlinkResult out;

  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double sigma2 = std::pow(10.0, -cfg.snr_db[si] / 10.0);
    const double snr = cfg.snr_db[si];
    std::vector<DownlinkFrameOut> slots(static_cast<std::size_t>(cfg.downlink_frames));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nt)
#endif
    for (int f = 0; f < cfg.downlink_frames; ++f) {
      DownlinkFrameOut& slot = slots[static_cast<std::size_t>(f)];
      std::mt19937_64 rng = trial_rng(cfg.seed, RngStream::kDownlink,
                                      static_cast<std::uint64_t>(si) * kTrialStride +
                                          static_cast<std::uint64_t>(f));
      const ChannelRealization ch =
          sample_channel(rng, acfg, cfg.paths, cfg.l_max, cfg.alpha_max(), cfg.fractional,
                         cfg.distinct);
      const CMat h_true = effective_channel(ch);

      CMat h_csi;
      if (mode == CsiMode::kPerfect) {
        h_csi = h_true;
      } else if (mode == CsiMode::kTruncated) {
        h_csi = truncated_channel(ch, cfg.effective_k_v());
      } else {
        const CVec y_p = transmit_through(x_p, ch, sigma2, rng);
        try {
          const SblResult est = sbl_estimate(y_p, dict, hyper);
          h_csi = reconstruct_channel(dict, est.h);
        } catch (const SblDivergenceError&) {
          slot.ex_frame = true;
          continue;
        }
      }

      const std::vector<int> pos = draw_positions(rng, cfg.n, cfg.q);
      const CVec s = positions_to_symbols(pos, cfg.q);

      try {
        const PrecodeSolution sol = slp_precode(h_csi, s, cfg.q, p_m, {cfg.qp_tol, 0});
        const CVec y = transmit_through(sol.x, ch, sigma2, rng);
        slot.e_slp += count_bit_errors(psk_demodulate(y, cfg.q), pos);
        if (f < kConstellationFrames)
          for (int i = 0; i < cfg.n; ++i)
            slot.samples.push_back({snr, "slp", y(i).real(), y(i).imag(), pos[static_cast<std::size_t>(i)]});
      } catch (const std::runtime_error&) {
        slot.ex_slp = true;
      }

      try {
        const MmsePrecodeResult pre = mmse_precode(h_csi, s, p_m, sigma2);
        const CVec y = transmit_through(pre.x, ch, sigma2, rng) / pre.gamma;
        slot.e_mmse += count_bit_errors(psk_demodulate(y, cfg.q), pos);
        if (f < kConstellationFrames)
          for (int i = 0; i < cfg.n; ++i)
            slot.samples.push_back({snr, "mmse", y(i).real(), y(i).imag(), pos[static_cast<std::size_t>(i)]});
      } catch (const std::runtime_error&) {
        slot.ex_mmse = true;
      }
    }
    (void)nt;

    long long e_slp = 0, e_mmse = 0, ex_slp = 0, ex_mmse = 0, ok_slp = 0, ok_mmse = 0;
    for (const DownlinkFrameOut& s : slots) {
      if (s.ex_frame) {
        ++ex_slp;
        ++ex_mmse;
        continue;
      }
      if (s.ex_slp) {
        ++ex_slp;
      } else {
        e_slp += s.e_slp;
        ++ok_slp;
      }
      if (s.ex_mmse) {
        ++ex_mmse;
      } else {
        e_mmse += s.e_mmse;
        ++ok_mmse;
      }
      for (const ConstellationSample& c : s.samples) out.constellation.push_back(c);
    }
    const std::string csi = csi_mode_name(mode);
    auto berv = [&](long long errs, long long frames) {
      const long long bits = frames * cfg.n * bps;
      return bits > 0 ? static_cast<double>(errs) / static_cast<double>(bits) : -1.0;
    };
    out.points.push_back({snr, "slp", csi, berv(e_slp, ok_slp), ok_slp * cfg.n, ex_slp});
    out.points.push_back({snr, "mmse", csi, berv(e_mmse, ok_mmse), ok_mmse * cfg.n, ex_mmse});
  }
  return out;
}

}  // namespace afdm
