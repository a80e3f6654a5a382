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

// Command line front end around the library: single-shot diagnostics
// (estimate, precode), Monte Carlo sweeps (sweep-uplink, sweep-downlink) and
// a quick self-consistency check (selftest).  All outputs are CSV/JSON files
// under --out, plus optional SVG charts.

#include "afdm/channel.hpp"
#include "afdm/constellation.hpp"
#include "afdm/dictionary.hpp"
#include "afdm/experiment.hpp"
#include "afdm/io.hpp"
#include "afdm/metrics.hpp"
#include "afdm/pilot.hpp"
#include "afdm/rng.hpp"
#include "afdm/sbl.hpp"
#include "afdm/slp.hpp"
#include "afdm/transform.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace afdm;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int trials = 0;
  int parallelism = -1;
  bool emit_svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
  cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--trials", opts.trials, "override trials / downlink frames");
  cmd->add_option("--parallelism", opts.parallelism, "override the thread count");
  cmd->add_flag("--emit-svg", opts.emit_svg, "also write SVG charts");
}

ExperimentConfig load_config(const CLI::App* cmd, const CommonOpts& opts) {
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = load_experiment_config(opts.config_path);
  if (cmd->count("--seed") > 0) cfg.seed = opts.seed;
  if (cmd->count("--trials") > 0) {
    cfg.trials = opts.trials;
    cfg.downlink_frames = opts.trials;
  }
  if (cmd->count("--parallelism") > 0) cfg.parallelism = opts.parallelism;
  cfg.check();
  return cfg;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.out_dir);
  return (std::filesystem::path(opts.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  std::printf("wrote %s\n", path.c_str());
}

CVec through_channel(const CVec& x, const ChannelRealization& ch, double sigma2,
                     std::mt19937_64& rng) {
  const CVec r = apply_channel_time(add_cpp(idaft(x, ch.cfg), ch.cfg), ch, sigma2, rng);
  return daft(remove_cpp(r, ch.cfg), ch.cfg);
}

// ---------------------------------------------------------------- estimate

int run_estimate(const CLI::App* cmd, const CommonOpts& opts, double snr_db) {
  const ExperimentConfig cfg = load_config(cmd, opts);
  const AfdmConfig acfg = cfg.afdm();
  const double sigma2 = std::pow(10.0, -snr_db / 10.0);

  std::mt19937_64 rng = trial_rng(cfg.seed, RngStream::kUplink, 0);
  const ChannelRealization ch = sample_channel(rng, acfg, cfg.paths, cfg.l_max,
                                               cfg.alpha_max(), cfg.fractional, cfg.distinct);
  const CMat h_true = effective_channel(ch);

  const CVec x_p = zc_pilot(cfg.n, cfg.pilot_root);
  const CVec y_p = through_channel(x_p, ch, sigma2, rng);
  const Dictionary dict =
      build_dictionary(x_p, acfg, cfg.l_max, cfg.alpha_max(), cfg.grid_density);

  const SblResult sbl = sbl_estimate(y_p, dict, cfg.sbl_hyper());
  const CVec h_omp = omp_estimate(y_p, dict, cfg.paths);

  std::printf("snr_db %.6g  noise_var %.6g  atoms %d%s\n", snr_db, sigma2,
              static_cast<int>(dict.atoms.size()), dict.overcomplete ? " (overcomplete)" : "");
  std::printf("sbl  nmse_db %9.4f  iterations %d  converged %s\n",
              nmse_db(reconstruct_channel(dict, sbl.h), h_true), sbl.iterations,
              sbl.converged ? "yes" : "no");
  std::printf("omp  nmse_db %9.4f\n", nmse_db(reconstruct_channel(dict, h_omp), h_true));

  write_text(out_path(opts, "channel.json"), channel_to_json(ch).dump(2) + "\n");
  write_text(out_path(opts, "sbl_trace.csv"), csv_string(sbl_trace_table(sbl.trace)));
  return 0;
}

// ----------------------------------------------------------------- precode

int run_precode(const CLI::App* cmd, const CommonOpts& opts, double snr_db) {
  const ExperimentConfig cfg = load_config(cmd, opts);
  const AfdmConfig acfg = cfg.afdm();
  const double sigma2 = std::pow(10.0, -snr_db / 10.0);
  const double p_m = cfg.effective_power();

  std::mt19937_64 rng = trial_rng(cfg.seed, RngStream::kDownlink, 0);
  const ChannelRealization ch = sample_channel(rng, acfg, cfg.paths, cfg.l_max,
                                               cfg.alpha_max(), cfg.fractional, cfg.distinct);
  const CMat h = effective_channel(ch);

  std::uniform_int_distribution<int> pos_dist(0, cfg.q - 1);
  std::vector<int> pos(static_cast<std::size_t>(cfg.n));
  CVec s(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    pos[static_cast<std::size_t>(i)] = pos_dist(rng);
    s(i) = psk_point(pos[static_cast<std::size_t>(i)], cfg.q);
  }

  const PrecodeProblem prob = build_precode_problem(h, s, cfg.q, p_m);
  const DualQpResult dual = solve_dual_qp(prob.t, {cfg.qp_tol, 0});
  const PrecodeSolution sol = recover_waveform(prob, dual);
  const MmsePrecodeResult mmse = mmse_precode(h, s, p_m, sigma2);

  std::printf("margin %.6g  dual objective %.6g  iterations %lld  converged %s\n", sol.margin,
              sol.objective, sol.iterations, sol.converged ? "yes" : "no");
  std::printf("slack residual %.3g  power %.6g\n", sol.slack_residual, sol.x.squaredNorm());

  write_text(out_path(opts, "precode.json"), precode_dump_json(prob, sol).dump(2) + "\n");

  ResultTable rx;
  rx.comments = {"received transform-domain samples, one row per symbol slot"};
  rx.columns = {"precoder", "index", "re", "im", "target"};
  const CVec y_slp = through_channel(sol.x, ch, sigma2, rng);
  const CVec y_mmse = through_channel(mmse.x, ch, sigma2, rng) / mmse.gamma;
  for (int i = 0; i < cfg.n; ++i)
    rx.rows.push_back({"slp", std::to_string(i), fmt_g(y_slp(i).real()), fmt_g(y_slp(i).imag()),
                       std::to_string(pos[static_cast<std::size_t>(i)])});
  for (int i = 0; i < cfg.n; ++i)
    rx.rows.push_back({"mmse", std::to_string(i), fmt_g(y_mmse(i).real()),
                       fmt_g(y_mmse(i).imag()), std::to_string(pos[static_cast<std::size_t>(i)])});
  write_text(out_path(opts, "received.csv"), csv_string(rx));
  return 0;
}

// ------------------------------------------------------------------ sweeps

void svg_from_uplink(const CommonOpts& opts, const UplinkResult& res) {
  std::map<std::string, PlotSeries> nmse;
  std::map<std::string, PlotSeries> ber;
  for (const UplinkPoint& p : res.points) {
    if (p.estimator != "perfect" && std::isfinite(p.nmse.mean_db)) {
      nmse[p.estimator].name = p.estimator;
      nmse[p.estimator].x.push_back(p.snr_db);
      nmse[p.estimator].y.push_back(p.nmse.mean_db);
    }
    if (p.ber >= 0.0) {
      ber[p.estimator].name = p.estimator;
      ber[p.estimator].x.push_back(p.snr_db);
      ber[p.estimator].y.push_back(std::log10(std::max(p.ber, 1e-7)));
    }
  }
  std::vector<PlotSeries> ns, bs;
  for (const char* key : {"sbl", "omp", "mmse", "bound"})
    if (nmse.count(key)) ns.push_back(nmse[key]);
  for (const char* key : {"sbl", "omp", "perfect"})
    if (ber.count(key)) bs.push_back(ber[key]);
  write_text(out_path(opts, "uplink_nmse.svg"),
             svg_line_plot("channel estimation error", "snr (dB)", "nmse (dB)", ns));
  write_text(out_path(opts, "uplink_ber.svg"),
             svg_line_plot("uplink bit error rate", "snr (dB)", "log10 ber", bs));
}

int run_sweep_uplink(const CLI::App* cmd, const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(cmd, opts);
  const UplinkResult res = run_uplink_sweep(cfg);
  write_text(out_path(opts, "uplink_nmse.csv"), csv_string(uplink_nmse_table(res)));
  write_text(out_path(opts, "uplink_ber.csv"), csv_string(uplink_ber_table(res)));
  write_text(out_path(opts, "sbl_trace.csv"), csv_string(sbl_trace_table(res.sample_trace)));
  if (opts.emit_svg) svg_from_uplink(opts, res);
  return 0;
}

int run_sweep_downlink(const CLI::App* cmd, const CommonOpts& opts, const std::string& csi) {
  const ExperimentConfig cfg = load_config(cmd, opts);
  CsiMode mode = CsiMode::kPerfect;
  if (csi == "estimated") mode = CsiMode::kEstimated;
  else if (csi == "truncated") mode = CsiMode::kTruncated;
  else if (csi != "perfect") throw std::invalid_argument("unknown csi mode: " + csi);

  const DownlinkResult res = run_downlink_sweep(cfg, mode);
  write_text(out_path(opts, "downlink_ber.csv"), csv_string(downlink_ber_table(res)));
  write_text(out_path(opts, "constellation.csv"), csv_string(constellation_table(res)));
  if (opts.emit_svg) {
    std::map<std::string, PlotSeries> ber;
    for (const DownlinkPoint& p : res.points) {
      if (p.ber < 0.0) continue;
      PlotSeries& s = ber[p.precoder];
      s.name = p.precoder;
      s.x.push_back(p.snr_db);
      s.y.push_back(std::log10(std::max(p.ber, 1e-7)));
    }
    std::vector<PlotSeries> bs;
    for (const char* key : {"slp", "mmse"})
      if (ber.count(key)) bs.push_back(ber[key]);
    write_text(out_path(opts, "downlink_ber.svg"),
               svg_line_plot("downlink bit error rate (" + csi_mode_name(mode) + " csi)",
                             "snr (dB)", "log10 ber", bs));
  }
  return 0;
}

// ---------------------------------------------------------------- selftest

int run_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };
  const AfdmConfig acfg = make_config(64, 3.0 / 128.0, 0.0, 2);
  std::mt19937_64 rng = trial_rng(424242, RngStream::kSelftest, 0);

  {
    bool ok = true;
    for (int t = 0; t < 50 && ok; ++t) {
      CVec x(64);
      for (int i = 0; i < 64; ++i) x(i) = complex_normal(rng, 1.0);
      const CVec back = daft(idaft(x, acfg), acfg);
      ok = (back - x).cwiseAbs().maxCoeff() < 1e-10 &&
           std::abs(idaft(x, acfg).squaredNorm() - x.squaredNorm()) < 1e-8 * x.squaredNorm();
    }
    report("transform round trip and energy", ok);
  }
  {
    bool ok = true;
    std::uniform_real_distribution<double> dop(-1.5, 1.5);
    std::uniform_int_distribution<int> del(0, 2);
    for (int t = 0; t < 20 && ok; ++t) {
      const int l = del(rng);
      const double v = (t % 2 == 0) ? dop(rng) : std::round(dop(rng));
      const CMat a = path_matrix_exact(acfg, l, v);
      const CMat b = path_matrix(acfg, l, v);
      ok = (a - b).cwiseAbs().maxCoeff() < 1e-9;
    }
    report("channel closed forms match the factorized product", ok);
  }
  {
    bool ok = true;
    for (int t = 0; t < 10 && ok; ++t) {
      const ChannelRealization ch = sample_channel(rng, acfg, 3, 2, 0.5, true);
      CVec x(64);
      for (int i = 0; i < 64; ++i) x(i) = complex_normal(rng, 1.0);
      std::mt19937_64 silent(0);
      const CVec via_time =
          daft(remove_cpp(apply_channel_time(add_cpp(idaft(x, acfg), acfg), ch, 0.0, silent),
                          acfg),
               acfg);
      ok = (via_time - effective_channel(ch) * x).cwiseAbs().maxCoeff() < 1e-9;
    }
    report("time pipeline realizes the effective channel", ok);
  }
  {
    bool ok = true;
    for (int q : {2, 4, 8}) {
      std::uniform_int_distribution<int> pd(0, q - 1);
      std::vector<int> pos(256);
      CVec pts(256);
      for (int i = 0; i < 256; ++i) {
        pos[static_cast<std::size_t>(i)] = pd(rng);
        pts(i) = psk_point(pos[static_cast<std::size_t>(i)], q);
      }
      const std::vector<int> back = psk_demodulate(pts, q);
      ok = ok && back == pos;
    }
    report("psk modulation round trip", ok);
  }
  {
    bool ok = true;
    for (int t = 0; t < 5 && ok; ++t) {
      CMat h(8, 8);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) h(r, c) = complex_normal(rng, 1.0);
      std::uniform_int_distribution<int> pd(0, 3);
      CVec s(8);
      for (int i = 0; i < 8; ++i) s(i) = psk_point(pd(rng), 4);
      const PrecodeSolution sol = slp_precode(h, s, 4, 8.0);
      double worst = 1e300;
      for (int i = 0; i < 8; ++i) {
        const CVec row = h.row(i).transpose();
        worst = std::min(worst, ci_margin(row, sol.x, s(i), kPi / 4));
      }
      ok = sol.converged && std::abs(sol.x.squaredNorm() - 8.0) < 1e-8 &&
           std::abs(worst - sol.margin) < 1e-4 * (1.0 + sol.margin);
    }
    report("precoder margin certificates", ok);
  }

  std::printf("%s\n", failures == 0 ? "selftest ok" : "selftest FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AFDM uplink estimation / downlink precoding simulator"};
  app.require_subcommand(1);

  CommonOpts est_opts, pre_opts, up_opts, down_opts;
  double est_snr = 20.0, pre_snr = 20.0;
  std::string csi = "perfect";

  CLI::App* est = app.add_subcommand("estimate", "one pilot estimation trial, with trace");
  add_common(est, est_opts);
  est->add_option("--snr", est_snr, "operating snr in dB")->capture_default_str();

  CLI::App* pre = app.add_subcommand("precode", "one precoded downlink frame, with dump");
  add_common(pre, pre_opts);
  pre->add_option("--snr", pre_snr, "operating snr in dB")->capture_default_str();

  CLI::App* up = app.add_subcommand("sweep-uplink", "Monte Carlo estimation sweep");
  add_common(up, up_opts);

  CLI::App* down = app.add_subcommand("sweep-downlink", "Monte Carlo precoding sweep");
  add_common(down, down_opts);
  down->add_option("--csi", csi, "perfect | estimated | truncated")->capture_default_str();

  app.add_subcommand("selftest", "quick internal consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return run_estimate(est, est_opts, est_snr);
    if (pre->parsed()) return run_precode(pre, pre_opts, pre_snr);
    if (up->parsed()) return run_sweep_uplink(up, up_opts);
    if (down->parsed()) return run_sweep_downlink(down, down_opts, csi);
    return run_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
