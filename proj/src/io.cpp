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

#include "afdm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace afdm {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

static std::string fmt_i(long long v) { return std::to_string(v); }

std::string csv_string(const ResultTable& table) {
  std::string out;
  for (const std::string& c : table.comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("csv_string: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_csv_file(const std::string& path, const ResultTable& table) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << csv_string(table);
  if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

const char* kSnrComment =
    "snr_db is relative to unit average transmit power per time-domain sample; "
    "noise variance per complex sample is 10^(-snr_db/10)";

}  // namespace

ResultTable uplink_nmse_table(const UplinkResult& res) {
  ResultTable t;
  t.comments = {"channel estimation accuracy, mean error ratio in dB with delta-method stderr",
                "estimator 'bound' is the Bayesian lower bound normalized by received pilot power",
                kSnrComment};
  t.columns = {"snr_db", "estimator", "nmse_db", "stderr_db", "trials_used", "trials_excluded"};
  for (const UplinkPoint& p : res.points) {
    if (p.estimator == "perfect") continue;  // BER-only row
    t.rows.push_back({fmt_g(p.snr_db), p.estimator, fmt_g(p.nmse.mean_db),
                      fmt_g(p.nmse.stderr_db), fmt_i(p.trials_used), fmt_i(p.trials_excluded)});
  }
  return t;
}

ResultTable uplink_ber_table(const UplinkResult& res) {
  ResultTable t;
  t.comments = {"uplink bit error rate after linear equalization with the named channel estimate",
                kSnrComment};
  t.columns = {"snr_db", "scheme", "ber", "bits"};
  for (const UplinkPoint& p : res.points) {
    if (p.ber < 0.0) continue;
    t.rows.push_back({fmt_g(p.snr_db), p.estimator, fmt_g(p.ber), fmt_i(p.bits)});
  }
  return t;
}

ResultTable downlink_ber_table(const DownlinkResult& res) {
  ResultTable t;
  t.comments = {"downlink bit error rate by precoder and CSI source", kSnrComment};
  t.columns = {"snr_db", "precoder", "csi", "ber", "symbols", "excluded_frames"};
  for (const DownlinkPoint& p : res.points)
    t.rows.push_back({fmt_g(p.snr_db), p.precoder, p.csi, fmt_g(p.ber), fmt_i(p.symbols),
                      fmt_i(p.excluded_frames)});
  return t;
}

ResultTable constellation_table(const DownlinkResult& res) {
  ResultTable t;
  t.comments = {"received constellation samples (post-equalization for the linear precoder)",
                kSnrComment};
  t.columns = {"snr_db", "precoder", "re", "im", "target"};
  for (const ConstellationSample& c : res.constellation)
    t.rows.push_back({fmt_g(c.snr_db), c.precoder, fmt_g(c.re), fmt_g(c.im),
                      fmt_i(c.target)});
  return t;
}

ResultTable sbl_trace_table(const std::vector<SblTraceRow>& trace) {
  ResultTable t;
  t.comments = {"per-iteration EM diagnostics"};
  t.columns = {"iteration", "mu_norm", "alpha_step_sq", "beta", "lambda", "nu"};
  for (const SblTraceRow& r : trace)
    t.rows.push_back({fmt_i(r.iteration), fmt_g(r.mu_norm), fmt_g(r.alpha_step_sq),
                      fmt_g(r.beta), fmt_g(r.lambda), fmt_g(r.nu)});
  return t;
}

nlohmann::json channel_to_json(const ChannelRealization& ch) {
  nlohmann::json j;
  j["config"] = {{"n", ch.cfg.n}, {"c1", ch.cfg.c1}, {"c2", ch.cfg.c2},
                 {"cpp_len", ch.cfg.cpp_len}};
  j["taps"] = nlohmann::json::array();
  for (const PathTap& tap : ch.taps)
    j["taps"].push_back({{"gain_re", tap.gain.real()},
                         {"gain_im", tap.gain.imag()},
                         {"delay", tap.delay},
                         {"doppler", tap.doppler}});
  return j;
}

ChannelRealization channel_from_json(const nlohmann::json& j) {
  try {
    ChannelRealization ch;
    const auto& c = j.at("config");
    ch.cfg = make_config(c.at("n").get<int>(), c.at("c1").get<double>(),
                         c.at("c2").get<double>(), c.at("cpp_len").get<int>());
    for (const auto& t : j.at("taps")) {
      PathTap tap;
      tap.gain = {t.at("gain_re").get<double>(), t.at("gain_im").get<double>()};
      tap.delay = t.at("delay").get<int>();
      tap.doppler = t.at("doppler").get<double>();
      if (tap.delay < 0 || tap.delay >= ch.cfg.n)
        throw std::invalid_argument("channel record: delay out of range");
      if (!std::isfinite(tap.doppler))
        throw std::invalid_argument("channel record: doppler must be finite");
      ch.taps.push_back(tap);
    }
    return ch;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("channel record: ") + e.what());
  }
}

nlohmann::json precode_dump_json(const PrecodeProblem& prob, const PrecodeSolution& sol) {
  nlohmann::json j;
  j["q"] = prob.q;
  j["power"] = prob.power;
  j["phi_angle"] = prob.phi_angle;
  auto cvec = [](const CVec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      a.push_back({{"re", v(i).real()}, {"im", v(i).imag()}});
    return a;
  };
  j["s"] = cvec(prob.s);
  j["x"] = cvec(sol.x);
  nlohmann::json t_rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < prob.t.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < prob.t.cols(); ++c) row.push_back(prob.t(r, c));
    t_rows.push_back(row);
  }
  j["t"] = t_rows;
  j["delta"] = std::vector<double>(sol.delta.data(), sol.delta.data() + sol.delta.size());
  j["w"] = std::vector<double>(sol.w.data(), sol.w.data() + sol.w.size());
  j["margin"] = sol.margin;
  j["objective"] = sol.objective;
  j["slack_residual"] = sol.slack_residual;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  return j;
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& dst, const std::string& ctx) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(dst);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(ctx + ": key '" + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_object()) throw std::invalid_argument(ctx + ": top level must be an object");

  static const std::set<std::string> known{
      "n", "c2", "q", "frame_len", "pilot_root", "paths", "l_max", "v_max_kmh",
      "fc_hz", "delta_f_hz", "fractional", "distinct", "grid_density", "eta", "sbl",
      "power", "qp_tol", "k_v", "snr_db", "trials", "downlink_frames", "seed",
      "parallelism"};
  for (const auto& item : j.items())
    if (known.find(item.key()) == known.end())
      throw std::invalid_argument(ctx + ": unknown key '" + item.key() + "'");

  ExperimentConfig cfg;
  take(j, "n", cfg.n, ctx);
  take(j, "c2", cfg.c2, ctx);
  take(j, "q", cfg.q, ctx);
  take(j, "frame_len", cfg.frame_len, ctx);
  take(j, "pilot_root", cfg.pilot_root, ctx);
  take(j, "paths", cfg.paths, ctx);
  take(j, "l_max", cfg.l_max, ctx);
  take(j, "v_max_kmh", cfg.v_max_kmh, ctx);
  take(j, "fc_hz", cfg.fc_hz, ctx);
  take(j, "delta_f_hz", cfg.delta_f_hz, ctx);
  take(j, "fractional", cfg.fractional, ctx);
  take(j, "distinct", cfg.distinct, ctx);
  take(j, "grid_density", cfg.grid_density, ctx);
  take(j, "qp_tol", cfg.qp_tol, ctx);
  take(j, "snr_db", cfg.snr_db, ctx);
  take(j, "trials", cfg.trials, ctx);
  take(j, "downlink_frames", cfg.downlink_frames, ctx);
  take(j, "seed", cfg.seed, ctx);
  take(j, "parallelism", cfg.parallelism, ctx);

  if (j.contains("eta")) {
    const auto& e = j.at("eta");
    if (e.is_string() && e.get<std::string>() == "all")
      cfg.eta = 0.0;
    else if (e.is_number())
      cfg.eta = e.get<double>();
    else
      throw std::invalid_argument(ctx + ": key 'eta' must be a number or \"all\"");
  }
  if (j.contains("power")) {
    const auto& p = j.at("power");
    if (p.is_string() && p.get<std::string>() == "n")
      cfg.power = -1.0;
    else if (p.is_number())
      cfg.power = p.get<double>();
    else
      throw std::invalid_argument(ctx + ": key 'power' must be a number or \"n\"");
  }
  if (j.contains("k_v")) {
    const auto& k = j.at("k_v");
    if (k.is_string() && k.get<std::string>() == "full")
      cfg.k_v = -1;
    else if (k.is_number_integer())
      cfg.k_v = k.get<int>();
    else
      throw std::invalid_argument(ctx + ": key 'k_v' must be an integer or \"full\"");
  }
  if (j.contains("sbl")) {
    const auto& s = j.at("sbl");
    if (!s.is_object()) throw std::invalid_argument(ctx + ": key 'sbl' must be an object");
    static const std::set<std::string> sbl_known{"a", "b", "nu0", "epsilon", "n_max"};
    for (const auto& item : s.items())
      if (sbl_known.find(item.key()) == sbl_known.end())
        throw std::invalid_argument(ctx + ": unknown key 'sbl." + item.key() + "'");
    take(s, "a", cfg.sbl_a, ctx + " (sbl)");
    take(s, "b", cfg.sbl_b, ctx + " (sbl)");
    take(s, "nu0", cfg.sbl_nu0, ctx + " (sbl)");
    take(s, "epsilon", cfg.sbl_epsilon, ctx + " (sbl)");
    take(s, "n_max", cfg.sbl_n_max, ctx + " (sbl)");
  }

  cfg.check();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return experiment_config_from_json(j, path);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double w = 640, h = 420, ml = 64, mr = 150, mt = 40, mb = 48;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double px = (w - ml - mr) / (xmax - xmin);
  const double py = (h - mt - mb) / (ymax - ymin);
  auto sx = [&](double x) { return ml + (x - xmin) * px; };
  auto sy = [&](double y) { return h - mb - (y - ymin) * py; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  o << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" << xml_escape(title) << "</text>\n";
  // axes
  o << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
    << h - mb << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    o << "<line x1=\"" << sx(xv) << "\" y1=\"" << h - mb << "\" x2=\"" << sx(xv) << "\" y2=\""
      << h - mb + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << sx(xv) << "\" y=\"" << h - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_g(xv)
      << "</text>\n";
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml << "\" y2=\""
      << sy(yv) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_g(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
    << (mt + h - mb) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kColors[si % 8];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
    }
    o << "\"/>\n";
    const double ly = mt + 16 + 18 * static_cast<double>(si);
    o << "<line x1=\"" << w - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << w - mr + 34
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << w - mr + 40 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace afdm
