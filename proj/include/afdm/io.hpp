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

#include "afdm/channel.hpp"
#include "afdm/experiment.hpp"
#include "afdm/sbl.hpp"
#include "afdm/slp.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace afdm {

// Pre-formatted tabular result; serialization is byte-stable for identical
// inputs (fixed column order, fixed row order, snprintf %.12g numbers).
struct ResultTable {
  std::vector<std::string> comments;  // emitted as leading '# ' lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string fmt_g(double v);  // shortest-ish round-trippable decimal, %.12g
std::string csv_string(const ResultTable& table);
void write_csv_file(const std::string& path, const ResultTable& table);

ResultTable uplink_nmse_table(const UplinkResult& res);
ResultTable uplink_ber_table(const UplinkResult& res);
ResultTable downlink_ber_table(const DownlinkResult& res);
ResultTable constellation_table(const DownlinkResult& res);
ResultTable sbl_trace_table(const std::vector<SblTraceRow>& trace);

nlohmann::json channel_to_json(const ChannelRealization& ch);
ChannelRealization channel_from_json(const nlohmann::json& j);

nlohmann::json precode_dump_json(const PrecodeProblem& prob, const PrecodeSolution& sol);

// Parses a config file (JSON, // comments allowed), applying defaults for
// absent keys and rejecting unknown ones.  Parse and type errors carry the
// file name and the position reported by the parser.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& context);

// Minimal self-contained SVG line chart (one polyline per series).
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace afdm
