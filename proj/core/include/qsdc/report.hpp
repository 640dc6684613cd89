// Copyright 2026 The qsdc-sim Authors
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

// CSV series and JSON summaries for every run kind. Numbers in CSV carry 9
// significant digits; output depends only on the inputs, so equal runs give
// byte-identical files.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsdc/consensus.hpp"
#include "qsdc/measurement.hpp"
#include "qsdc/microgrid.hpp"

namespace qsdc::report {

inline constexpr double kConsensusTolerance = 1e-2;  // rad
inline constexpr double kFrequencyTolerance = 1e-3;  // Hz
inline constexpr double kVoltageTolerance = 1e-2;    // V

std::string format_number(double v);

std::string consensus_csv(const consensus::Trajectory& tr);
std::string timeseries_csv(const microgrid::TimeSeries& ts);
std::string eve_csv(const measurement::EveReport& r);

// First time after which err stays below tol; NaN if the last sample is not.
double settling_time(std::span<const double> times, std::span<const double> err, double tol);

// -slope of a least-squares line through (t, ln v) over the leading decay:
// samples from t = 0 until v first drops below max(1e-10 v(0), 10 x the
// final-window mean). NaN with fewer than 3 usable samples.
double fitted_decay_rate(std::span<const double> times, std::span<const double> v);

// Start index of the final 10% window; throws ValidationError below 10 samples.
std::size_t final_window_start(std::size_t samples);

// Column means over the final window, ignoring NaN entries.
std::vector<double> final_window_means(const std::vector<std::vector<double>>& rows);

// (max - min) / |mean| * 100 over finite entries; 0 for a constant set.
double sharing_spread_pct(std::span<const double> values);

nlohmann::json summarize(const consensus::Trajectory& tr, std::optional<double> mu = std::nullopt,
                         std::optional<double> epsilon = std::nullopt);
nlohmann::json summarize(const microgrid::TimeSeries& ts);

// Two-space indented JSON followed by a newline.
std::string dump(const nlohmann::json& j);

}  // namespace qsdc::report
