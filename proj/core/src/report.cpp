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

#include "qsdc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "qsdc/error.hpp"

namespace qsdc::report {
namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

void csv_row(std::ostringstream& os, std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) os << ',';
    os << format_number(values[k]);
  }
  os << '\n';
}

double max_abs_finite(std::span<const double> v, double offset) {
  double m = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) m = std::max(m, std::abs(x - offset));
  }
  return m;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json numbers_or_null(std::span<const double> v) {
  auto arr = nlohmann::json::array();
  for (double x : v) arr.push_back(number_or_null(x));
  return arr;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string consensus_csv(const consensus::Trajectory& tr) {
  const std::size_t n = tr.node_count();
  std::ostringstream os;
  os << 't';
  for (std::size_t i = 0; i < n; ++i) os << ",phi_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",pinner_" << i;
  os << ",V\n";
  std::vector<double> row(2 * n + 2);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    row[0] = tr.times[k];
    for (std::size_t i = 0; i < n; ++i) {
      row[1 + i] = tr.phi[i][k];
      row[1 + n + i] = tr.pinner[i][k];
    }
    row[2 * n + 1] = tr.lyapunov[k];
    csv_row(os, row);
  }
  return os.str();
}

std::string timeseries_csv(const microgrid::TimeSeries& ts) {
  const std::size_t n = ts.der_count;
  const bool ac = ts.kind == microgrid::PlantKind::kAc;
  std::ostringstream os;
  os << 't';
  if (ac) {
    for (std::size_t i = 0; i < n; ++i) os << ",freq_" << i;
  } else {
    os << ",v_bus";
  }
  const char* p = ac ? ",p_" : ",i_";
  const char* x = ac ? ",nP_" : ",mI_";
  for (std::size_t i = 0; i < n; ++i) os << p << i;
  for (std::size_t i = 0; i < n; ++i) os << x << i;
  for (std::size_t i = 0; i < n; ++i) os << ",phi_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",pinner_" << i;
  os << ",V\n";
  std::vector<double> row;
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    row.clear();
    row.push_back(ts.times[k]);
    if (ac) {
      row.insert(row.end(), ts.frequency[k].begin(), ts.frequency[k].end());
    } else {
      row.push_back(ts.v_bus[k]);
    }
    row.insert(row.end(), ts.power[k].begin(), ts.power[k].end());
    row.insert(row.end(), ts.normalized[k].begin(), ts.normalized[k].end());
    row.insert(row.end(), ts.phi[k].begin(), ts.phi[k].end());
    row.insert(row.end(), ts.pinner[k].begin(), ts.pinner[k].end());
    row.push_back(ts.lyapunov[k]);
    csv_row(os, row);
  }
  return os.str();
}

std::string eve_csv(const measurement::EveReport& r) {
  std::ostringstream os;
  os << "basis,zeros,ones,p0,expectation,entropy_bits\n";
  for (int b = 0; b < 3; ++b) {
    const auto& c = r.counts[static_cast<std::size_t>(b)];
    const double e = r.expectation[static_cast<std::size_t>(b)];
    os << measurement::basis_name(static_cast<measurement::Basis>(b)) << ',' << c.zeros << ','
       << c.ones << ',' << format_number(0.5 * (1.0 + e)) << ',' << format_number(e) << ','
       << format_number(r.entropy_bits[static_cast<std::size_t>(b)]) << '\n';
  }
  return os.str();
}

double settling_time(std::span<const double> times, std::span<const double> err, double tol) {
  if (times.empty() || times.size() != err.size()) {
    throw ValidationError("settling_time: need equal-length, non-empty series");
  }
  const std::size_t n = err.size();
  if (!(err[n - 1] < tol)) return kNaN;
  std::size_t k = n;
  while (k > 0 && err[k - 1] < tol) --k;
  return times[k];
}

std::size_t final_window_start(std::size_t samples) {
  if (samples < 10) {
    throw ValidationError("series too short for the final 10% window (" + std::to_string(samples) +
                          " samples, need at least 10)");
  }
  return samples - samples / 10;
}

std::vector<double> final_window_means(const std::vector<std::vector<double>>& rows) {
  const std::size_t start = final_window_start(rows.size());
  const std::size_t n = rows.front().size();
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> cnt(n, 0);
  for (std::size_t k = start; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(rows[k][i])) {
        sum[i] += rows[k][i];
        ++cnt[i];
      }
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = cnt[i] ? sum[i] / static_cast<double>(cnt[i]) : kNaN;
  return out;
}

double fitted_decay_rate(std::span<const double> times, std::span<const double> v) {
  if (times.size() != v.size()) throw ValidationError("fitted_decay_rate: length mismatch");
  const std::size_t start = final_window_start(v.size());
  double tail = 0.0;
  for (std::size_t k = start; k < v.size(); ++k) tail += v[k];
  tail /= static_cast<double>(v.size() - start);
  const double floor = std::max(1e-10 * v[0], 10.0 * tail);
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > floor) || !(v[k] > 0.0)) break;
    const double y = std::log(v[k]);
    st += times[k];
    sy += y;
    stt += times[k] * times[k];
    sty += times[k] * y;
    ++m;
  }
  if (m < 3) return kNaN;
  const double md = static_cast<double>(m);
  const double den = md * stt - st * st;
  if (den <= 0.0) return kNaN;
  return -(md * sty - st * sy) / den;
}

double sharing_spread_pct(std::span<const double> values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  std::size_t cnt = 0;
  for (double x : values) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
    ++cnt;
  }
  if (cnt == 0 || hi == lo) return 0.0;
  const double mean = sum / static_cast<double>(cnt);
  if (mean == 0.0) return kNaN;
  return (hi - lo) / std::abs(mean) * 100.0;
}

nlohmann::json summarize(const consensus::Trajectory& tr, std::optional<double> mu,
                         std::optional<double> epsilon) {
  const std::size_t n = tr.node_count();
  const std::size_t samples = tr.samples();
  const std::size_t start = final_window_start(samples);
  std::vector<double> err(samples, 0.0);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      err[k] = std::max(err[k], std::abs(tr.phi[i][k] - tr.pinner[i][k]));
    }
  }
  std::vector<double> final_phi(n), steady_phi(n), target(n);
  double max_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    final_phi[i] = tr.phi[i].back();
    target[i] = tr.pinner[i].back();
    double s = 0.0;
    for (std::size_t k = start; k < samples; ++k) s += tr.phi[i][k];
    steady_phi[i] = s / static_cast<double>(samples - start);
    max_err = std::max(max_err, std::abs(final_phi[i] - target[i]));
  }
  nlohmann::json j;
  j["kind"] = "consensus";
  j["backend"] = consensus::backend_name(tr.backend);
  j["mode"] = consensus::mode_name(tr.mode);
  j["seed"] = tr.seed;
  j["samples"] = samples;
  j["horizon_s"] = tr.times.back();
  j["settling_time_s"] = number_or_null(settling_time(tr.times, err, kConsensusTolerance));
  j["settling_tolerance"] = kConsensusTolerance;
  j["final_phi"] = numbers_or_null(final_phi);
  j["steady_phi"] = numbers_or_null(steady_phi);
  j["target_pinner"] = numbers_or_null(target);
  j["max_final_error"] = max_err;
  j["sharing_spread_pct"] = number_or_null(sharing_spread_pct(steady_phi));
  j["fitted_rate"] = number_or_null(fitted_decay_rate(tr.times, tr.lyapunov));
  j["mu"] = mu ? number_or_null(*mu) : nlohmann::json(nullptr);
  j["two_mu"] = mu ? number_or_null(2.0 * *mu) : nlohmann::json(nullptr);
  j["epsilon"] = epsilon ? number_or_null(*epsilon) : nlohmann::json(nullptr);
  j["clamped_pinners"] = tr.clamped_pinners;
  j["diagnostics"] = tr.diagnostics.size();
  return j;
}

nlohmann::json summarize(const microgrid::TimeSeries& ts) {
  const bool ac = ts.kind == microgrid::PlantKind::kAc;
  const std::size_t samples = ts.times.size();
  const std::size_t start = final_window_start(samples);
  std::vector<double> err(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    err[k] = ac ? max_abs_finite(ts.frequency[k], ts.nominal) : std::abs(ts.v_bus[k] - ts.nominal);
  }
  const double tol = ac ? kFrequencyTolerance : kVoltageTolerance;
  const auto steady_norm = final_window_means(ts.normalized);
  double final_err = 0.0;
  for (std::size_t k = start; k < samples; ++k) final_err = std::max(final_err, err[k]);
  double norm_mean = 0.0;
  std::size_t cnt = 0;
  for (double x : steady_norm) {
    if (std::isfinite(x)) {
      norm_mean += x;
      ++cnt;
    }
  }
  norm_mean = cnt ? norm_mean / static_cast<double>(cnt) : kNaN;

  nlohmann::json j;
  j["kind"] = ac ? "ac" : "dc";
  j["samples"] = samples;
  j["horizon_s"] = ts.times.back();
  j["settling_time_s"] = number_or_null(settling_time(ts.times, err, tol));
  j["settling_tolerance"] = tol;
  if (ac) {
    const auto steady_f = final_window_means(ts.frequency);
    double f = 0.0;
    std::size_t c = 0;
    for (double x : steady_f) {
      if (std::isfinite(x)) {
        f += x;
        ++c;
      }
    }
    j["steady_freq_hz"] = number_or_null(c ? f / static_cast<double>(c) : kNaN);
    j["max_freq_error_hz"] = final_err;
  } else {
    double v = 0.0;
    for (std::size_t k = start; k < samples; ++k) v += ts.v_bus[k];
    j["steady_vbus_v"] = v / static_cast<double>(samples - start);
    j["max_vbus_error_v"] = final_err;
  }
  j["sharing_spread_pct"] = number_or_null(sharing_spread_pct(steady_norm));
  j["steady_normalized"] = number_or_null(norm_mean);
  j["events_applied"] = ts.events_applied;
  j["clamped_pinners"] = ts.clamped_pinners;
  j["pinner_range"] = {ts.min_pinner, ts.max_pinner};
  j["max_balance_residual"] = ts.max_balance_residual;
  j["diagnostics"] = ts.diagnostics.size();
  return j;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace qsdc::report
