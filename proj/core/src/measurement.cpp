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

#include "qsdc/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "qsdc/error.hpp"
#include "qsdc/rng.hpp"

namespace qsdc::measurement {
namespace {

using quantum::Complex;
using quantum::ComplexMatrix;

double component(const BlochVector& b, Basis basis) {
  switch (basis) {
    case Basis::X: return b.x;
    case Basis::Y: return b.y;
    case Basis::Z: return b.z;
  }
  return 0.0;
}

rng::Purpose sample_purpose(Basis b) {
  switch (b) {
    case Basis::X: return rng::Purpose::kSampleX;
    case Basis::Y: return rng::Purpose::kSampleY;
    case Basis::Z: return rng::Purpose::kSampleZ;
  }
  return rng::Purpose::kSampleZ;
}

void finish_report(EveReport& r) {
  r.avg_bloch = {r.expectation[0], r.expectation[1], r.expectation[2]};
  r.naive_phi = std::acos(std::clamp(r.expectation[0], -1.0, 1.0));
  r.informed_phi = std::atan2(r.expectation[1], r.expectation[0]);
}

}  // namespace

const char* basis_name(Basis b) {
  switch (b) {
    case Basis::X: return "X";
    case Basis::Y: return "Y";
    case Basis::Z: return "Z";
  }
  return "?";
}

double CountHistogram::p0() const {
  return shots() == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(shots());
}
double CountHistogram::p1() const {
  return shots() == 0 ? 0.0 : static_cast<double>(ones) / static_cast<double>(shots());
}
double CountHistogram::expectation() const {
  if (shots() == 0) return 0.0;
  return (static_cast<double>(zeros) - static_cast<double>(ones)) /
         static_cast<double>(shots());
}

double expected_p0(const BlochVector& bloch, Basis basis) {
  const double e = component(bloch, basis);
  if (!std::isfinite(e) || std::abs(e) > 1.0 + 1e-9) {
    throw ValidationError(std::string("invalid state: |<sigma_") + basis_name(basis) +
                          ">| exceeds 1");
  }
  return std::clamp(0.5 * (1.0 + e), 0.0, 1.0);
}

double gate_level_p0(const BlochVector& b, Basis basis) {
  const Complex i{0.0, 1.0};
  ComplexMatrix rho(2, 2);
  rho << 0.5 * (1.0 + b.z), 0.5 * (b.x - i * b.y), 0.5 * (b.x + i * b.y), 0.5 * (1.0 - b.z);
  ComplexMatrix u = ComplexMatrix::Identity(2, 2);
  const double h = 1.0 / std::sqrt(2.0);
  ComplexMatrix hadamard(2, 2);
  hadamard << h, h, h, -h;
  ComplexMatrix s_dag = ComplexMatrix::Zero(2, 2);
  s_dag(0, 0) = 1.0;
  s_dag(1, 1) = -i;
  if (basis == Basis::X) u = hadamard;
  if (basis == Basis::Y) u = hadamard * s_dag;
  const ComplexMatrix out = u * rho * u.adjoint();
  const double p0 = out(0, 0).real();
  if (p0 < -1e-9 || p0 > 1.0 + 1e-9) {
    throw ValidationError("invalid state: outcome probability outside [0, 1]");
  }
  return std::clamp(p0, 0.0, 1.0);
}

CountHistogram sample_basis(const BlochVector& bloch, Basis basis, std::uint64_t shots,
                            std::uint64_t seed, SamplingOptions opts) {
  if (shots == 0) throw ValidationError("sample_basis: shots must be at least 1");
  const double p0 = opts.gate_level ? gate_level_p0(bloch, basis) : expected_p0(bloch, basis);
  std::mt19937_64 gen(seed);
  CountHistogram h;
  for (std::uint64_t k = 0; k < shots; ++k) {
    if (rng::uniform01(gen) < p0) {
      ++h.zeros;
    } else {
      ++h.ones;
    }
  }
  return h;
}

const char* method_name(EstimatorMethod m) {
  return m == EstimatorMethod::kQsdcAtan2 ? "qsdc_atan2" : "qdc_arccos";
}

PhaseEstimate estimate_phase_qsdc(double sx, double sy) {
  if (sx == 0.0 && sy == 0.0) {
    throw DegenerateCoherence("estimate_phase_qsdc: <sigma_x> = <sigma_y> = 0, node signal lost");
  }
  PhaseEstimate e;
  e.method = EstimatorMethod::kQsdcAtan2;
  e.sx_hat = sx;
  e.sy_hat = sy;
  e.phi_hat = std::atan2(sy, sx);
  return e;
}

PhaseEstimate estimate_phase_qsdc(const CountHistogram& x, const CountHistogram& y) {
  if (x.shots() == 0 || y.shots() == 0) {
    throw ValidationError("estimate_phase_qsdc: empty histogram");
  }
  PhaseEstimate e = estimate_phase_qsdc(x.expectation(), y.expectation());
  e.shots_used = x.shots() + y.shots();
  return e;
}

PhaseEstimate estimate_phase_qdc(double sx) {
  PhaseEstimate e;
  e.method = EstimatorMethod::kQdcArccos;
  e.sx_hat = sx;
  if (std::abs(sx) > 1.0) {
    e.clamped = true;
    sx = std::clamp(sx, -1.0, 1.0);
  }
  e.phi_hat = std::acos(sx);
  return e;
}

PhaseEstimate estimate_phase_qdc(const CountHistogram& x) {
  if (x.shots() == 0) throw ValidationError("estimate_phase_qdc: empty histogram");
  PhaseEstimate e = estimate_phase_qdc(x.expectation());
  e.shots_used = x.shots();
  return e;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double binomial_test_two_sided(std::uint64_t k, std::uint64_t n, double p) {
  if (k > n) throw ValidationError("binomial_test_two_sided: k > n");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("binomial_test_two_sided: p in (0,1)");
  const double dn = static_cast<double>(n);
  auto log_pmf = [&](std::uint64_t i) {
    const double di = static_cast<double>(i);
    return std::lgamma(dn + 1.0) - std::lgamma(di + 1.0) - std::lgamma(dn - di + 1.0) +
           di * std::log(p) + (dn - di) * std::log1p(-p);
  };
  const double observed = log_pmf(k);
  const double cutoff = observed + 1e-7;
  double total = 0.0;
  for (std::uint64_t i = 0; i <= n; ++i) {
    const double lp = log_pmf(i);
    if (lp <= cutoff) total += std::exp(lp);
  }
  return std::min(1.0, total);
}

EveReport eve_intercept(std::span<const BlochVector> stream, BasesPolicy policy,
                        std::uint64_t shots_per_step, std::size_t steps,
                        std::uint64_t seed) {
  if (stream.empty()) throw ValidationError("eve_intercept: empty stream");
  if (shots_per_step == 0) throw ValidationError("eve_intercept: shots_per_step must be >= 1");
  if (steps == 0 || steps > stream.size()) steps = stream.size();

  EveReport r;
  r.steps = steps;
  for (std::size_t t = 0; t < steps; ++t) {
    for (int b = 0; b < 3; ++b) {
      if (policy == BasesPolicy::kRoundRobin && static_cast<int>(t % 3) != b) continue;
      const auto basis = static_cast<Basis>(b);
      const auto key = rng::stream_key(seed, 0, t, rng::Purpose::kEve) ^
                       static_cast<std::uint64_t>(sample_purpose(basis));
      r.counts[b] += sample_basis(stream[t], basis, shots_per_step, rng::splitmix64(key));
    }
  }
  for (int b = 0; b < 3; ++b) {
    r.expectation[b] = r.counts[b].expectation();
    r.entropy_bits[b] = binary_entropy(r.counts[b].p0());
  }
  finish_report(r);
  return r;
}

EveReport eve_expected(std::span<const BlochVector> stream, std::size_t steps) {
  if (stream.empty()) throw ValidationError("eve_expected: empty stream");
  if (steps == 0 || steps > stream.size()) steps = stream.size();
  EveReport r;
  r.steps = steps;
  r.exact = true;
  for (int b = 0; b < 3; ++b) {
    double p0 = 0.0;
    for (std::size_t t = 0; t < steps; ++t) p0 += expected_p0(stream[t], static_cast<Basis>(b));
    p0 /= static_cast<double>(steps);
    r.expectation[b] = 2.0 * p0 - 1.0;
    r.entropy_bits[b] = binary_entropy(p0);
  }
  finish_report(r);
  return r;
}

std::vector<double> eve_per_step_phases(std::span<const BlochVector> stream,
                                        std::uint64_t shots_per_step, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(stream.size());
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto kx = rng::stream_key(seed, 1, t, rng::Purpose::kSampleX);
    const auto ky = rng::stream_key(seed, 1, t, rng::Purpose::kSampleY);
    const auto hx = sample_basis(stream[t], Basis::X, shots_per_step, kx);
    const auto hy = sample_basis(stream[t], Basis::Y, shots_per_step, ky);
    out.push_back(std::atan2(hy.expectation(), hx.expectation()));
  }
  return out;
}

nlohmann::json to_json(const EveReport& r) {
  nlohmann::json bases = nlohmann::json::object();
  nlohmann::json entropy = nlohmann::json::object();
  for (int b = 0; b < 3; ++b) {
    const char* name = basis_name(static_cast<Basis>(b));
    if (r.exact) {
      bases[name] = {{"p0", 0.5 * (1.0 + r.expectation[b])},
                     {"p1", 0.5 * (1.0 - r.expectation[b])}};
    } else {
      bases[name] = {{"zeros", r.counts[b].zeros}, {"ones", r.counts[b].ones}};
    }
    entropy[name] = r.entropy_bits[b];
  }
  return {{"bases", bases},
          {"naive_phi", r.naive_phi},
          {"informed_phi", r.informed_phi},
          {"avg_bloch", {r.avg_bloch.x, r.avg_bloch.y, r.avg_bloch.z}},
          {"entropy_bits", entropy},
          {"steps", r.steps},
          {"exact", r.exact}};
}

}  // namespace qsdc::measurement
