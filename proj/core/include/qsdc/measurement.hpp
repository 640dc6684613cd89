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

// Shot-based single-qubit measurement, the twin-qubit atan2 phase estimator,
// the legacy arccos estimator, and eavesdropper statistics.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsdc/quantum_engine.hpp"

namespace qsdc::measurement {

using quantum::BlochVector;

enum class Basis { X = 0, Y = 1, Z = 2 };

const char* basis_name(Basis b);

struct CountHistogram {
  std::uint64_t zeros = 0;
  std::uint64_t ones = 0;

  std::uint64_t shots() const noexcept { return zeros + ones; }
  double p0() const;
  double p1() const;
  // p0 - p1, the estimated expectation of the measured Pauli.
  double expectation() const;

  CountHistogram& operator+=(const CountHistogram& o) {
    zeros += o.zeros;
    ones += o.ones;
    return *this;
  }
};

// Probability of outcome 0 after the basis-change circuit: (1 + e) / 2 with e
// the matching Bloch component. Throws ValidationError when |e| > 1 + 1e-9.
double expected_p0(const BlochVector& bloch, Basis basis);

// Same probability computed by applying H (X basis) or S^dag then H (Y basis)
// to the 2x2 state and reading <0|rho'|0>.
double gate_level_p0(const BlochVector& bloch, Basis basis);

struct SamplingOptions {
  bool gate_level = false;
};

// `shots` independent Bernoulli(p0) outcomes from the given generator seed.
CountHistogram sample_basis(const BlochVector& bloch, Basis basis, std::uint64_t shots,
                            std::uint64_t seed, SamplingOptions opts = {});

enum class EstimatorMethod { kQsdcAtan2, kQdcArccos };

const char* method_name(EstimatorMethod m);

struct PhaseEstimate {
  double phi_hat = 0.0;
  EstimatorMethod method = EstimatorMethod::kQsdcAtan2;
  double sx_hat = 0.0;
  double sy_hat = 0.0;
  std::uint64_t shots_used = 0;  // 0 in exact-expectation mode
  bool clamped = false;          // legacy estimator saw |p0 - p1| > 1
};

// phi_hat = atan2(p0y - p1y, p0x - p1x). Throws DegenerateCoherence when both
// expectations vanish.
PhaseEstimate estimate_phase_qsdc(const CountHistogram& x, const CountHistogram& y);
PhaseEstimate estimate_phase_qsdc(double sx, double sy);

// phi_hat = arccos(p0 - p1); only unbiased for pure equatorial states.
PhaseEstimate estimate_phase_qdc(const CountHistogram& x);
PhaseEstimate estimate_phase_qdc(double sx);

// Binary entropy in bits of a Bernoulli(p).
double binary_entropy(double p);

// Exact two-sided binomial test p-value for k successes in n trials.
double binomial_test_two_sided(std::uint64_t k, std::uint64_t n, double p);

enum class BasesPolicy {
  kAll,         // every basis gets shots_per_step each step
  kRoundRobin,  // step t measures basis t mod 3
};

struct EveReport {
  std::array<CountHistogram, 3> counts{};     // by Basis
  std::array<double, 3> expectation{};        // p0 - p1 per basis
  BlochVector avg_bloch;
  double naive_phi = 0.0;     // arccos of the X expectation
  double informed_phi = 0.0;  // atan2 of the Y and X expectations
  std::array<double, 3> entropy_bits{};
  std::uint64_t steps = 0;
  bool exact = false;
};

// Aggregates Eve's measurements over the first `steps` elements of the stream
// (all of them when steps == 0). One generator per (step, basis).
EveReport eve_intercept(std::span<const BlochVector> stream, BasesPolicy policy,
                        std::uint64_t shots_per_step, std::size_t steps,
                        std::uint64_t seed);

// Infinite-shot limit of eve_intercept: averages the exact outcome
// probabilities over the stream.
EveReport eve_expected(std::span<const BlochVector> stream, std::size_t steps = 0);

// Eve that estimates phi separately at every step (theta fixed within a step)
// with atan2 of her own X and Y samples.
std::vector<double> eve_per_step_phases(std::span<const BlochVector> stream,
                                        std::uint64_t shots_per_step, std::uint64_t seed);

nlohmann::json to_json(const EveReport& r);

}  // namespace qsdc::measurement
