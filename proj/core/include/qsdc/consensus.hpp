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

// The secure phase-consensus protocol. Each step re-prepares every node at a
// random polar angle, sets the rotation-Z pin to (pinner - phase), evolves
// the network for dt, optionally mixes designated nodes, then re-estimates
// every phase from its sigma_x / sigma_y twins.
//
// Three interchangeable backends evolve the step:
//   full  - dense density matrix under the Lindblad generator (n <= 10);
//   bloch - the exact linear ODE for the single-node Bloch vectors;
//   phase - the same flow in polar form (phase and in-plane coherence).
// Within a step the pin angle is held, as the rotation operator is set once
// per step; all three backends therefore describe the same dynamics.

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsdc/measurement.hpp"
#include "qsdc/netgraph.hpp"
#include "qsdc/quantum_engine.hpp"

namespace qsdc::consensus {

using netgraph::CommGraph;
using quantum::BlochVector;

enum class Backend { kFull, kBloch, kPhase };
enum class Mode { kQsdc, kQdcLegacy };

const char* backend_name(Backend b);
const char* mode_name(Mode m);
Backend parse_backend(const std::string& s);
Mode parse_mode(const std::string& s);

struct ThetaDistribution {
  enum class Kind { kUniform, kFixed };
  Kind kind = Kind::kUniform;
  double lo = 0.2;
  double hi = std::numbers::pi - 0.2;
  double value = 0.5 * std::numbers::pi;

  static ThetaDistribution uniform(double lo, double hi);
  static ThetaDistribution fixed(double value);

  double sample(std::uint64_t seed, std::uint64_t node, std::uint64_t step) const;
  double mean_sin() const;
  double mean_cos() const;

  // Accepts 0 <= lo < hi <= pi when `closed` (eavesdropper experiments);
  // protocol configurations require 0 < lo < hi < pi.
  void validate(bool closed = false) const;
};

struct ProtocolConfig {
  double dt = 0.01;
  int substeps = 4;
  std::optional<std::uint64_t> shots;  // empty: exact expectations
  ThetaDistribution theta;
  Backend backend = Backend::kPhase;
  Mode mode = Mode::kQsdc;
  std::uint64_t seed = 0;

  bool exact() const noexcept { return !shots.has_value(); }
  // Legacy mode always prepares on the equator.
  ThetaDistribution effective_theta() const;
  void validate() const;
};

struct NodeState {
  double phi = 0.0;     // current phase estimate
  double theta = 0.0;   // polar angle drawn for the latest step
  double s = 1.0;       // in-plane coherence r * sin(theta) seen at measurement
  double pinner = 0.0;  // target phase used in the latest step
};

// Depolarizing noise of strength p applied after evolution to each listed
// node, at each step starting in [start, end), with the given probability.
struct MixingEvent {
  std::vector<std::size_t> nodes;
  double start = 0.0;
  double end = 0.0;
  double p = 0.0;
  double probability = 1.0;

  bool covers(double t) const noexcept { return t >= start && t < end; }
  void validate(double horizon, std::size_t node_count) const;
};

struct BlochState {
  std::vector<double> x, y, z;

  std::size_t size() const noexcept { return x.size(); }
  BlochVector node(std::size_t i) const { return {x[i], y[i], z[i]}; }
  static BlochState from(std::span<const BlochVector> v);
};

struct BlochDerivative {
  std::vector<double> dx, dy, dz;
};

// Local-expectation dynamics with the pin re-aimed at the instantaneous phase:
//   dx_i = s_i cos(pinner_i) - x_i + sum_j a_ij (x_j - x_i)
//   dy_i = s_i sin(pinner_i) - y_i + sum_j a_ij (y_j - y_i)
//   dz_i = sum_j a_ij (z_j - z_i)
// An empty `pinners` span drops the pinning terms.
BlochDerivative bloch_rhs(const BlochState& state, std::span<const double> pinners,
                          const CommGraph& g);

// Same dynamics with fixed rotation angles alpha_i (the pin held over a step):
// the pinning term is R_z(alpha_i) (x_i, y_i) - (x_i, y_i).
BlochDerivative bloch_rhs_held(const BlochState& state, std::span<const double> rotation,
                               const CommGraph& g);

// dphi_i = sin(pinner_i - phi_i) + sum_j a_ij (s_j / s_i) sin(phi_j - phi_i).
// Throws DegenerateCoherence naming the node when s_i <= 0.
std::vector<double> phase_rhs(std::span<const double> phi, std::span<const double> s,
                              std::span<const double> pinners, const CommGraph& g);

struct PhaseFlowDerivative {
  std::vector<double> dphi, ds;
};

// Polar form of bloch_rhs_held (without z):
//   dphi_i = sin(alpha_i) + sum_j a_ij (s_j / s_i) sin(phi_j - phi_i)
//   ds_i   = s_i (cos(alpha_i) - 1) + sum_j a_ij (s_j cos(phi_j - phi_i) - s_i)
PhaseFlowDerivative phase_flow_rhs(std::span<const double> phi, std::span<const double> s,
                                   std::span<const double> rotation, const CommGraph& g);

struct StepResult {
  std::vector<NodeState> states;
  // Exact local expectations after evolution and mixing (z is NaN for the
  // phase backend, which does not track it).
  std::vector<BlochVector> observed;
  std::vector<measurement::PhaseEstimate> estimates;
  std::vector<std::string> diagnostics;
  std::size_t clamped_pinners = 0;
};

// One protocol iteration. Pinners outside [0, pi/2] are clamped and counted.
// `thetas`, when given, replaces the random draw for this step.
StepResult qsdc_step(std::span<const NodeState> states, const CommGraph& g,
                     const ProtocolConfig& config, std::span<const double> pinners,
                     std::uint64_t step_index, std::span<const MixingEvent> events = {},
                     std::optional<std::span<const double>> thetas = std::nullopt);

using PinnerSignal = std::function<double(double t, std::size_t node)>;

PinnerSignal constant_pinner(double value);
PinnerSignal constant_pinners(std::vector<double> values);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> phi;     // [node][sample]
  std::vector<std::vector<double>> pinner;  // [node][sample]
  std::vector<double> lyapunov;             // against the mean pinner
  std::vector<std::vector<BlochVector>> observed;  // [sample-1][node], optional
  Backend backend = Backend::kPhase;
  Mode mode = Mode::kQsdc;
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics;
  std::size_t clamped_pinners = 0;

  std::size_t node_count() const noexcept { return phi.size(); }
  std::size_t samples() const noexcept { return times.size(); }
};

struct RunOptions {
  std::optional<std::vector<double>> initial_thetas;  // used for the first step
  bool record_observed = false;
};

Trajectory run_consensus(std::span<const double> init_phis, const PinnerSignal& pinners,
                         const CommGraph& g, const ProtocolConfig& config, double horizon,
                         std::span<const MixingEvent> events = {},
                         const RunOptions& options = {});

double sinc(double x);

// mu = lambda_min(sinc(eps) I + sinc(2 eps) B W B^T) for per-edge weights W.
// Throws OutOfRegionError unless 0 <= eps < pi/2.
double convergence_rate(const CommGraph& g, std::span<const double> edge_weights,
                        double epsilon);
double convergence_rate(const CommGraph& g, double epsilon);

// 1/2 sum (phi_i - pinner)^2.
double lyapunov(std::span<const double> phis, double pinner);

}  // namespace qsdc::consensus
