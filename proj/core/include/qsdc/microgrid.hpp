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

// AC and DC microgrid plants closed around the phase-consensus secondary
// controller.
//
// AC: DER i runs the droop law w_i = w* - n_i P_i + phi_i / k, where P_i comes
// from a quasi-static sine-coupled power flow and phi_i is the consensus
// phase pinned to k n_i P_i. Angles integrate d(delta_i)/dt = 2 pi (w_i - w*).
//
// DC: DER i sets V_i^ref = V* - m_i I_i + phi_i / c behind a line resistance
// R_i onto a single bus feeding a load R_L; phi_i is pinned to c m_i I_i.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qsdc/consensus.hpp"
#include "qsdc/netgraph.hpp"

namespace qsdc::microgrid {

using consensus::MixingEvent;
using consensus::NodeState;
using consensus::ProtocolConfig;
using netgraph::CommGraph;

inline constexpr double kInfiniteLoad = std::numeric_limits<double>::infinity();

struct AcDer {
  double droop = 5e-3;    // Hz per kW
  double rated = 60.0;    // kW
  double delta = 0.0;     // rad
  bool online = true;
};

struct AcNetwork {
  CommGraph electrical;          // edge weights are b_ij in kW
  CommGraph comm;                // consensus links
  std::vector<double> loads;     // kW at each DER bus
  std::vector<std::size_t> group;  // microgrid membership; an offline DER's load moves to its group
  double omega_star = 60.0;      // Hz
  double nominal_voltage = 380.0;  // V, informational
  double k = 1.0;                // rad per Hz
};

struct DcDer {
  double droop = 1.0;         // V per A
  double resistance = 0.1;    // ohm
  double rated_current = 5.0;  // A
  bool online = true;
};

struct DcNetwork {
  CommGraph comm;
  double v_star = 48.0;                  // V
  double load_resistance = kInfiniteLoad;  // ohm
  double c = 1.0;                        // rad per V
};

struct Event {
  enum class Kind { kStepLoad, kDroopChange, kPlug, kUnplug, kMixingOn, kMixingOff };
  double time = 0.0;
  Kind kind = Kind::kStepLoad;
  std::vector<std::size_t> nodes;
  // step_load: AC total kW added, split equally over `nodes`; DC new R_L in
  // ohm (infinite removes the load). droop_change: new droop.
  double value = 0.0;
  double p = 0.0;            // mixing strength
  double probability = 1.0;  // mixing chance per step
};

const char* event_kind_name(Event::Kind k);
Event::Kind parse_event_kind(const std::string& s);

// One mixing window per node named by a mixing_on event, closed by the first
// later mixing_off naming that node (open-ended otherwise).
std::vector<MixingEvent> mixing_windows(std::span<const Event> events, double horizon);

// 0.8 * (pi/2) / max(n_i * rated_i) and the DC counterpart.
double recommended_k(std::span<const AcDer> ders);
double recommended_c(std::span<const DcDer> ders);

// Per-bus load after moving each offline DER's load equally onto the online
// members of its group.
std::vector<double> effective_loads(const AcNetwork& net, std::span<const AcDer> ders);

// P_i = P_L,i + sum_j b_ij sin(delta_i - delta_j) over online DERs; offline
// DERs report 0. Throws PartitionError if the online electrical graph is
// disconnected or a group has lost every DER.
std::vector<double> ac_power_flow(std::span<const AcDer> ders, const AcNetwork& net);

struct DcSolution {
  double v_bus = 0.0;
  std::vector<double> current;  // A, 0 for offline DERs
  double residual = 0.0;        // max nodal / branch equation residual
};

// Star network solve from reference voltages.
DcSolution dc_solve(std::span<const double> v_refs, std::span<const DcDer> ders,
                    const DcNetwork& net);

// Closed-loop solve with V_i^ref = V* - m_i I_i + phi_i / c substituted.
DcSolution dc_solve_droop(std::span<const double> phis, std::span<const DcDer> ders,
                          const DcNetwork& net);

struct AcState {
  std::vector<AcDer> ders;
  std::vector<NodeState> nodes;
};

struct AcSample {
  std::vector<double> power;      // kW
  std::vector<double> frequency;  // Hz
  std::vector<double> phi;
  std::vector<double> pinner;
  std::size_t clamped_pinners = 0;
  std::vector<std::string> diagnostics;
  double balance_residual = 0.0;  // |sum P - sum P_L|
};

// One co-simulation step of length cfg.dt. Offline DERs report NaN.
AcSample ac_step(AcState& state, const AcNetwork& net, const ProtocolConfig& cfg,
                 std::uint64_t step_index, std::span<const MixingEvent> mixing = {});

struct DcState {
  std::vector<DcDer> ders;
  std::vector<NodeState> nodes;
  std::vector<double> current;  // from the previous solve
};

struct DcSample {
  double v_bus = 0.0;
  std::vector<double> current;
  std::vector<double> v_ref;
  std::vector<double> phi;
  std::vector<double> pinner;
  std::size_t clamped_pinners = 0;
  std::vector<std::string> diagnostics;
  double balance_residual = 0.0;
};

DcSample dc_step(DcState& state, const DcNetwork& net, const ProtocolConfig& cfg,
                 std::uint64_t step_index, std::span<const MixingEvent> mixing = {});

struct AcSystem {
  std::vector<AcDer> ders;
  AcNetwork network;
  std::vector<Event> events;
  double horizon = 30.0;
};

struct DcSystem {
  std::vector<DcDer> ders;
  DcNetwork network;
  std::vector<Event> events;
  double horizon = 45.0;
};

void validate(const AcSystem& sys);
void validate(const DcSystem& sys);

enum class PlantKind { kAc, kDc };

// Row k holds the state after k steps; offline DERs read NaN.
struct TimeSeries {
  PlantKind kind = PlantKind::kAc;
  std::size_t der_count = 0;
  double nominal = 0.0;  // w* or V*
  std::vector<double> times;
  std::vector<std::vector<double>> frequency;   // AC only
  std::vector<double> v_bus;                    // DC only
  std::vector<std::vector<double>> power;       // kW or A
  std::vector<std::vector<double>> normalized;  // n_i P_i or m_i I_i
  std::vector<std::vector<double>> phi;
  std::vector<std::vector<double>> pinner;
  std::vector<double> lyapunov;                 // against the mean online pinner
  std::vector<std::vector<double>> droop;       // droop in force per row
  std::vector<double> total_load;               // AC kW, DC bus load current
  std::vector<std::string> events_applied;
  std::vector<std::string> diagnostics;
  std::size_t clamped_pinners = 0;
  double max_balance_residual = 0.0;
  double max_pinner = 0.0;
  double min_pinner = 0.0;
};

// Fixed-step co-simulation; events snap to the nearest step and apply before
// it. A plug/unplug that disconnects either graph throws PartitionError.
TimeSeries run_ac(const AcSystem& sys, const ProtocolConfig& cfg);
TimeSeries run_dc(const DcSystem& sys, const ProtocolConfig& cfg);

// Reference systems: 15 DERs in five triangle microgrids tied in a ring with a
// 40 kW step, and 9 DERs on one DC bus with a 3 ohm load step.
AcSystem reference_ac15();
DcSystem reference_dc9();

}  // namespace qsdc::microgrid
