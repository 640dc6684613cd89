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

#include "qsdc/microgrid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qsdc/error.hpp"

namespace qsdc::microgrid {
namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Der>
std::vector<std::size_t> online_nodes(std::span<const Der> ders) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ders.size(); ++i) {
    if (ders[i].online) out.push_back(i);
  }
  return out;
}

void require_connected(const CommGraph& g, std::span<const std::size_t> online,
                       const char* what) {
  if (online.empty()) throw PartitionError(std::string(what) + ": no DER online");
  const auto sub = netgraph::induced_subgraph(g, online);
  if (!netgraph::is_connected(sub)) {
    std::ostringstream os;
    os << what << " graph is partitioned over the online DERs {";
    for (std::size_t k = 0; k < online.size(); ++k) os << (k ? ", " : "") << online[k];
    os << "}";
    throw PartitionError(os.str());
  }
}

// Mixing windows in global indices re-expressed on the online subgraph.
std::vector<MixingEvent> remap_mixing(std::span<const MixingEvent> mixing,
                                      std::span<const std::size_t> online) {
  std::vector<long> local_of;
  std::size_t max_node = 0;
  for (auto i : online) max_node = std::max(max_node, i);
  for (const auto& ev : mixing) {
    for (auto i : ev.nodes) max_node = std::max(max_node, i);
  }
  local_of.assign(max_node + 1, -1);
  for (std::size_t k = 0; k < online.size(); ++k) local_of[online[k]] = static_cast<long>(k);
  std::vector<MixingEvent> out;
  for (const auto& ev : mixing) {
    MixingEvent e = ev;
    e.nodes.clear();
    for (auto i : ev.nodes) {
      if (local_of[i] >= 0) e.nodes.push_back(static_cast<std::size_t>(local_of[i]));
    }
    if (!e.nodes.empty()) out.push_back(std::move(e));
  }
  return out;
}

struct ConsensusOutcome {
  std::size_t clamped = 0;
  std::vector<std::string> diagnostics;
};

// One protocol step over the online nodes with the given global pinners.
ConsensusOutcome consensus_over_online(std::vector<NodeState>& nodes, const CommGraph& comm,
                                       std::span<const std::size_t> online,
                                       std::span<const double> pinners,
                                       const ProtocolConfig& cfg, std::uint64_t step,
                                       std::span<const MixingEvent> mixing) {
  const auto sub = netgraph::induced_subgraph(comm, online);
  std::vector<NodeState> local(online.size());
  std::vector<double> pins(online.size());
  for (std::size_t k = 0; k < online.size(); ++k) {
    local[k] = nodes[online[k]];
    pins[k] = pinners[online[k]];
  }
  const auto events = remap_mixing(mixing, online);
  auto res = consensus::qsdc_step(local, sub, cfg, pins, step, events);
  for (std::size_t k = 0; k < online.size(); ++k) nodes[online[k]] = res.states[k];
  return {res.clamped_pinners, std::move(res.diagnostics)};
}

double scaled_max(std::span<const AcDer> ders) {
  double m = 0.0;
  for (const auto& d : ders) m = std::max(m, d.droop * d.rated);
  return m;
}

double scaled_max(std::span<const DcDer> ders) {
  double m = 0.0;
  for (const auto& d : ders) m = std::max(m, d.droop * d.rated_current);
  return m;
}

std::string describe(const Event& ev) {
  std::ostringstream os;
  os.precision(9);
  os << "t=" << ev.time << " " << event_kind_name(ev.kind) << " nodes=[";
  for (std::size_t k = 0; k < ev.nodes.size(); ++k) os << (k ? "," : "") << ev.nodes[k];
  os << "]";
  switch (ev.kind) {
    case Event::Kind::kStepLoad:
    case Event::Kind::kDroopChange: os << " value=" << ev.value; break;
    case Event::Kind::kMixingOn: os << " p=" << ev.p; break;
    default: break;
  }
  return os.str();
}

void validate_events(std::span<const Event> events, std::size_t n, double horizon) {
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    const std::string where = "event #" + std::to_string(e) + ": ";
    if (!(ev.time >= 0.0 && ev.time <= horizon)) {
      throw ValidationError(where + "time must lie within [0, horizon]");
    }
    if (ev.nodes.empty() && ev.kind != Event::Kind::kStepLoad) {
      throw ValidationError(where + "nodes must not be empty");
    }
    for (auto i : ev.nodes) {
      if (i >= n) throw ValidationError(where + "node " + std::to_string(i) + " out of range");
    }
    if (ev.kind == Event::Kind::kMixingOn) {
      if (!(ev.p >= 0.0 && ev.p <= 1.0)) throw ValidationError(where + "p must lie in [0, 1]");
      if (!(ev.probability >= 0.0 && ev.probability <= 1.0)) {
        throw ValidationError(where + "probability must lie in [0, 1]");
      }
    }
    if (ev.kind == Event::Kind::kDroopChange && !(ev.value > 0.0)) {
      throw ValidationError(where + "droop must be positive");
    }
  }
}

std::vector<std::size_t> ordered_events(std::span<const Event> events) {
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].time < events[b].time; });
  return order;
}

std::uint64_t snap(double t, double dt) {
  return static_cast<std::uint64_t>(std::llround(t / dt));
}

double lyapunov_online(std::span<const NodeState> nodes, std::span<const std::size_t> online) {
  double mean = 0.0;
  for (auto i : online) mean += nodes[i].pinner;
  mean /= static_cast<double>(online.size());
  double v = 0.0;
  for (auto i : online) v += (nodes[i].phi - mean) * (nodes[i].phi - mean);
  return 0.5 * v;
}

}  // namespace

std::vector<MixingEvent> mixing_windows(std::span<const Event> events, double horizon) {
  std::vector<MixingEvent> out;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    if (ev.kind != Event::Kind::kMixingOn) continue;
    for (auto node : ev.nodes) {
      MixingEvent m;
      m.nodes = {node};
      m.start = ev.time;
      m.end = std::numeric_limits<double>::infinity();
      m.p = ev.p;
      m.probability = ev.probability;
      for (std::size_t f = 0; f < events.size(); ++f) {
        const auto& off = events[f];
        if (off.kind != Event::Kind::kMixingOff || off.time < ev.time) continue;
        if (std::find(off.nodes.begin(), off.nodes.end(), node) == off.nodes.end()) continue;
        m.end = std::min(m.end, off.time);
      }
      m.validate(horizon, std::numeric_limits<std::size_t>::max());
      out.push_back(std::move(m));
    }
  }
  return out;
}

const char* event_kind_name(Event::Kind k) {
  switch (k) {
    case Event::Kind::kStepLoad: return "step_load";
    case Event::Kind::kDroopChange: return "droop_change";
    case Event::Kind::kPlug: return "plug";
    case Event::Kind::kUnplug: return "unplug";
    case Event::Kind::kMixingOn: return "mixing_on";
    case Event::Kind::kMixingOff: return "mixing_off";
  }
  return "?";
}

Event::Kind parse_event_kind(const std::string& s) {
  for (auto k : {Event::Kind::kStepLoad, Event::Kind::kDroopChange, Event::Kind::kPlug,
                 Event::Kind::kUnplug, Event::Kind::kMixingOn, Event::Kind::kMixingOff}) {
    if (s == event_kind_name(k)) return k;
  }
  throw ValidationError("unknown event kind '" + s +
                        "' (expected step_load|droop_change|plug|unplug|mixing_on|mixing_off)");
}

double recommended_k(std::span<const AcDer> ders) { return 0.8 * kHalfPi / scaled_max(ders); }
double recommended_c(std::span<const DcDer> ders) { return 0.8 * kHalfPi / scaled_max(ders); }

std::vector<double> effective_loads(const AcNetwork& net, std::span<const AcDer> ders) {
  const std::size_t n = ders.size();
  std::vector<double> loads(net.loads.begin(), net.loads.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (ders[i].online) continue;
    std::vector<std::size_t> mates;
    for (std::size_t j = 0; j < n; ++j) {
      if (ders[j].online && net.group[j] == net.group[i]) mates.push_back(j);
    }
    if (mates.empty()) {
      throw PartitionError("microgrid " + std::to_string(net.group[i]) +
                           " has no online DER to carry its load");
    }
    for (auto j : mates) loads[j] += loads[i] / static_cast<double>(mates.size());
    loads[i] = 0.0;
  }
  return loads;
}

std::vector<double> ac_power_flow(std::span<const AcDer> ders, const AcNetwork& net) {
  const std::size_t n = ders.size();
  if (net.electrical.node_count() != n || net.loads.size() != n || net.group.size() != n) {
    throw ValidationError("ac_power_flow: network size does not match the DER list");
  }
  const auto online = online_nodes(ders);
  require_connected(net.electrical, online, "electrical");
  std::vector<double> p = effective_loads(net, ders);
  for (const auto& e : net.electrical.edges()) {
    if (!ders[e.lo].online || !ders[e.hi].online) continue;
    const double f = e.weight * std::sin(ders[e.lo].delta - ders[e.hi].delta);
    p[e.lo] += f;
    p[e.hi] -= f;
  }
  return p;
}

DcSolution dc_solve(std::span<const double> v_refs, std::span<const DcDer> ders,
                    const DcNetwork& net) {
  const std::size_t n = ders.size();
  if (v_refs.size() != n) throw ValidationError("dc_solve: one reference voltage per DER");
  if (!(net.load_resistance > 0.0)) throw ValidationError("dc_solve: R_L must be positive");
  double num = 0.0;
  double den = std::isinf(net.load_resistance) ? 0.0 : 1.0 / net.load_resistance;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ders[i].online) continue;
    any = true;
    num += v_refs[i] / ders[i].resistance;
    den += 1.0 / ders[i].resistance;
  }
  if (!any) throw PartitionError("dc_solve: no DER online");
  DcSolution s;
  s.v_bus = num / den;
  s.current.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ders[i].online) continue;
    s.current[i] = (v_refs[i] - s.v_bus) / ders[i].resistance;
    total += s.current[i];
    s.residual = std::max(s.residual,
                          std::abs(v_refs[i] - ders[i].resistance * s.current[i] - s.v_bus));
  }
  const double load = std::isinf(net.load_resistance) ? 0.0 : s.v_bus / net.load_resistance;
  s.residual = std::max(s.residual, std::abs(total - load));
  return s;
}

DcSolution dc_solve_droop(std::span<const double> phis, std::span<const DcDer> ders,
                          const DcNetwork& net) {
  const std::size_t n = ders.size();
  if (phis.size() != n) throw ValidationError("dc_solve_droop: one phase per DER");
  if (!(net.load_resistance > 0.0)) throw ValidationError("dc_solve_droop: R_L must be positive");
  double num = 0.0;
  double den = std::isinf(net.load_resistance) ? 0.0 : 1.0 / net.load_resistance;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ders[i].online) continue;
    any = true;
    const double g = 1.0 / (ders[i].droop + ders[i].resistance);
    num += (net.v_star + phis[i] / net.c) * g;
    den += g;
  }
  if (!any) throw PartitionError("dc_solve_droop: no DER online");
  DcSolution s;
  s.v_bus = num / den;
  s.current.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ders[i].online) continue;
    s.current[i] =
        (net.v_star + phis[i] / net.c - s.v_bus) / (ders[i].droop + ders[i].resistance);
    total += s.current[i];
  }
  const double load = std::isinf(net.load_resistance) ? 0.0 : s.v_bus / net.load_resistance;
  s.residual = std::abs(total - load);
  return s;
}

AcSample ac_step(AcState& state, const AcNetwork& net, const ProtocolConfig& cfg,
                 std::uint64_t step_index, std::span<const MixingEvent> mixing) {
  const std::size_t n = state.ders.size();
  if (state.nodes.size() != n) throw ValidationError("ac_step: one consensus node per DER");
  const auto online = online_nodes<AcDer>(state.ders);
  require_connected(net.comm, online, "communication");

  AcSample out;
  out.power = ac_power_flow(state.ders, net);
  const auto loads = effective_loads(net, state.ders);
  out.balance_residual =
      std::abs(std::accumulate(out.power.begin(), out.power.end(), 0.0) -
               std::accumulate(loads.begin(), loads.end(), 0.0));

  std::vector<double> pins(n, 0.0);
  for (auto i : online) pins[i] = net.k * state.ders[i].droop * out.power[i];
  auto res = consensus_over_online(state.nodes, net.comm, online, pins, cfg, step_index, mixing);
  out.clamped_pinners = res.clamped;
  out.diagnostics = std::move(res.diagnostics);

  out.frequency.assign(n, kNaN);
  out.phi.assign(n, kNaN);
  out.pinner.assign(n, kNaN);
  for (auto i : online) {
    auto& der = state.ders[i];
    const double omega =
        net.omega_star - der.droop * out.power[i] + state.nodes[i].phi / net.k;
    out.frequency[i] = omega;
    out.phi[i] = state.nodes[i].phi;
    out.pinner[i] = pins[i];
    der.delta += cfg.dt * kTwoPi * (omega - net.omega_star);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!state.ders[i].online) out.power[i] = kNaN;
  }
  return out;
}

DcSample dc_step(DcState& state, const DcNetwork& net, const ProtocolConfig& cfg,
                 std::uint64_t step_index, std::span<const MixingEvent> mixing) {
  const std::size_t n = state.ders.size();
  if (state.nodes.size() != n || state.current.size() != n) {
    throw ValidationError("dc_step: one consensus node and current per DER");
  }
  const auto online = online_nodes<DcDer>(state.ders);
  require_connected(net.comm, online, "communication");

  DcSample out;
  std::vector<double> pins(n, 0.0);
  for (auto i : online) pins[i] = net.c * state.ders[i].droop * state.current[i];
  auto res = consensus_over_online(state.nodes, net.comm, online, pins, cfg, step_index, mixing);
  out.clamped_pinners = res.clamped;
  out.diagnostics = std::move(res.diagnostics);

  std::vector<double> phis(n, 0.0);
  for (auto i : online) phis[i] = state.nodes[i].phi;
  const auto loop = dc_solve_droop(phis, state.ders, net);
  out.v_ref.assign(n, kNaN);
  std::vector<double> refs(n, net.v_star);
  for (auto i : online) {
    refs[i] = net.v_star - state.ders[i].droop * loop.current[i] + phis[i] / net.c;
    out.v_ref[i] = refs[i];
  }
  // The network solve from the resulting references must reproduce the loop.
  const auto check = dc_solve(refs, state.ders, net);
  double mismatch = std::abs(check.v_bus - loop.v_bus);
  for (auto i : online) mismatch = std::max(mismatch, std::abs(check.current[i] - loop.current[i]));
  out.balance_residual = std::max({loop.residual, check.residual, mismatch});

  state.current = loop.current;
  out.v_bus = loop.v_bus;
  out.current.assign(n, kNaN);
  out.phi.assign(n, kNaN);
  out.pinner.assign(n, kNaN);
  for (auto i : online) {
    out.current[i] = loop.current[i];
    out.phi[i] = state.nodes[i].phi;
    out.pinner[i] = pins[i];
  }
  return out;
}

void validate(const AcSystem& sys) {
  const std::size_t n = sys.ders.size();
  const auto& net = sys.network;
  if (n == 0) throw ValidationError("AC system has no DER");
  if (net.electrical.node_count() != n) {
    throw ValidationError("electrical graph node count differs from the DER count");
  }
  if (net.comm.node_count() != n) {
    throw ValidationError("communication graph node count differs from the DER count");
  }
  if (net.loads.size() != n) throw ValidationError("one load per DER required");
  if (net.group.size() != n) throw ValidationError("one group id per DER required");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sys.ders[i].droop > 0.0)) {
      throw ValidationError("DER " + std::to_string(i) + ": droop must be positive");
    }
    if (!(sys.ders[i].rated > 0.0)) {
      throw ValidationError("DER " + std::to_string(i) + ": rated power must be positive");
    }
    if (!(net.loads[i] >= 0.0)) {
      throw ValidationError("DER " + std::to_string(i) + ": load must be non-negative");
    }
  }
  if (!(net.k > 0.0)) throw ValidationError("k must be positive");
  if (!(sys.horizon > 0.0)) throw ValidationError("horizon must be positive");
  validate_events(sys.events, n, sys.horizon);
  double worst = scaled_max(std::span<const AcDer>(sys.ders));
  for (const auto& ev : sys.events) {
    if (ev.kind != Event::Kind::kDroopChange) continue;
    for (auto i : ev.nodes) worst = std::max(worst, ev.value * sys.ders[i].rated);
  }
  if (net.k * worst >= kHalfPi) {
    std::ostringstream os;
    os << "scaling rule violated: k * max(n_i * rated_i) = " << net.k * worst
       << " must stay below pi/2; choose k < " << kHalfPi / worst;
    throw ValidationError(os.str());
  }
  require_connected(net.electrical, online_nodes<AcDer>(sys.ders), "electrical");
  require_connected(net.comm, online_nodes<AcDer>(sys.ders), "communication");
}

void validate(const DcSystem& sys) {
  const std::size_t n = sys.ders.size();
  const auto& net = sys.network;
  if (n == 0) throw ValidationError("DC system has no DER");
  if (net.comm.node_count() != n) {
    throw ValidationError("communication graph node count differs from the DER count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = sys.ders[i];
    const std::string who = "DER " + std::to_string(i) + ": ";
    if (!(d.droop > 0.0)) throw ValidationError(who + "droop must be positive");
    if (!(d.resistance > 0.0)) throw ValidationError(who + "line resistance must be positive");
    if (!(d.rated_current > 0.0)) throw ValidationError(who + "rated current must be positive");
  }
  if (!(net.load_resistance > 0.0)) throw ValidationError("R_L must be positive or infinite");
  if (!(net.c > 0.0)) throw ValidationError("c must be positive");
  if (!(sys.horizon > 0.0)) throw ValidationError("horizon must be positive");
  validate_events(sys.events, n, sys.horizon);
  double worst = scaled_max(std::span<const DcDer>(sys.ders));
  for (const auto& ev : sys.events) {
    if (ev.kind == Event::Kind::kStepLoad && !(ev.value > 0.0)) {
      throw ValidationError("step_load: R_L must be positive or infinite");
    }
    if (ev.kind != Event::Kind::kDroopChange) continue;
    for (auto i : ev.nodes) worst = std::max(worst, ev.value * sys.ders[i].rated_current);
  }
  if (net.c * worst >= kHalfPi) {
    std::ostringstream os;
    os << "scaling rule violated: c * max(m_i * I_rated) = " << net.c * worst
       << " must stay below pi/2; choose c < " << kHalfPi / worst;
    throw ValidationError(os.str());
  }
  require_connected(net.comm, online_nodes<DcDer>(sys.ders), "communication");
}

namespace {

template <typename Der>
void apply_topology(std::vector<Der>& ders, const Event& ev) {
  for (auto i : ev.nodes) ders[i].online = ev.kind == Event::Kind::kPlug;
}

void record_extremes(TimeSeries& ts, std::span<const double> pins) {
  for (double p : pins) {
    if (std::isnan(p)) continue;
    ts.max_pinner = std::max(ts.max_pinner, p);
    ts.min_pinner = std::min(ts.min_pinner, p);
  }
}

}  // namespace

TimeSeries run_ac(const AcSystem& sys, const ProtocolConfig& cfg) {
  validate(sys);
  cfg.validate();
  const std::size_t n = sys.ders.size();
  AcNetwork net = sys.network;
  AcState st{sys.ders, std::vector<NodeState>(n)};
  const auto mixing = mixing_windows(sys.events, sys.horizon);
  const auto order = ordered_events(sys.events);
  const auto steps = snap(sys.horizon, cfg.dt);

  TimeSeries ts;
  ts.kind = PlantKind::kAc;
  ts.der_count = n;
  ts.nominal = net.omega_star;

  auto droops = [&] {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = st.ders[i].droop;
    return d;
  };
  auto total_load = [&] { return std::accumulate(net.loads.begin(), net.loads.end(), 0.0); };

  {
    const auto p = ac_power_flow(st.ders, net);
    std::vector<double> freq(n), norm(n), phi(n), pin(n);
    for (std::size_t i = 0; i < n; ++i) {
      norm[i] = st.ders[i].droop * p[i];
      pin[i] = net.k * norm[i];
      st.nodes[i].phi = std::clamp(pin[i], 0.0, kHalfPi);
      st.nodes[i].pinner = st.nodes[i].phi;
      phi[i] = st.nodes[i].phi;
      freq[i] = net.omega_star - norm[i] + phi[i] / net.k;
    }
    ts.min_pinner = ts.max_pinner = pin.empty() ? 0.0 : pin[0];
    record_extremes(ts, pin);
    ts.times.push_back(0.0);
    ts.frequency.push_back(freq);
    ts.power.push_back(p);
    ts.normalized.push_back(norm);
    ts.phi.push_back(phi);
    ts.pinner.push_back(pin);
    ts.droop.push_back(droops());
    ts.total_load.push_back(total_load());
    ts.lyapunov.push_back(lyapunov_online(st.nodes, online_nodes<AcDer>(st.ders)));
  }

  std::size_t next = 0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    while (next < order.size() && snap(sys.events[order[next]].time, cfg.dt) <= k) {
      const auto& ev = sys.events[order[next++]];
      switch (ev.kind) {
        case Event::Kind::kStepLoad:
          for (auto i : ev.nodes) net.loads[i] += ev.value / static_cast<double>(ev.nodes.size());
          break;
        case Event::Kind::kDroopChange:
          for (auto i : ev.nodes) st.ders[i].droop = ev.value;
          break;
        case Event::Kind::kUnplug:
          apply_topology(st.ders, ev);
          break;
        case Event::Kind::kPlug:
          apply_topology(st.ders, ev);
          for (auto i : ev.nodes) {
            double sum = 0.0;
            std::size_t cnt = 0;
            for (const auto& nb : net.electrical.neighbors(i)) {
              if (!st.ders[nb.node].online) continue;
              sum += st.ders[nb.node].delta;
              ++cnt;
            }
            if (cnt > 0) st.ders[i].delta = sum / static_cast<double>(cnt);
          }
          break;
        case Event::Kind::kMixingOn:
        case Event::Kind::kMixingOff:
          break;
      }
      if (ev.kind == Event::Kind::kPlug || ev.kind == Event::Kind::kUnplug) {
        const auto online = online_nodes<AcDer>(st.ders);
        require_connected(net.electrical, online, "electrical");
        require_connected(net.comm, online, "communication");
      }
      ts.events_applied.push_back(describe(ev));
    }

    auto s = ac_step(st, net, cfg, k, mixing);
    std::vector<double> norm(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
      if (st.ders[i].online) norm[i] = st.ders[i].droop * s.power[i];
    }
    record_extremes(ts, s.pinner);
    ts.clamped_pinners += s.clamped_pinners;
    ts.max_balance_residual = std::max(ts.max_balance_residual, s.balance_residual);
    for (auto& d : s.diagnostics) ts.diagnostics.push_back(std::move(d));
    ts.times.push_back(static_cast<double>(k + 1) * cfg.dt);
    ts.frequency.push_back(std::move(s.frequency));
    ts.power.push_back(std::move(s.power));
    ts.normalized.push_back(std::move(norm));
    ts.phi.push_back(std::move(s.phi));
    ts.pinner.push_back(std::move(s.pinner));
    ts.droop.push_back(droops());
    ts.total_load.push_back(total_load());
    ts.lyapunov.push_back(lyapunov_online(st.nodes, online_nodes<AcDer>(st.ders)));
  }
  return ts;
}

TimeSeries run_dc(const DcSystem& sys, const ProtocolConfig& cfg) {
  validate(sys);
  cfg.validate();
  const std::size_t n = sys.ders.size();
  DcNetwork net = sys.network;
  DcState st{sys.ders, std::vector<NodeState>(n), std::vector<double>(n, 0.0)};
  const auto mixing = mixing_windows(sys.events, sys.horizon);
  const auto order = ordered_events(sys.events);
  const auto steps = snap(sys.horizon, cfg.dt);

  TimeSeries ts;
  ts.kind = PlantKind::kDc;
  ts.der_count = n;
  ts.nominal = net.v_star;

  auto droops = [&] {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = st.ders[i].droop;
    return d;
  };
  auto load_current = [&](double vb) {
    return std::isinf(net.load_resistance) ? 0.0 : vb / net.load_resistance;
  };

  {
    std::vector<double> zero(n, 0.0);
    const auto sol = dc_solve_droop(zero, st.ders, net);
    st.current = sol.current;
    std::vector<double> norm(n), pin(n), phi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      norm[i] = st.ders[i].droop * sol.current[i];
      pin[i] = net.c * norm[i];
      st.nodes[i].pinner = pin[i];
    }
    ts.min_pinner = ts.max_pinner = pin.empty() ? 0.0 : pin[0];
    record_extremes(ts, pin);
    ts.times.push_back(0.0);
    ts.v_bus.push_back(sol.v_bus);
    ts.power.push_back(sol.current);
    ts.normalized.push_back(norm);
    ts.phi.push_back(phi);
    ts.pinner.push_back(pin);
    ts.droop.push_back(droops());
    ts.total_load.push_back(load_current(sol.v_bus));
    ts.lyapunov.push_back(lyapunov_online(st.nodes, online_nodes<DcDer>(st.ders)));
    ts.max_balance_residual = sol.residual;
  }

  std::size_t next = 0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    while (next < order.size() && snap(sys.events[order[next]].time, cfg.dt) <= k) {
      const auto& ev = sys.events[order[next++]];
      switch (ev.kind) {
        case Event::Kind::kStepLoad:
          net.load_resistance = ev.value;
          break;
        case Event::Kind::kDroopChange:
          for (auto i : ev.nodes) st.ders[i].droop = ev.value;
          break;
        case Event::Kind::kUnplug:
        case Event::Kind::kPlug:
          apply_topology(st.ders, ev);
          for (auto i : ev.nodes) st.current[i] = 0.0;
          require_connected(net.comm, online_nodes<DcDer>(st.ders), "communication");
          break;
        case Event::Kind::kMixingOn:
        case Event::Kind::kMixingOff:
          break;
      }
      ts.events_applied.push_back(describe(ev));
    }

    auto s = dc_step(st, net, cfg, k, mixing);
    std::vector<double> norm(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
      if (st.ders[i].online) norm[i] = st.ders[i].droop * s.current[i];
    }
    record_extremes(ts, s.pinner);
    ts.clamped_pinners += s.clamped_pinners;
    ts.max_balance_residual = std::max(ts.max_balance_residual, s.balance_residual);
    for (auto& d : s.diagnostics) ts.diagnostics.push_back(std::move(d));
    ts.times.push_back(static_cast<double>(k + 1) * cfg.dt);
    ts.v_bus.push_back(s.v_bus);
    ts.total_load.push_back(load_current(s.v_bus));
    ts.power.push_back(std::move(s.current));
    ts.normalized.push_back(std::move(norm));
    ts.phi.push_back(std::move(s.phi));
    ts.pinner.push_back(std::move(s.pinner));
    ts.droop.push_back(droops());
    ts.lyapunov.push_back(lyapunov_online(st.nodes, online_nodes<DcDer>(st.ders)));
  }
  return ts;
}

AcSystem reference_ac15() {
  AcSystem sys;
  const std::vector<double> droops = {5e-3,   4e-3, 3e-3, 2.5e-3, 3.5e-3, 4.5e-3, 2e-3, 3e-3,
                                      4e-3,   5e-3, 2.5e-3, 3.5e-3, 4e-3, 2e-3,   3e-3};
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t g = 0; g < 5; ++g) {
    const std::size_t a = 3 * g;
    edges.push_back({a, a + 1});
    edges.push_back({a + 1, a + 2});
    edges.push_back({a, a + 2});
  }
  for (std::size_t g = 0; g < 5; ++g) edges.push_back({3 * g + 2, (3 * g + 3) % 15});
  for (std::size_t i = 0; i < 15; ++i) {
    sys.ders.push_back({droops[i], 60.0, 0.0, true});
    sys.network.group.push_back(i / 3);
  }
  sys.network.electrical = netgraph::build_graph(15, edges, std::vector<double>(edges.size(), 200.0));
  sys.network.comm = netgraph::build_graph(15, edges, std::vector<double>(edges.size(), 10.0));
  sys.network.loads.assign(15, 20.0);
  sys.network.k = recommended_k(sys.ders);
  sys.events.push_back({10.0, Event::Kind::kStepLoad, {3, 4, 5}, 40.0});
  sys.events.push_back({17.0, Event::Kind::kDroopChange, {0}, 4.7e-3});
  sys.events.push_back({20.0, Event::Kind::kDroopChange, {6}, 2.1e-3});
  sys.horizon = 30.0;
  return sys;
}

DcSystem reference_dc9() {
  DcSystem sys;
  const std::vector<double> droops = {1.0, 0.8, 1.2, 1.0, 0.9, 1.1, 1.0, 0.8, 1.2};
  for (double m : droops) sys.ders.push_back({m, 0.002, 5.0, true});
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < 9; ++i) edges.push_back({i, (i + 1) % 9});
  edges.push_back({0, 4});
  edges.push_back({2, 6});
  edges.push_back({3, 7});
  sys.network.comm = netgraph::build_graph(9, edges);
  sys.network.c = recommended_c(sys.ders);
  sys.events.push_back({20.0, Event::Kind::kStepLoad, {}, 3.0});
  sys.events.push_back({20.0, Event::Kind::kMixingOn, {1, 2, 4}, 0.0, 0.1, 1.0});
  sys.events.push_back({28.0, Event::Kind::kUnplug, {1}});
  sys.events.push_back({35.0, Event::Kind::kPlug, {1}});
  sys.horizon = 45.0;
  return sys;
}

}  // namespace qsdc::microgrid
