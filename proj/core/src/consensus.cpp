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

#include "qsdc/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qsdc/error.hpp"
#include "qsdc/rng.hpp"

namespace qsdc::consensus {
namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kMinCoherence = 1e-3;

void check_sizes(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    std::ostringstream os;
    os << what << ": expected " << expected << " entries, got " << got;
    throw ValidationError(os.str());
  }
}

// Classical RK4 over a flat state vector.
template <typename Rhs>
std::vector<double> rk4(const std::vector<double>& y, double h, const Rhs& f) {
  const std::size_t n = y.size();
  std::vector<double> tmp(n);
  auto axpy = [&](const std::vector<double>& k, double a) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + a * k[i];
    return tmp;
  };
  const auto k1 = f(y);
  const auto k2 = f(axpy(k1, 0.5 * h));
  const auto k3 = f(axpy(k2, 0.5 * h));
  const auto k4 = f(axpy(k3, h));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

std::vector<BlochVector> evolve_full(std::span<const double> phis,
                                     std::span<const double> thetas,
                                     std::span<const double> alphas, const CommGraph& g,
                                     const ProtocolConfig& cfg,
                                     const std::vector<std::vector<double>>& mixing) {
  const std::size_t n = phis.size();
  if (n > quantum::kMaxDenseQubits) {
    throw CapacityError("full backend holds at most " +
                        std::to_string(quantum::kMaxDenseQubits) + " nodes, got " +
                        std::to_string(n) + "; use --backend bloch or phase");
  }
  std::vector<quantum::PureQubitSpec> specs(n);
  for (std::size_t i = 0; i < n; ++i) specs[i] = {thetas[i], phis[i]};
  auto rho = quantum::product_state(specs);
  rho = quantum::evolve(rho, quantum::make_jump_set(g, alphas), cfg.dt, cfg.substeps);
  for (std::size_t i = 0; i < n; ++i) {
    for (double p : mixing[i]) rho = quantum::depolarize_local(rho, i, p);
  }
  std::vector<BlochVector> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quantum::local_bloch(rho, i);
  return out;
}

std::vector<BlochVector> evolve_bloch(std::span<const double> phis,
                                      std::span<const double> thetas,
                                      std::span<const double> alphas, const CommGraph& g,
                                      const ProtocolConfig& cfg,
                                      const std::vector<std::vector<double>>& mixing) {
  const std::size_t n = phis.size();
  std::vector<double> y(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = BlochVector::from_polar(1.0, thetas[i], phis[i]);
    y[i] = b.x;
    y[n + i] = b.y;
    y[2 * n + i] = b.z;
  }
  auto f = [&](const std::vector<double>& v) {
    BlochState st;
    st.x.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
    st.y.assign(v.begin() + static_cast<std::ptrdiff_t>(n),
                v.begin() + static_cast<std::ptrdiff_t>(2 * n));
    st.z.assign(v.begin() + static_cast<std::ptrdiff_t>(2 * n), v.end());
    const auto d = bloch_rhs_held(st, alphas, g);
    std::vector<double> out;
    out.reserve(3 * n);
    out.insert(out.end(), d.dx.begin(), d.dx.end());
    out.insert(out.end(), d.dy.begin(), d.dy.end());
    out.insert(out.end(), d.dz.begin(), d.dz.end());
    return out;
  };
  const double h = cfg.dt / cfg.substeps;
  for (int k = 0; k < cfg.substeps; ++k) y = rk4(y, h, f);
  std::vector<BlochVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double shrink = 1.0;
    for (double p : mixing[i]) shrink *= quantum::depolarizing_shrink(p);
    out[i] = {shrink * y[i], shrink * y[n + i], shrink * y[2 * n + i]};
  }
  return out;
}

std::vector<BlochVector> evolve_phase(std::span<const double> phis,
                                      std::span<const double> thetas,
                                      std::span<const double> alphas, const CommGraph& g,
                                      const ProtocolConfig& cfg,
                                      const std::vector<std::vector<double>>& mixing) {
  const std::size_t n = phis.size();
  std::vector<double> y(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = phis[i];
    y[n + i] = std::sin(thetas[i]);
  }
  auto f = [&](const std::vector<double>& v) {
    const std::span<const double> phi(v.data(), n);
    const std::span<const double> s(v.data() + n, n);
    const auto d = phase_flow_rhs(phi, s, alphas, g);
    std::vector<double> out(d.dphi);
    out.insert(out.end(), d.ds.begin(), d.ds.end());
    return out;
  };
  const double h = cfg.dt / cfg.substeps;
  for (int k = 0; k < cfg.substeps; ++k) y = rk4(y, h, f);
  std::vector<BlochVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[n + i];
    for (double p : mixing[i]) s *= quantum::depolarizing_shrink(p);
    out[i] = {s * std::cos(y[i]), s * std::sin(y[i]), std::nan("")};
  }
  return out;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kFull: return "full";
    case Backend::kBloch: return "bloch";
    case Backend::kPhase: return "phase";
  }
  return "?";
}

const char* mode_name(Mode m) { return m == Mode::kQsdc ? "qsdc" : "qdc_legacy"; }

Backend parse_backend(const std::string& s) {
  if (s == "full") return Backend::kFull;
  if (s == "bloch") return Backend::kBloch;
  if (s == "phase") return Backend::kPhase;
  throw ValidationError("unknown backend '" + s + "' (expected full|bloch|phase)");
}

Mode parse_mode(const std::string& s) {
  if (s == "qsdc") return Mode::kQsdc;
  if (s == "qdc_legacy") return Mode::kQdcLegacy;
  throw ValidationError("unknown mode '" + s + "' (expected qsdc|qdc_legacy)");
}

ThetaDistribution ThetaDistribution::uniform(double lo, double hi) {
  ThetaDistribution d;
  d.kind = Kind::kUniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

ThetaDistribution ThetaDistribution::fixed(double value) {
  ThetaDistribution d;
  d.kind = Kind::kFixed;
  d.value = value;
  return d;
}

double ThetaDistribution::sample(std::uint64_t seed, std::uint64_t node,
                                 std::uint64_t step) const {
  if (kind == Kind::kFixed) return value;
  auto gen = rng::make_stream(seed, node, step, rng::Purpose::kTheta);
  return lo + (hi - lo) * rng::uniform01(gen);
}

double ThetaDistribution::mean_sin() const {
  if (kind == Kind::kFixed) return std::sin(value);
  return (std::cos(lo) - std::cos(hi)) / (hi - lo);
}

double ThetaDistribution::mean_cos() const {
  if (kind == Kind::kFixed) return std::cos(value);
  return (std::sin(hi) - std::sin(lo)) / (hi - lo);
}

void ThetaDistribution::validate(bool closed) const {
  const double pi = std::numbers::pi;
  if (kind == Kind::kFixed) {
    if (!(value > 0.0 && value < pi)) {
      throw ValidationError("theta.value must lie in (0, pi)");
    }
    return;
  }
  const bool ok = closed ? (lo >= 0.0 && lo < hi && hi <= pi)
                         : (lo > 0.0 && lo < hi && hi < pi);
  if (!ok) {
    throw ValidationError(closed ? "theta range must satisfy 0 <= lo < hi <= pi"
                                 : "theta range must satisfy 0 < lo < hi < pi");
  }
}

ThetaDistribution ProtocolConfig::effective_theta() const {
  return mode == Mode::kQdcLegacy ? ThetaDistribution::fixed(kHalfPi) : theta;
}

void ProtocolConfig::validate() const {
  if (!(dt > 0.0 && dt <= 0.1)) throw ValidationError("dt must lie in (0, 0.1]");
  if (substeps < 1) throw ValidationError("substeps must be at least 1");
  if (shots && *shots == 0) throw ValidationError("shots must be at least 1");
  theta.validate(false);
}

void MixingEvent::validate(double horizon, std::size_t node_count) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("mixing p must lie in [0, 1]");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw ValidationError("mixing probability must lie in [0, 1]");
  }
  if (!(start >= 0.0 && start <= end && start <= horizon)) {
    throw ValidationError("mixing window must satisfy 0 <= start <= end, start <= horizon");
  }
  for (auto i : nodes) {
    if (i >= node_count) throw ValidationError("mixing node index out of range");
  }
}

BlochState BlochState::from(std::span<const BlochVector> v) {
  BlochState s;
  for (const auto& b : v) {
    s.x.push_back(b.x);
    s.y.push_back(b.y);
    s.z.push_back(b.z);
  }
  return s;
}

BlochDerivative bloch_rhs(const BlochState& st, std::span<const double> pinners,
                          const CommGraph& g) {
  const std::size_t n = g.node_count();
  check_sizes(n, st.size(), "bloch_rhs");
  if (!pinners.empty()) check_sizes(n, pinners.size(), "bloch_rhs pinners");
  BlochDerivative d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                    std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!pinners.empty()) {
      const double s = std::hypot(st.x[i], st.y[i]);
      d.dx[i] += s * std::cos(pinners[i]) - st.x[i];
      d.dy[i] += s * std::sin(pinners[i]) - st.y[i];
    }
    for (const auto& nb : g.neighbors(i)) {
      d.dx[i] += nb.weight * (st.x[nb.node] - st.x[i]);
      d.dy[i] += nb.weight * (st.y[nb.node] - st.y[i]);
      d.dz[i] += nb.weight * (st.z[nb.node] - st.z[i]);
    }
  }
  return d;
}

BlochDerivative bloch_rhs_held(const BlochState& st, std::span<const double> rotation,
                               const CommGraph& g) {
  const std::size_t n = g.node_count();
  check_sizes(n, st.size(), "bloch_rhs_held");
  check_sizes(n, rotation.size(), "bloch_rhs_held rotation");
  BlochDerivative d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                    std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(rotation[i]);
    const double s = std::sin(rotation[i]);
    d.dx[i] = c * st.x[i] - s * st.y[i] - st.x[i];
    d.dy[i] = s * st.x[i] + c * st.y[i] - st.y[i];
    for (const auto& nb : g.neighbors(i)) {
      d.dx[i] += nb.weight * (st.x[nb.node] - st.x[i]);
      d.dy[i] += nb.weight * (st.y[nb.node] - st.y[i]);
      d.dz[i] += nb.weight * (st.z[nb.node] - st.z[i]);
    }
  }
  return d;
}

std::vector<double> phase_rhs(std::span<const double> phi, std::span<const double> s,
                              std::span<const double> pinners, const CommGraph& g) {
  const std::size_t n = g.node_count();
  check_sizes(n, phi.size(), "phase_rhs phi");
  check_sizes(n, s.size(), "phase_rhs s");
  check_sizes(n, pinners.size(), "phase_rhs pinners");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s[i] > 0.0)) {
      throw DegenerateCoherence("phase_rhs: coherence of node " + std::to_string(i) +
                                " is zero");
    }
    double v = std::sin(pinners[i] - phi[i]);
    for (const auto& nb : g.neighbors(i)) {
      v += nb.weight * (s[nb.node] / s[i]) * std::sin(phi[nb.node] - phi[i]);
    }
    d[i] = v;
  }
  return d;
}

PhaseFlowDerivative phase_flow_rhs(std::span<const double> phi, std::span<const double> s,
                                   std::span<const double> rotation, const CommGraph& g) {
  const std::size_t n = g.node_count();
  check_sizes(n, phi.size(), "phase_flow_rhs phi");
  check_sizes(n, s.size(), "phase_flow_rhs s");
  check_sizes(n, rotation.size(), "phase_flow_rhs rotation");
  PhaseFlowDerivative d{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s[i] > 0.0)) {
      throw DegenerateCoherence("phase_flow_rhs: coherence of node " + std::to_string(i) +
                                " is zero");
    }
    double dphi = std::sin(rotation[i]);
    double ds = s[i] * (std::cos(rotation[i]) - 1.0);
    for (const auto& nb : g.neighbors(i)) {
      const double diff = phi[nb.node] - phi[i];
      dphi += nb.weight * (s[nb.node] / s[i]) * std::sin(diff);
      ds += nb.weight * (s[nb.node] * std::cos(diff) - s[i]);
    }
    d.dphi[i] = dphi;
    d.ds[i] = ds;
  }
  return d;
}

StepResult qsdc_step(std::span<const NodeState> states, const CommGraph& g,
                     const ProtocolConfig& cfg, std::span<const double> pinners,
                     std::uint64_t step_index, std::span<const MixingEvent> events,
                     std::optional<std::span<const double>> thetas) {
  const std::size_t n = g.node_count();
  check_sizes(n, states.size(), "qsdc_step states");
  check_sizes(n, pinners.size(), "qsdc_step pinners");
  if (thetas) check_sizes(n, thetas->size(), "qsdc_step thetas");
  cfg.validate();

  StepResult out;
  out.states.assign(states.begin(), states.end());
  const double t = static_cast<double>(step_index) * cfg.dt;
  const auto theta_dist = cfg.effective_theta();

  std::vector<double> phis(n), th(n), alphas(n), pins(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pin = pinners[i];
    if (!(pin >= 0.0 && pin <= kHalfPi)) {
      ++out.clamped_pinners;
      pin = std::clamp(std::isfinite(pin) ? pin : 0.0, 0.0, kHalfPi);
    }
    pins[i] = pin;
    phis[i] = states[i].phi;
    th[i] = thetas ? (*thetas)[i] : theta_dist.sample(cfg.seed, i, step_index);
    alphas[i] = pin - phis[i];
  }

  std::vector<std::vector<double>> mixing(n);
  for (const auto& ev : events) {
    if (!ev.covers(t)) continue;
    for (auto i : ev.nodes) {
      if (i >= n) throw ValidationError("mixing event names node outside the graph");
      bool fire = ev.probability >= 1.0;
      if (!fire && ev.probability > 0.0) {
        auto gen = rng::make_stream(cfg.seed, i, step_index, rng::Purpose::kMixing);
        fire = rng::uniform01(gen) < ev.probability;
      }
      if (fire) mixing[i].push_back(ev.p);
    }
  }

  switch (cfg.backend) {
    case Backend::kFull: out.observed = evolve_full(phis, th, alphas, g, cfg, mixing); break;
    case Backend::kBloch: out.observed = evolve_bloch(phis, th, alphas, g, cfg, mixing); break;
    case Backend::kPhase: out.observed = evolve_phase(phis, th, alphas, g, cfg, mixing); break;
  }

  out.estimates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = out.states[i];
    node.theta = th[i];
    node.pinner = pins[i];
    const auto& obs = out.observed[i];
    node.s = obs.s();
    if (node.s < kMinCoherence) {
      std::ostringstream os;
      os << "step " << step_index << ": node " << i << " coherence " << node.s
         << " below 1e-3; phase update skipped";
      out.diagnostics.push_back(os.str());
      continue;
    }
    try {
      measurement::PhaseEstimate est;
      if (cfg.exact()) {
        est = cfg.mode == Mode::kQsdc ? measurement::estimate_phase_qsdc(obs.x, obs.y)
                                      : measurement::estimate_phase_qdc(obs.x);
      } else {
        const auto kx = rng::stream_key(cfg.seed, i, step_index, rng::Purpose::kSampleX);
        const auto hx = measurement::sample_basis(obs, measurement::Basis::X, *cfg.shots, kx);
        if (cfg.mode == Mode::kQsdc) {
          const auto ky = rng::stream_key(cfg.seed, i, step_index, rng::Purpose::kSampleY);
          const auto hy =
              measurement::sample_basis(obs, measurement::Basis::Y, *cfg.shots, ky);
          est = measurement::estimate_phase_qsdc(hx, hy);
        } else {
          est = measurement::estimate_phase_qdc(hx);
        }
      }
      out.estimates[i] = est;
      node.phi = est.phi_hat;
    } catch (const DegenerateCoherence& e) {
      out.diagnostics.push_back("step " + std::to_string(step_index) + ": node " +
                                std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

PinnerSignal constant_pinner(double value) {
  return [value](double, std::size_t) { return value; };
}

PinnerSignal constant_pinners(std::vector<double> values) {
  return [v = std::move(values)](double, std::size_t i) { return v.at(i); };
}

Trajectory run_consensus(std::span<const double> init_phis, const PinnerSignal& pinners,
                         const CommGraph& g, const ProtocolConfig& cfg, double horizon,
                         std::span<const MixingEvent> events, const RunOptions& options) {
  const std::size_t n = g.node_count();
  check_sizes(n, init_phis.size(), "run_consensus initial phases");
  if (!(horizon > 0.0)) throw ValidationError("run_consensus: horizon must be positive");
  cfg.validate();
  for (const auto& ev : events) ev.validate(horizon, n);
  if (options.initial_thetas) {
    check_sizes(n, options.initial_thetas->size(), "run_consensus initial thetas");
  }

  const auto steps = static_cast<std::uint64_t>(std::llround(horizon / cfg.dt));
  Trajectory tr;
  tr.backend = cfg.backend;
  tr.mode = cfg.mode;
  tr.seed = cfg.seed;
  tr.phi.assign(n, {});
  tr.pinner.assign(n, {});

  std::vector<NodeState> states(n);
  std::vector<double> pins(n);
  auto record = [&](double t) {
    tr.times.push_back(t);
    for (std::size_t i = 0; i < n; ++i) {
      tr.phi[i].push_back(states[i].phi);
      tr.pinner[i].push_back(pins[i]);
    }
    const double mean_pin = std::accumulate(pins.begin(), pins.end(), 0.0) / static_cast<double>(n);
    std::vector<double> phis(n);
    for (std::size_t i = 0; i < n; ++i) phis[i] = states[i].phi;
    tr.lyapunov.push_back(lyapunov(phis, mean_pin));
  };

  for (std::size_t i = 0; i < n; ++i) {
    states[i].phi = init_phis[i];
    pins[i] = std::clamp(pinners(0.0, i), 0.0, kHalfPi);
    states[i].pinner = pins[i];
  }
  record(0.0);

  for (std::uint64_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = pinners(t, i);
    std::optional<std::span<const double>> th;
    if (k == 0 && options.initial_thetas) th = std::span<const double>(*options.initial_thetas);
    auto res = qsdc_step(states, g, cfg, raw, k, events, th);
    states = std::move(res.states);
    for (std::size_t i = 0; i < n; ++i) pins[i] = states[i].pinner;
    tr.clamped_pinners += res.clamped_pinners;
    for (auto& d : res.diagnostics) tr.diagnostics.push_back(std::move(d));
    if (options.record_observed) tr.observed.push_back(std::move(res.observed));
    record(static_cast<double>(k + 1) * cfg.dt);
  }
  return tr;
}

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double convergence_rate(const CommGraph& g, std::span<const double> edge_weights,
                        double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < kHalfPi)) {
    throw OutOfRegionError(
        "convergence_rate: epsilon must satisfy 0 <= epsilon < pi/2; the invariant set "
        "argument does not hold outside it");
  }
  check_sizes(g.edge_count(), edge_weights.size(), "convergence_rate weights");
  const Eigen::MatrixXd b = netgraph::incidence_matrix(g);
  Eigen::VectorXd w(static_cast<Eigen::Index>(edge_weights.size()));
  for (std::size_t e = 0; e < edge_weights.size(); ++e) {
    w(static_cast<Eigen::Index>(e)) = edge_weights[e];
  }
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const Eigen::MatrixXd m = sinc(epsilon) * Eigen::MatrixXd::Identity(n, n) +
                            sinc(2.0 * epsilon) * (b * w.asDiagonal() * b.transpose());
  return netgraph::lambda_min_sym(m);
}

double convergence_rate(const CommGraph& g, double epsilon) {
  std::vector<double> w;
  for (const auto& e : g.edges()) w.push_back(e.weight);
  return convergence_rate(g, w, epsilon);
}

double lyapunov(std::span<const double> phis, double pinner) {
  double v = 0.0;
  for (double p : phis) v += (p - pinner) * (p - pinner);
  return 0.5 * v;
}

}  // namespace qsdc::consensus
