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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qsdc/consensus.hpp"
#include "qsdc/error.hpp"

namespace qsdc::consensus {
namespace {

using testing::Gen;
using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;
constexpr double kPi = std::numbers::pi;

CommGraph triangle() { return netgraph::build_graph(3, Pairs{{0, 1}, {1, 2}, {0, 2}}); }

ProtocolConfig exact_config(Backend b, double dt = 0.01) {
  ProtocolConfig c;
  c.backend = b;
  c.dt = dt;
  c.seed = 1;
  return c;
}

TEST(Names, RoundTrip) {
  for (auto b : {Backend::kFull, Backend::kBloch, Backend::kPhase}) {
    EXPECT_EQ(parse_backend(backend_name(b)), b);
  }
  for (auto m : {Mode::kQsdc, Mode::kQdcLegacy}) EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_THROW(parse_backend("dense"), ValidationError);
  EXPECT_THROW(parse_mode("qdc"), ValidationError);
}

TEST(ThetaDistribution, SamplesInRangeAndReproducible) {
  const auto d = ThetaDistribution::uniform(0.2, kPi - 0.2);
  for (std::uint64_t k = 0; k < 500; ++k) {
    const double v = d.sample(9, 2, k);
    EXPECT_GE(v, 0.2);
    EXPECT_LT(v, kPi - 0.2);
    EXPECT_EQ(v, d.sample(9, 2, k));
  }
  EXPECT_NE(d.sample(9, 2, 0), d.sample(9, 3, 0));
  EXPECT_NE(d.sample(9, 2, 0), d.sample(10, 2, 0));
  EXPECT_EQ(ThetaDistribution::fixed(1.3).sample(1, 2, 3), 1.3);
}

TEST(ThetaDistribution, MeansMatchQuadrature) {
  const auto d = ThetaDistribution::uniform(0.3, 2.5);
  const double w = 2.5 - 0.3;
  EXPECT_NEAR(d.mean_sin(), testing::simpson([](double t) { return std::sin(t); }, 0.3, 2.5) / w,
              1e-12);
  EXPECT_NEAR(d.mean_cos(), testing::simpson([](double t) { return std::cos(t); }, 0.3, 2.5) / w,
              1e-12);
  EXPECT_DOUBLE_EQ(ThetaDistribution::fixed(0.5).mean_sin(), std::sin(0.5));
}

TEST(ThetaDistribution, Validation) {
  EXPECT_NO_THROW(ThetaDistribution::uniform(0.1, 3.0).validate());
  EXPECT_THROW(ThetaDistribution::uniform(0.0, 3.0).validate(), ValidationError);
  EXPECT_NO_THROW(ThetaDistribution::uniform(0.0, kPi).validate(true));
  EXPECT_THROW(ThetaDistribution::uniform(1.0, 1.0).validate(true), ValidationError);
  EXPECT_THROW(ThetaDistribution::fixed(kPi).validate(), ValidationError);
}

TEST(ProtocolConfig, ValidationAndLegacyTheta) {
  ProtocolConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(c.exact());
  c.dt = 0.2;
  EXPECT_THROW(c.validate(), ValidationError);
  c.dt = 0.01;
  c.substeps = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.substeps = 1;
  c.shots = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.shots.reset();
  c.mode = Mode::kQdcLegacy;
  const auto t = c.effective_theta();
  EXPECT_EQ(t.kind, ThetaDistribution::Kind::kFixed);
  EXPECT_DOUBLE_EQ(t.value, kPi / 2);
}

TEST(MixingEvent, WindowAndValidation) {
  MixingEvent ev{{1}, 2.0, 5.0, 0.1, 1.0};
  EXPECT_TRUE(ev.covers(2.0));
  EXPECT_TRUE(ev.covers(4.99));
  EXPECT_FALSE(ev.covers(5.0));
  EXPECT_NO_THROW(ev.validate(10.0, 3));
  EXPECT_THROW(ev.validate(10.0, 1), ValidationError);
  ev.p = 1.5;
  EXPECT_THROW(ev.validate(10.0, 3), ValidationError);
  ev.p = 0.1;
  ev.start = 6.0;
  EXPECT_THROW(ev.validate(10.0, 3), ValidationError);
}

TEST(BlochRhs, PinOnlyExample) {
  const auto g = netgraph::build_graph(1, Pairs{});
  BlochState st{{1.0}, {0.0}, {0.0}};
  const std::vector<double> pin{kPi / 2};
  const auto d = bloch_rhs(st, pin, g);
  EXPECT_NEAR(d.dx[0], -1.0, 1e-15);
  EXPECT_NEAR(d.dy[0], 1.0, 1e-15);
  const auto none = bloch_rhs(st, {}, g);
  EXPECT_EQ(none.dx[0], 0.0);
}

TEST(BlochRhs, SwapCouplingExample) {
  const auto g = netgraph::build_graph(2, Pairs{{0, 1}});
  BlochState st{{1.0, 0.0}, {0.0, 1.0}, {0.2, -0.2}};
  const auto d = bloch_rhs(st, {}, g);
  EXPECT_DOUBLE_EQ(d.dx[0], -1.0);
  EXPECT_DOUBLE_EQ(d.dx[1], 1.0);
  EXPECT_DOUBLE_EQ(d.dz[0], -0.4);
  EXPECT_THROW(bloch_rhs(BlochState{{1.0}, {0.0}, {0.0}}, {}, g), ValidationError);
}

// With alpha_i = pinner_i - phi_i the held form coincides with the
// re-aimed form; the polar forms are the exact change of variables.
TEST(RhsForms, HeldMatchesReaimedAndPolarForms) {
  Gen gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen.index(6);
    const auto edges = gen.connected_edges(n);
    std::vector<double> w;
    for (std::size_t e = 0; e < edges.size(); ++e) w.push_back(gen.uniform(0.1, 2.0));
    const auto g = netgraph::build_graph(n, edges, w);
    std::vector<double> phi(n), s(n), pin(n), alpha(n);
    BlochState st;
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = gen.uniform(-1.0, 2.5);
      s[i] = gen.uniform(0.1, 1.0);
      pin[i] = gen.uniform(0.0, kPi / 2);
      alpha[i] = pin[i] - phi[i];
      st.x.push_back(s[i] * std::cos(phi[i]));
      st.y.push_back(s[i] * std::sin(phi[i]));
      st.z.push_back(gen.uniform(-0.5, 0.5));
    }
    const auto a = bloch_rhs(st, pin, g);
    const auto b = bloch_rhs_held(st, alpha, g);
    const auto p = phase_rhs(phi, s, pin, g);
    const auto f = phase_flow_rhs(phi, s, alpha, g);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(a.dx[i], b.dx[i], 1e-12);
      EXPECT_NEAR(a.dy[i], b.dy[i], 1e-12);
      EXPECT_NEAR(a.dz[i], b.dz[i], 1e-12);
      const double s2 = s[i] * s[i];
      const double dphi = (st.x[i] * b.dy[i] - st.y[i] * b.dx[i]) / s2;
      const double ds = (st.x[i] * b.dx[i] + st.y[i] * b.dy[i]) / s[i];
      EXPECT_NEAR(p[i], dphi, 1e-10);
      EXPECT_NEAR(f.dphi[i], dphi, 1e-10);
      EXPECT_NEAR(f.ds[i], ds, 1e-10);
    }
  }
}

TEST(PhaseRhs, ZeroCoherenceNamesNode) {
  const auto g = triangle();
  const std::vector<double> phi{0, 0, 0}, s{1, 0, 1}, pin{0, 0, 0};
  try {
    phase_rhs(phi, s, pin, g);
    FAIL();
  } catch (const DegenerateCoherence& e) {
    EXPECT_NE(std::string(e.what()).find("node 1"), std::string::npos);
  }
  EXPECT_THROW(phase_flow_rhs(phi, s, pin, g), DegenerateCoherence);
}

TEST(QsdcStep, SingleNodeIncrementIsSineOfPinAngle) {
  // One isolated node under a held rotation: x + iy scales by
  // exp((e^{i alpha} - 1) dt), so the phase moves by exactly sin(alpha) dt.
  const auto g = netgraph::build_graph(1, Pairs{});
  for (auto b : {Backend::kFull, Backend::kBloch, Backend::kPhase}) {
    const auto cfg = exact_config(b, 0.05);
    const std::vector<NodeState> st{{0.1, 0, 1, 0}};
    const std::vector<double> pin{1.2};
    const auto r = qsdc_step(st, g, cfg, pin, 0);
    EXPECT_NEAR(r.states[0].phi - 0.1, std::sin(1.1) * 0.05, 1e-9) << backend_name(b);
    EXPECT_NEAR(r.states[0].s / std::sin(r.states[0].theta), std::exp((std::cos(1.1) - 1) * 0.05),
                1e-9);
  }
}

TEST(QsdcStep, BackendsAgreeOnOneStep) {
  const auto g = triangle();
  const std::vector<NodeState> st{{0.0, 0, 1, 0}, {kPi / 8, 0, 1, 0}, {kPi / 2, 0, 1, 0}};
  const std::vector<double> pin(3, kPi / 3);
  const std::vector<double> th{1.96, 1.49, 2.07};
  const auto full = qsdc_step(st, g, exact_config(Backend::kFull), pin, 0, {}, std::span(th));
  const auto bloch = qsdc_step(st, g, exact_config(Backend::kBloch), pin, 0, {}, std::span(th));
  const auto phase = qsdc_step(st, g, exact_config(Backend::kPhase), pin, 0, {}, std::span(th));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(full.observed[i].x, bloch.observed[i].x, 1e-9);
    EXPECT_NEAR(full.observed[i].y, bloch.observed[i].y, 1e-9);
    EXPECT_NEAR(full.observed[i].z, bloch.observed[i].z, 1e-9);
    EXPECT_NEAR(full.states[i].phi, phase.states[i].phi, 1e-9);
    EXPECT_TRUE(std::isnan(phase.observed[i].z));
  }
}

TEST(QsdcStep, ClampsPinnersAndCountsThem) {
  const auto g = triangle();
  const std::vector<NodeState> st(3, NodeState{0.5, 0, 1, 0});
  const std::vector<double> pin{-0.2, 2.0, 0.7};
  const auto r = qsdc_step(st, g, exact_config(Backend::kPhase), pin, 0);
  EXPECT_EQ(r.clamped_pinners, 2u);
  EXPECT_DOUBLE_EQ(r.states[0].pinner, 0.0);
  EXPECT_DOUBLE_EQ(r.states[1].pinner, kPi / 2);
  EXPECT_DOUBLE_EQ(r.states[2].pinner, 0.7);
}

TEST(QsdcStep, FullMixingKeepsPreviousPhaseWithDiagnostic) {
  const auto g = netgraph::build_graph(2, Pairs{{0, 1}});
  const std::vector<NodeState> st{{0.4, 0, 1, 0}, {0.9, 0, 1, 0}};
  const std::vector<double> pin{0.5, 0.5};
  const std::vector<MixingEvent> ev{{{0}, 0.0, 1.0, 0.75, 1.0}};
  for (auto b : {Backend::kFull, Backend::kBloch, Backend::kPhase}) {
    const auto r = qsdc_step(st, g, exact_config(b), pin, 0, ev);
    EXPECT_DOUBLE_EQ(r.states[0].phi, 0.4) << backend_name(b);
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_NE(r.diagnostics[0].find("node 0"), std::string::npos);
    EXPECT_NE(r.states[1].phi, 0.9);
  }
}

TEST(QsdcStep, PartialMixingLeavesQsdcEstimateUnbiased) {
  const auto g = netgraph::build_graph(1, Pairs{});
  const std::vector<NodeState> st{{0.6, 0, 1, 0}};
  const std::vector<double> pin{0.6};
  const std::vector<MixingEvent> ev{{{0}, 0.0, 1.0, 0.3, 1.0}};
  auto cfg = exact_config(Backend::kBloch);
  const auto q = qsdc_step(st, g, cfg, pin, 0, ev);
  EXPECT_NEAR(q.states[0].phi, 0.6, 1e-12);
  cfg.mode = Mode::kQdcLegacy;
  const auto l = qsdc_step(st, g, cfg, pin, 0, ev);
  EXPECT_GT(std::abs(l.states[0].phi - 0.6), 0.3);
}

TEST(QsdcStep, MixingProbabilityGatesFiring) {
  const auto g = netgraph::build_graph(1, Pairs{});
  const std::vector<NodeState> st{{0.6, 0, 1, 0}};
  const std::vector<double> pin{0.6};
  const std::vector<MixingEvent> ev{{{0}, 0.0, 100.0, 0.3, 0.5}};
  const auto cfg = exact_config(Backend::kBloch);
  int fired = 0;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const auto r = qsdc_step(st, g, cfg, pin, k, ev);
    const double shrink = r.states[0].s / std::sin(r.states[0].theta);
    fired += shrink < 0.8;
  }
  EXPECT_GT(measurement::binomial_test_two_sided(static_cast<std::uint64_t>(fired), 2000, 0.5),
            1e-3);
}

TEST(QsdcStep, SampledModeIsSeededAndNoisy) {
  const auto g = triangle();
  const std::vector<NodeState> st(3, NodeState{0.5, 0, 1, 0});
  const std::vector<double> pin(3, 0.5);
  auto cfg = exact_config(Backend::kPhase);
  cfg.shots = 1000;
  const auto a = qsdc_step(st, g, cfg, pin, 3);
  const auto b = qsdc_step(st, g, cfg, pin, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.states[i].phi, b.states[i].phi);
    EXPECT_EQ(a.estimates[i].shots_used, 2000u);
    EXPECT_NEAR(a.states[i].phi, 0.5, 0.2);
  }
  cfg.seed = 2;
  const auto c = qsdc_step(st, g, cfg, pin, 3);
  EXPECT_NE(a.states[0].phi, c.states[0].phi);
}

TEST(QsdcStep, FullBackendCapacity) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < 11; ++i) edges.emplace_back(i, i + 1);
  const auto g = netgraph::build_graph(11, edges);
  const std::vector<NodeState> st(11, NodeState{0.5, 0, 1, 0});
  const std::vector<double> pin(11, 0.5);
  try {
    qsdc_step(st, g, exact_config(Backend::kFull), pin, 0);
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("bloch"), std::string::npos);
  }
}

TEST(RunConsensus, SingleNodeTracksScalarOde) {
  const auto g = netgraph::build_graph(1, Pairs{});
  const double dt = 1e-4, horizon = 3.0, target = 1.2;
  const std::vector<double> init{0.05};
  const auto tr = run_consensus(init, constant_pinner(target), g,
                                exact_config(Backend::kPhase, dt), horizon);
  ASSERT_EQ(tr.samples(), 30001u);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.samples(); k += 100) {
    worst = std::max(worst, std::abs(tr.phi[0][k] - testing::pinned_phase(0.05, target, tr.times[k])));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(RunConsensus, TriangleConvergesWithDecreasingLyapunov) {
  const auto g = triangle();
  const std::vector<double> init{0.0, kPi / 8, kPi / 2};
  RunOptions opt;
  opt.initial_thetas = std::vector<double>{1.96, 1.49, 2.07};
  const auto tr = run_consensus(init, constant_pinner(kPi / 3), g,
                                exact_config(Backend::kBloch), 10.0, {}, opt);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(tr.phi[i].back(), kPi / 3, 1e-3);
  for (std::size_t k = 1; k < tr.samples(); ++k) {
    EXPECT_LE(tr.lyapunov[k], tr.lyapunov[k - 1] * (1.0 + 1e-12));
  }
  EXPECT_NEAR(tr.lyapunov[0], lyapunov(init, kPi / 3), 1e-15);
  EXPECT_EQ(tr.clamped_pinners, 0u);
}

TEST(RunConsensus, DistinctPinnersLandBetweenTargets) {
  const auto g = triangle();
  const std::vector<double> init{0.2, 0.2, 0.2};
  const auto tr = run_consensus(init, constant_pinners({0.3, 0.6, 0.9}), g,
                                exact_config(Backend::kPhase), 15.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GT(tr.phi[i].back(), 0.3);
    EXPECT_LT(tr.phi[i].back(), 0.9);
  }
  EXPECT_LT(tr.phi[0].back(), tr.phi[2].back());
}

TEST(RunConsensus, RecordsObservedAndIsReproducible) {
  const auto g = triangle();
  const std::vector<double> init{0.0, 0.4, 0.8};
  RunOptions opt;
  opt.record_observed = true;
  auto cfg = exact_config(Backend::kPhase);
  cfg.shots = 200;
  const auto a = run_consensus(init, constant_pinner(0.5), g, cfg, 1.0, {}, opt);
  const auto b = run_consensus(init, constant_pinner(0.5), g, cfg, 1.0, {}, opt);
  EXPECT_EQ(a.observed.size(), 100u);
  EXPECT_EQ(a.phi, b.phi);
}

TEST(RunConsensus, Errors) {
  const auto g = triangle();
  const std::vector<double> two{0, 0};
  const std::vector<double> three{0, 0, 0};
  const auto cfg = exact_config(Backend::kPhase);
  EXPECT_THROW(run_consensus(two, constant_pinner(0.5), g, cfg, 1.0), ValidationError);
  EXPECT_THROW(run_consensus(three, constant_pinner(0.5), g, cfg, 0.0), ValidationError);
  const std::vector<MixingEvent> bad{{{5}, 0.0, 1.0, 0.1, 1.0}};
  EXPECT_THROW(run_consensus(three, constant_pinner(0.5), g, cfg, 1.0, bad), ValidationError);
}

TEST(ConvergenceRate, TriangleAtPiOverThree) {
  EXPECT_NEAR(convergence_rate(triangle(), kPi / 3), 0.8270, 1e-3);
}

TEST(ConvergenceRate, UnitAtZeroForConnectedGraphs) {
  Gen gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + gen.index(9);
    const auto g = netgraph::build_graph(n, gen.connected_edges(n));
    EXPECT_NEAR(convergence_rate(g, 0.0), 1.0, 1e-12);
  }
}

TEST(ConvergenceRate, MatchesBisectionOracleForWeightedGraphs) {
  Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + gen.index(6);
    const auto edges = gen.connected_edges(n);
    std::vector<double> w;
    for (std::size_t e = 0; e < edges.size(); ++e) w.push_back(gen.uniform(0.1, 3.0));
    const auto g = netgraph::build_graph(n, edges, w);
    const double eps = gen.uniform(0.0, 1.5);
    Eigen::MatrixXd m = sinc(eps) * Eigen::MatrixXd::Identity(n, n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [a, b] = edges[e];
      const double v = sinc(2 * eps) * w[e];
      m(a, a) += v;
      m(b, b) += v;
      m(a, b) -= v;
      m(b, a) -= v;
    }
    EXPECT_NEAR(convergence_rate(g, eps), testing::bisection_eigenvalues(m).front(), 1e-9);
  }
}

TEST(ConvergenceRate, RejectsOutsideRegion) {
  EXPECT_THROW(convergence_rate(triangle(), kPi / 2), OutOfRegionError);
  EXPECT_THROW(convergence_rate(triangle(), -0.1), OutOfRegionError);
  EXPECT_THROW(convergence_rate(triangle(), std::vector<double>{1.0}, 0.2), ValidationError);
}

TEST(Sinc, SmallAndRegularArguments) {
  EXPECT_DOUBLE_EQ(sinc(0.0), 1.0);
  EXPECT_NEAR(sinc(1e-9), 1.0, 1e-17);
  EXPECT_NEAR(sinc(kPi), 0.0, 1e-16);
  EXPECT_NEAR(sinc(kPi / 2), 2.0 / kPi, 1e-15);
}

TEST(Lyapunov, HalfSquaredDistance) {
  const std::vector<double> phis{0.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(lyapunov(phis, 1.0), 1.0);
}

}  // namespace
}  // namespace qsdc::consensus
