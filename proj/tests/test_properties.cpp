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


// Randomised invariant checks with hand-rolled generators. Each property runs
// over a fixed seed so failures reproduce.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "qsdc/consensus.hpp"
#include "qsdc/measurement.hpp"
#include "qsdc/quantum_engine.hpp"
#include "qsdc/report.hpp"

namespace qsdc {
namespace {

using testing::CMat;
using testing::Gen;
constexpr double kPi = std::numbers::pi;

struct RandomNetwork {
  netgraph::CommGraph graph;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> weights;
};

RandomNetwork random_network(Gen& gen, std::size_t n, double wmax = 3.0) {
  RandomNetwork r;
  r.edges = gen.connected_edges(n);
  for (std::size_t e = 0; e < r.edges.size(); ++e) r.weights.push_back(gen.uniform(0.05, wmax));
  r.graph = netgraph::build_graph(n, r.edges, r.weights);
  return r;
}

TEST(Property, LindbladGeneratorIsTracelessAndHermitian) {
  Gen gen(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen.index(4);
    const auto net = random_network(gen, n);
    std::vector<double> angles(n);
    for (auto& a : angles) a = gen.uniform(-kPi, kPi);
    const auto js = quantum::make_jump_set(net.graph, angles);
    const CMat rho = gen.random_density(n, 1 + static_cast<int>(gen.index(3)));
    const CMat d = quantum::lindblad_rhs(rho, js);
    ASSERT_LT(std::abs(d.trace()), 1e-12) << trial;
    ASSERT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-12) << trial;
  }
}

TEST(Property, EvolvePreservesDensityMatrixAxioms) {
  Gen gen(202);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen.index(4);
    const auto net = random_network(gen, n);
    std::vector<double> angles(n);
    for (auto& a : angles) a = gen.uniform(-kPi / 2, kPi / 2);
    const auto js = quantum::make_jump_set(net.graph, angles);
    const auto rho = quantum::make_trusted(gen.random_density(n));
    const double dt = gen.uniform(0.001, 0.05);
    const auto out = quantum::evolve(rho, js, dt, 4);
    ASSERT_LT(std::abs(out.trace() - quantum::Complex(1.0, 0.0)), 1e-12);
    ASSERT_LT(out.hermiticity_error(), 1e-14);
    ASSERT_GT(out.min_eigenvalue(), -1e-10);
  }
}

TEST(Property, SwapOnlyFlowConservesTotalBlochVector) {
  Gen gen(303);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen.index(3);
    const auto net = random_network(gen, n);
    auto js = quantum::make_jump_set(net.graph, std::vector<double>(n, 0.0));
    js.pins.clear();
    auto rho = quantum::make_trusted(gen.random_density(n));
    auto total = [&](const quantum::DensityMatrix& r) {
      double x = 0, y = 0, z = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto b = quantum::local_bloch(r, i);
        x += b.x;
        y += b.y;
        z += b.z;
      }
      return std::array<double, 3>{x, y, z};
    };
    const auto before = total(rho);
    rho = quantum::evolve(rho, js, 0.2, 8);
    const auto after = total(rho);
    for (int c = 0; c < 3; ++c) ASSERT_NEAR(before[c], after[c], 1e-12);
  }
}

TEST(Property, BlochCouplingSumsToZero) {
  Gen gen(404);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + gen.index(12);
    const auto net = random_network(gen, n);
    consensus::BlochState st;
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = quantum::BlochVector::from_polar(gen.uniform(0, 1), gen.uniform(0, kPi),
                                                      gen.uniform(-kPi, kPi));
      st.x.push_back(b.x);
      st.y.push_back(b.y);
      st.z.push_back(b.z);
    }
    const auto d = consensus::bloch_rhs(st, {}, net.graph);
    ASSERT_NEAR(std::accumulate(d.dx.begin(), d.dx.end(), 0.0), 0.0, 1e-11);
    ASSERT_NEAR(std::accumulate(d.dy.begin(), d.dy.end(), 0.0), 0.0, 1e-11);
    ASSERT_NEAR(std::accumulate(d.dz.begin(), d.dz.end(), 0.0), 0.0, 1e-11);
  }
}

TEST(Property, StepIsEquivariantUnderRelabelling) {
  Gen gen(505);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + gen.index(3);
    const auto net = random_network(gen, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen.engine());
    std::vector<std::pair<std::size_t, std::size_t>> pedges;
    for (const auto& [a, b] : net.edges) pedges.emplace_back(perm[a], perm[b]);
    const auto pgraph = netgraph::build_graph(n, pedges, net.weights);

    std::vector<consensus::NodeState> st(n), pst(n);
    std::vector<double> pins(n), ppins(n), th(n), pth(n);
    for (std::size_t i = 0; i < n; ++i) {
      st[i].phi = gen.uniform(0, kPi / 2);
      pins[i] = gen.uniform(0, kPi / 2);
      th[i] = gen.uniform(0.3, 2.8);
      pst[perm[i]] = st[i];
      ppins[perm[i]] = pins[i];
      pth[perm[i]] = th[i];
    }
    consensus::ProtocolConfig cfg;
    cfg.backend = gen.coin() ? consensus::Backend::kFull : consensus::Backend::kBloch;
    const auto a = consensus::qsdc_step(st, net.graph, cfg, pins, 0, {}, std::span<const double>(th));
    const auto b =
        consensus::qsdc_step(pst, pgraph, cfg, ppins, 0, {}, std::span<const double>(pth));
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(a.states[i].phi, b.states[perm[i]].phi, 1e-10);
    }
  }
}

TEST(Property, CommonPinnerIsReachedOnRandomGraphs) {
  Gen gen(606);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + gen.index(7);
    const auto net = random_network(gen, n, 2.0);
    std::vector<double> init(n);
    for (auto& p : init) p = gen.uniform(0, kPi / 2);
    const double pin = gen.uniform(0.1, kPi / 2 - 0.1);
    consensus::ProtocolConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto tr = consensus::run_consensus(init, consensus::constant_pinner(pin), net.graph,
                                             cfg, 20.0);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(tr.phi[i].back(), pin, 1e-3) << trial;
  }
}

TEST(Property, FixedPointStaysFixed) {
  Gen gen(707);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + gen.index(6);
    const auto net = random_network(gen, n);
    const double pin = gen.uniform(0, kPi / 2);
    std::vector<consensus::NodeState> st(n, consensus::NodeState{pin, 0, 1, pin});
    const std::vector<double> pins(n, pin);
    consensus::ProtocolConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto r = consensus::qsdc_step(st, net.graph, cfg, pins, 7);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(r.states[i].phi, pin, 1e-12);
  }
}

TEST(Property, OutcomeProbabilitiesStayInUnitInterval) {
  Gen gen(808);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto b = quantum::BlochVector::from_polar(gen.uniform(0, 1), gen.uniform(0, kPi),
                                                    gen.uniform(-kPi, kPi));
    for (auto basis : {measurement::Basis::X, measurement::Basis::Y, measurement::Basis::Z}) {
      const double p = measurement::expected_p0(b, basis);
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
    }
  }
}

TEST(Property, SameSeedGivesByteIdenticalCsv) {
  Gen gen(909);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 2 + gen.index(3);
    const auto net = random_network(gen, n);
    std::vector<double> init(n);
    for (auto& p : init) p = gen.uniform(0, kPi / 2);
    consensus::ProtocolConfig cfg;
    cfg.shots = 64;
    cfg.seed = gen.index(1000);
    const auto a = consensus::run_consensus(init, consensus::constant_pinner(0.7), net.graph, cfg, 1.0);
    const auto b = consensus::run_consensus(init, consensus::constant_pinner(0.7), net.graph, cfg, 1.0);
    ASSERT_EQ(report::consensus_csv(a), report::consensus_csv(b));
  }
}

}  // namespace
}  // namespace qsdc
