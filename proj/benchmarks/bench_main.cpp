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


#include <benchmark/benchmark.h>

#include <numbers>
#include <utility>
#include <vector>

#include "qsdc/consensus.hpp"
#include "qsdc/netgraph.hpp"
#include "qsdc/quantum_engine.hpp"

namespace {

using namespace qsdc;

netgraph::CommGraph ring(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  if (n > 2) edges.emplace_back(n - 1, 0);
  return netgraph::build_graph(n, edges);
}

quantum::DensityMatrix ring_state(std::size_t n) {
  std::vector<quantum::PureQubitSpec> specs;
  for (std::size_t i = 0; i < n; ++i) specs.push_back({1.0 + 0.1 * i, 0.2 * i});
  return quantum::product_state(specs);
}

void BM_LindbladRhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = ring(n);
  const std::vector<double> angles(n, 0.3);
  const auto js = quantum::make_jump_set(g, angles);
  const auto rho = ring_state(n);
  for (auto _ : state) benchmark::DoNotOptimize(quantum::lindblad_rhs(rho, js));
}
BENCHMARK(BM_LindbladRhs)->DenseRange(3, 6);

void BM_Evolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = ring(n);
  const std::vector<double> angles(n, 0.3);
  const auto js = quantum::make_jump_set(g, angles);
  const auto rho = ring_state(n);
  for (auto _ : state) benchmark::DoNotOptimize(quantum::evolve(rho, js, 0.01, 4));
}
BENCHMARK(BM_Evolve)->DenseRange(3, 6);

void BM_ProtocolStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = ring(n);
  consensus::ProtocolConfig cfg;
  cfg.backend = static_cast<consensus::Backend>(state.range(1));
  std::vector<consensus::NodeState> st(n);
  const std::vector<double> pins(n, std::numbers::pi / 3);
  std::uint64_t k = 0;
  for (auto _ : state) {
    auto r = consensus::qsdc_step(st, g, cfg, pins, k++);
    st = std::move(r.states);
    benchmark::DoNotOptimize(st.data());
  }
}
BENCHMARK(BM_ProtocolStep)
    ->Args({15, static_cast<int>(consensus::Backend::kPhase)})
    ->Args({15, static_cast<int>(consensus::Backend::kBloch)})
    ->Args({6, static_cast<int>(consensus::Backend::kFull)});

}  // namespace

BENCHMARK_MAIN();
