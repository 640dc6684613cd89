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
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qsdc/error.hpp"
#include "qsdc/measurement.hpp"

namespace qsdc::measurement {
namespace {

using testing::Gen;
constexpr double kPi = std::numbers::pi;

std::vector<BlochVector> eve_stream(double phi, std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> theta(0.0, kPi);
  std::vector<BlochVector> out;
  for (std::size_t t = 0; t < steps; ++t) out.push_back(BlochVector::from_polar(1.0, theta(gen), phi));
  return out;
}

TEST(ExpectedP0, HalfOfOnePlusComponent) {
  const BlochVector b{0.6, -0.2, 0.5};
  EXPECT_DOUBLE_EQ(expected_p0(b, Basis::X), 0.8);
  EXPECT_DOUBLE_EQ(expected_p0(b, Basis::Y), 0.4);
  EXPECT_DOUBLE_EQ(expected_p0(b, Basis::Z), 0.75);
  EXPECT_THROW(expected_p0(BlochVector{1.1, 0, 0}, Basis::X), ValidationError);
  EXPECT_THROW(expected_p0(BlochVector{NAN, 0, 0}, Basis::X), ValidationError);
}

TEST(GateLevelP0, AgreesWithComponentFormula) {
  Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = BlochVector::from_polar(gen.uniform(0, 1), gen.uniform(0, kPi),
                                           gen.uniform(-kPi, kPi));
    for (auto basis : {Basis::X, Basis::Y, Basis::Z}) {
      EXPECT_NEAR(gate_level_p0(b, basis), expected_p0(b, basis), 1e-14);
    }
  }
}

TEST(SampleBasis, SameSeedSameCounts) {
  const BlochVector b{0.3, 0.4, 0.1};
  const auto h1 = sample_basis(b, Basis::X, 1000, 42);
  const auto h2 = sample_basis(b, Basis::X, 1000, 42);
  EXPECT_EQ(h1.zeros, h2.zeros);
  EXPECT_EQ(h1.shots(), 1000u);
  const auto gate = sample_basis(b, Basis::X, 1000, 42, SamplingOptions{true});
  EXPECT_EQ(gate.zeros, h1.zeros);
  EXPECT_THROW(sample_basis(b, Basis::X, 0, 1), ValidationError);
}

TEST(SampleBasis, DeterministicOutcomeForEigenstate) {
  const auto h = sample_basis(BlochVector{0, 0, 1}, Basis::Z, 500, 9);
  EXPECT_EQ(h.zeros, 500u);
  EXPECT_EQ(h.ones, 0u);
  EXPECT_DOUBLE_EQ(h.expectation(), 1.0);
}

TEST(SampleBasis, FrequencyPassesBinomialTest) {
  const BlochVector b{0.2, -0.5, 0.0};
  const std::uint64_t shots = 20000;
  const auto hx = sample_basis(b, Basis::X, shots, 1234);
  const auto hy = sample_basis(b, Basis::Y, shots, 99);
  EXPECT_GT(binomial_test_two_sided(hx.zeros, shots, 0.6), 1e-3);
  EXPECT_GT(binomial_test_two_sided(hy.zeros, shots, 0.25), 1e-3);
}

TEST(CountHistogram, Arithmetic) {
  CountHistogram h{30, 10};
  EXPECT_DOUBLE_EQ(h.p0(), 0.75);
  EXPECT_DOUBLE_EQ(h.p1(), 0.25);
  EXPECT_DOUBLE_EQ(h.expectation(), 0.5);
  h += CountHistogram{0, 20};
  EXPECT_EQ(h.shots(), 60u);
  EXPECT_DOUBLE_EQ(CountHistogram{}.expectation(), 0.0);
}

TEST(EstimatePhaseQsdc, RecoversPhaseOfMixedState) {
  for (double r : {1.0, 0.5, 0.01}) {
    for (double phi : {0.0, 0.3, kPi / 2, -2.0, 3.0}) {
      const auto b = BlochVector::from_polar(r, 1.1, phi);
      const auto e = estimate_phase_qsdc(b.x, b.y);
      EXPECT_NEAR(e.phi_hat, phi, 1e-12);
      EXPECT_EQ(e.method, EstimatorMethod::kQsdcAtan2);
    }
  }
}

TEST(EstimatePhaseQsdc, DegenerateAndEmptyInputs) {
  EXPECT_THROW(estimate_phase_qsdc(0.0, 0.0), DegenerateCoherence);
  EXPECT_THROW(estimate_phase_qsdc(CountHistogram{}, CountHistogram{1, 0}), ValidationError);
  EXPECT_THROW(estimate_phase_qsdc(CountHistogram{5, 5}, CountHistogram{5, 5}),
               DegenerateCoherence);
}

TEST(EstimatePhaseQsdc, CountsExample) {
  const auto e = estimate_phase_qsdc(CountHistogram{75, 25}, CountHistogram{50, 50 - 0} );
  EXPECT_NEAR(e.phi_hat, 0.0, 1e-15);
  const auto f = estimate_phase_qsdc(CountHistogram{50, 50}, CountHistogram{100, 0});
  EXPECT_NEAR(f.phi_hat, kPi / 2, 1e-15);
  EXPECT_EQ(f.shots_used, 200u);
}

TEST(EstimatePhaseQsdc, ShotNoiseShrinksWithShots) {
  const auto b = BlochVector::from_polar(1.0, kPi / 2, 0.7);
  double err_small = 0.0, err_large = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto small = estimate_phase_qsdc(sample_basis(b, Basis::X, 100, 2 * s),
                                           sample_basis(b, Basis::Y, 100, 2 * s + 1));
    const auto large = estimate_phase_qsdc(sample_basis(b, Basis::X, 10000, 2 * s),
                                           sample_basis(b, Basis::Y, 10000, 2 * s + 1));
    err_small += std::pow(small.phi_hat - 0.7, 2);
    err_large += std::pow(large.phi_hat - 0.7, 2);
  }
  const double rms_small = std::sqrt(err_small / 200), rms_large = std::sqrt(err_large / 200);
  // Ratio of root-mean-square errors should track sqrt(100) = 10.
  EXPECT_GT(rms_small / rms_large, 6.0);
  EXPECT_LT(rms_small / rms_large, 16.0);
  EXPECT_LT(rms_large, 0.02);
}

TEST(EstimatePhaseQdc, ArccosOfXAndBiasForMixedState) {
  EXPECT_NEAR(estimate_phase_qdc(std::cos(0.4)).phi_hat, 0.4, 1e-15);
  const auto b = BlochVector::from_polar(0.5, kPi / 2, 0.4);
  EXPECT_GT(std::abs(estimate_phase_qdc(b.x).phi_hat - 0.4), 0.5);
  const auto c = estimate_phase_qdc(1.2);
  EXPECT_TRUE(c.clamped);
  EXPECT_DOUBLE_EQ(c.phi_hat, 0.0);
  EXPECT_EQ(estimate_phase_qdc(CountHistogram{3, 1}).shots_used, 4u);
  EXPECT_THROW(estimate_phase_qdc(CountHistogram{}), ValidationError);
}

TEST(BinaryEntropy, KnownValues) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.4999, 1e-4);
  EXPECT_DOUBLE_EQ(binary_entropy(0.3), binary_entropy(0.7));
}

TEST(BinomialTest, SymmetricAndBounded) {
  EXPECT_NEAR(binomial_test_two_sided(5, 10, 0.5), 1.0, 1e-12);
  // Direct sum for k = 0 of 10 at p = 0.5: 2 * 2^-10.
  EXPECT_NEAR(binomial_test_two_sided(0, 10, 0.5), 2.0 / 1024.0, 1e-12);
  EXPECT_NEAR(binomial_test_two_sided(2, 10, 0.5), binomial_test_two_sided(8, 10, 0.5), 1e-12);
  EXPECT_THROW(binomial_test_two_sided(11, 10, 0.5), ValidationError);
  EXPECT_THROW(binomial_test_two_sided(1, 10, 1.0), ValidationError);
}

TEST(EveExpected, UniformThetaMatchesClosedForm) {
  // E[sin theta] = 2/pi and E[cos theta] = 0 for theta ~ Uniform(0, pi).
  const double phi = kPi / 6;
  const auto stream = eve_stream(phi, 200000, 5);
  const auto r = eve_expected(stream);
  EXPECT_NEAR(r.expectation[0], 2.0 / kPi * std::cos(phi), 5e-3);
  EXPECT_NEAR(r.expectation[1], 2.0 / kPi * std::sin(phi), 5e-3);
  EXPECT_NEAR(r.expectation[2], 0.0, 5e-3);
  EXPECT_NEAR(r.informed_phi, phi, 1e-2);
  EXPECT_GT(std::abs(r.naive_phi - phi), 0.3);
  EXPECT_TRUE(r.exact);
}

TEST(EveIntercept, SampledReportAgreesWithExpected) {
  const auto stream = eve_stream(kPi / 6, 6000, 8);
  const auto sampled = eve_intercept(stream, BasesPolicy::kAll, 4, 0, 77);
  const auto exact = eve_expected(stream);
  EXPECT_EQ(sampled.steps, 6000u);
  for (int b = 0; b < 3; ++b) {
    EXPECT_EQ(sampled.counts[b].shots(), 24000u);
    EXPECT_NEAR(sampled.expectation[b], exact.expectation[b], 0.03);
  }
  EXPECT_GT(sampled.entropy_bits[2], 0.99);
}

TEST(EveIntercept, RoundRobinSplitsSteps) {
  const auto stream = eve_stream(0.3, 300, 1);
  const auto r = eve_intercept(stream, BasesPolicy::kRoundRobin, 1, 0, 3);
  for (int b = 0; b < 3; ++b) EXPECT_EQ(r.counts[b].shots(), 100u);
  const auto first = eve_intercept(stream, BasesPolicy::kAll, 1, 30, 3);
  EXPECT_EQ(first.steps, 30u);
  EXPECT_THROW(eve_intercept({}, BasesPolicy::kAll, 1, 0, 3), ValidationError);
  EXPECT_THROW(eve_intercept(stream, BasesPolicy::kAll, 0, 0, 3), ValidationError);
}

TEST(EveIntercept, Reproducible) {
  const auto stream = eve_stream(0.3, 500, 1);
  const auto a = eve_intercept(stream, BasesPolicy::kAll, 2, 0, 11);
  const auto b = eve_intercept(stream, BasesPolicy::kAll, 2, 0, 11);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(EvePerStep, SingleShotPhasesCarryLittleInformation) {
  const auto stream = eve_stream(kPi / 6, 4000, 2);
  const auto phases = eve_per_step_phases(stream, 1, 4);
  ASSERT_EQ(phases.size(), 4000u);
  int near = 0;
  for (double p : phases) near += std::abs(p - kPi / 6) < 0.1;
  EXPECT_LT(near, 400);
}

TEST(EveReportJson, Layout) {
  const auto stream = eve_stream(0.5, 10, 1);
  const auto j = to_json(eve_expected(stream));
  EXPECT_TRUE(j["bases"]["X"].contains("p0"));
  EXPECT_TRUE(j["exact"].get<bool>());
  const auto s = to_json(eve_intercept(stream, BasesPolicy::kAll, 1, 0, 1));
  EXPECT_EQ(s["bases"]["Z"]["zeros"].get<std::uint64_t>() + s["bases"]["Z"]["ones"].get<std::uint64_t>(),
            10u);
  EXPECT_EQ(s["avg_bloch"].size(), 3u);
}

TEST(Names, BasisAndMethod) {
  EXPECT_STREQ(basis_name(Basis::Y), "Y");
  EXPECT_STREQ(method_name(EstimatorMethod::kQdcArccos), "qdc_arccos");
}

}  // namespace
}  // namespace qsdc::measurement
