// Copyright 2026 The gawqed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gawqed/reference_devices.hpp"
#include "gawqed/sequences.hpp"
#include "oracles.hpp"

namespace gawqed {
namespace {

constexpr double kMHz = 1e6;

double df1() {
  const auto l = reference::three_point_device();
  return find_df_frequencies(l, 0, angular(4.2e9), angular(5.0e9), angular(1.0)).at(0).omega;
}

TEST(ApplyGate, PiPulseExcites) {
  const auto rho = apply_gate(DensityMatrix::ground(1), 0, Axis::kX, kPi);
  EXPECT_NEAR(rho.population(0), 1.0, 1e-15);
  const auto pair = apply_gate(DensityMatrix::ground(2), 1, Axis::kY, kPi);
  EXPECT_NEAR(pair.population(1), 1.0, 1e-15);
  EXPECT_NEAR(pair.population(0), 0.0, 1e-15);
}

TEST(ApplyGate, ZeroAngleAndComposition) {
  std::mt19937_64 rng(1);
  const auto rho = DensityMatrix::from_matrix(oracle::random_density(4, rng));
  EXPECT_LT((apply_gate(rho, 0, Axis::kZ, 0.0).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  const auto twice = apply_gate(apply_gate(rho, 1, Axis::kX, kPi / 2), 1, Axis::kX, kPi / 2);
  const auto once = apply_gate(rho, 1, Axis::kX, kPi);
  EXPECT_LT((twice.matrix() - once.matrix()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(apply_gate(rho, 2, Axis::kX, kPi), DomainError);
}

TEST(ApplyGate, PreservesTraceAndSpectrum) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rho = DensityMatrix::from_matrix(oracle::random_density(8, rng));
    const auto out = apply_gate(rho, trial % 3, static_cast<Axis>(trial % 3), u(rng));
    EXPECT_NEAR(out.trace(), rho.trace(), 1e-12);
    EXPECT_LT((hermitian_eigenvalues(out.matrix()) - hermitian_eigenvalues(rho.matrix())).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(ParseAxis, AcceptsBothCases) {
  EXPECT_EQ(parse_axis("x"), Axis::kX);
  EXPECT_EQ(parse_axis("Y"), Axis::kY);
  EXPECT_EQ(parse_axis("z"), Axis::kZ);
  EXPECT_THROW(parse_axis("w"), ValidationError);
}

TEST(ValidateSchedule, Errors) {
  PulseSchedule s;
  s.segments.push_back({-1.0, {1.0, 1.0}});
  EXPECT_THROW(validate_schedule(s, 2), ValidationError);
  s.segments[0].duration = 1.0;
  EXPECT_NO_THROW(validate_schedule(s, 2));
  EXPECT_THROW(validate_schedule(s, 3), ValidationError);
  EXPECT_THROW(validate_schedule(s, 2, FrequencyBand{2.0, 3.0}), ValidationError);
  s.gates.push_back({1, 0, Axis::kX, kPi});
  EXPECT_THROW(validate_schedule(s, 2), ValidationError);
  s.gates[0].after_segment = 0;
  s.gates[0].atom = 5;
  EXPECT_THROW(validate_schedule(s, 2), ValidationError);
  s.gates.clear();
  s.measurements.push_back({0, "XQ"});
  EXPECT_THROW(validate_schedule(s, 2), ValidationError);
  s.measurements[0].basis = "X";
  EXPECT_THROW(validate_schedule(s, 2), ValidationError);
}

TEST(RunSchedule, EmptyScheduleReturnsInitialState) {
  std::mt19937_64 rng(3);
  const auto rho = DensityMatrix::from_matrix(oracle::random_density(4, rng));
  const auto run = run_schedule(reference::three_point_device(), {}, rho);
  ASSERT_EQ(run.trajectory.size(), 1u);
  EXPECT_EQ((run.final_state().matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(RunSchedule, DetunedAtDfOnlyNonRadiativeDecay) {
  const double gnr_hz = 0.05 * kMHz;
  const auto l = reference::three_point_device(gnr_hz);
  const double w1 = df1(), w2 = angular(5.23e9);
  PulseSchedule s;
  s.segments.push_back({2e-6, {w1, w2}});
  s.measurements.push_back({0, "ZZ"});
  const auto excited = DensityMatrix::basis_state(2, 0b11);
  const auto run = run_schedule(l, s, excited);
  const double decay = std::exp(-angular(gnr_hz) * 2e-6);
  // The residual exchange at a 730 MHz detuning leaves a tiny admixture.
  EXPECT_NEAR(run.final_state().population(0), decay, 1e-5);
  EXPECT_NEAR(run.final_state().population(1), decay, 1e-5);
  ASSERT_EQ(run.measurements.size(), 1u);
  EXPECT_EQ(run.measurements[0].basis, "ZZ");
  const double pz = 2 * decay - 1;
  EXPECT_NEAR(run.measurements[0].expectation, pz * pz, 1e-4);
}

TEST(RunSchedule, DeterministicAndSampled) {
  const auto l = reference::three_point_device();
  PulseSchedule s;
  s.segments.push_back({50e-9, {df1(), angular(5.23e9)}});
  s.segments.push_back({100e-9, {angular(5.23e9), angular(5.23e9)}});
  s.gates.push_back({0, 1, Axis::kX, kPi});
  RunOptions opts;
  opts.samples_per_segment = 5;
  const auto a = run_schedule(l, s, DensityMatrix::ground(2), opts);
  const auto b = run_schedule(l, s, DensityMatrix::ground(2), opts);
  ASSERT_EQ(a.trajectory.size(), 1u + 5u + 1u + 5u);
  EXPECT_EQ(a.trajectory.back().time, b.trajectory.back().time);
  EXPECT_EQ((a.final_state().matrix() - b.final_state().matrix()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(a.trajectory.back().time, 150e-9, 1e-20);
}

TEST(PauliExpectations, Examples) {
  for (double v : pauli_expectations(DensityMatrix::maximally_mixed(2))) EXPECT_NEAR(v, 0.0, 1e-15);

  const auto ground = pauli_expectations(DensityMatrix::ground(2));
  const auto& labels = pauli_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool z_only = labels[i] == "ZI" || labels[i] == "IZ" || labels[i] == "ZZ";
    EXPECT_NEAR(ground[i], z_only ? 1.0 : 0.0, 1e-15) << labels[i];
  }

  // Oracle: <psi|P|psi> for psi = (|01> - i|10>)/sqrt(2) written out by hand.
  const auto target = pauli_expectations(sqrt_iswap_target());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double expected = 0.0;
    if (labels[i] == "ZZ") expected = -1.0;
    if (labels[i] == "XY") expected = 1.0;
    if (labels[i] == "YX") expected = -1.0;
    EXPECT_NEAR(target[i], expected, 1e-15) << labels[i];
  }
  EXPECT_THROW(pauli_expectations(DensityMatrix::ground(1)), DomainError);
}

TEST(Reconstruct, RoundTripsPhysicalStates) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rho = DensityMatrix::from_matrix(oracle::random_density(4, rng, 1 + trial % 4));
    EXPECT_LT((reconstruct(pauli_expectations(rho)).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
  PauliExpectations zeros{};
  EXPECT_LT((reconstruct(zeros).matrix() - CMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Reconstruct, ProjectsUnphysicalExpectations) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rho = DensityMatrix::from_matrix(oracle::random_density(4, rng, 1));
    auto e = pauli_expectations(rho);
    for (auto& v : e) v *= 1.2;
    const auto hat = reconstruct(e);
    EXPECT_TRUE(hat.violation().empty());

    // Oracle: eigen-decompose the linear inversion and redistribute weight.
    CMatrix m = CMatrix::Identity(4, 4);
    for (std::size_t i = 0; i < e.size(); ++i) m += e[i] * pauli_string(pauli_labels()[i]);
    m /= 4.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    const Eigen::VectorXd p = oracle::simplex_bisect(es.eigenvalues());
    const CMatrix expected = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
    EXPECT_LT((hat.matrix() - expected).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Fidelity, Examples) {
  std::mt19937_64 rng(6);
  const auto rho = DensityMatrix::from_matrix(oracle::random_density(4, rng));
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
  EXPECT_NEAR(fidelity(DensityMatrix::basis_state(2, 1), DensityMatrix::basis_state(2, 2)), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(DensityMatrix::maximally_mixed(2), sqrt_iswap_target()), 0.25, 1e-12);
  EXPECT_THROW(fidelity(DensityMatrix::ground(1), DensityMatrix::ground(2)), DomainError);
  CMatrix bad = CMatrix::Zero(4, 4);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(fidelity(DensityMatrix::unchecked(bad), rho), DomainError);
}

TEST(Fidelity, SymmetricAndPureOverlap) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = DensityMatrix::from_matrix(oracle::random_density(4, rng));
    const auto b = DensityMatrix::from_matrix(oracle::random_density(4, rng, 1 + trial % 4));
    const double f = fidelity(a, b);
    EXPECT_NEAR(f, fidelity(b, a), 1e-10);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-9);

    const auto pure = DensityMatrix::from_matrix(oracle::random_density(4, rng, 1));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(pure.matrix());
    const CVector psi = es.eigenvectors().col(3);
    EXPECT_NEAR(fidelity(a, pure), (psi.adjoint() * a.matrix() * psi)(0, 0).real(), 1e-10);
  }
}

TEST(ShotNoise, DeterministicAndUnbiased) {
  const auto e = pauli_expectations(sqrt_iswap_target());
  EXPECT_EQ(add_shot_noise(e, 0, 1), e);
  EXPECT_EQ(add_shot_noise(e, 1000, 42), add_shot_noise(e, 1000, 42));
  const auto noisy = add_shot_noise(e, 1000000, 3);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(noisy[i], e[i], 5e-3);
}

TEST(Entangling, InteractionTimeForPublishedCoupling) {
  EntanglingOptions opts;
  opts.g_eff = angular(735e3);
  const auto r = entangling_protocol(reference::three_point_device(), df1(), angular(5.23e9), opts);
  EXPECT_NEAR(r.interaction_time / 170e-9, 1.0, 0.01);
  EXPECT_NEAR(r.interaction_time, kPi / (4 * angular(735e3)), 1e-18);
}

TEST(Entangling, IdealChannelsReachTarget) {
  const auto r = entangling_protocol(reference::three_point_device(), df1(), angular(5.23e9));
  EXPECT_GE(r.tomography.fidelity, 0.999);
  const auto& rho = r.run.final_state();
  EXPECT_NEAR(rho.expectation(pauli_string("ZZ")), -1.0, 1e-3);
  EXPECT_GE(std::abs(rho.matrix()(0b01, 0b10)), 0.499);
  ASSERT_EQ(r.schedule.segments.size(), 3u);
  EXPECT_EQ(r.schedule.segments[1].frequencies[0], angular(5.23e9));
}

TEST(Entangling, DeviceCLifetimesBracketPublishedFidelity) {
  const auto r = entangling_protocol(reference::three_point_device_c(), df1(), angular(5.23e9));
  EXPECT_GE(r.tomography.fidelity, 0.90);
  EXPECT_LE(r.tomography.fidelity, 0.97);
}

TEST(Entangling, FrameCorrectionCancelsIdlePhase) {
  const double w1 = angular(4.5e9), w2 = angular(5.23e9);
  EXPECT_NEAR(entangling_frame_correction(w1, w2, 0.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(entangling_frame_correction(w1, w2, 0.0, -1.0)), kPi, 1e-15);
  const double c = entangling_frame_correction(w1, w2, 20e-9, 1.0);
  EXPECT_NEAR(std::remainder(c + (w1 - w2) * 20e-9, kTwoPi), 0.0, 1e-9);
}

TEST(Entangling, RejectsNonDfFrequencies) {
  const auto l = reference::three_point_device();
  EXPECT_THROW(entangling_protocol(l, angular(4.8e9), angular(5.23e9)), ValidationError);
  EXPECT_THROW(entangling_protocol(l, angular(5.23e9), angular(5.23e9)), ValidationError);
  EXPECT_THROW(entangling_protocol(reference::two_point_device(), angular(4.645e9), angular(5.0e9)),
               ValidationError);
}

}  // namespace
}  // namespace gawqed
