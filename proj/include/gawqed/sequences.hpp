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

// Piecewise-constant frequency schedules with instantaneous single-qubit
// gates, two-qubit Pauli tomography and state fidelity.
//
// Schedules are simulated in one rotating frame shared by all atoms. Each
// atom additionally accumulates the phase (w_j - w_frame) t of its own free
// precession; gates and reported states use the frame that follows every
// qubit's own frequency, which is how phase-tracked hardware sees them.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/dynamics.hpp"
#include "gawqed/quantum.hpp"
#include "gawqed/spectra.hpp"

namespace gawqed {

enum class Axis { kX, kY, kZ };

inline char axis_label(Axis a) { return a == Axis::kX ? 'X' : (a == Axis::kY ? 'Y' : 'Z'); }

inline Axis parse_axis(const std::string& s) {
  if (s == "x" || s == "X") return Axis::kX;
  if (s == "y" || s == "Y") return Axis::kY;
  if (s == "z" || s == "Z") return Axis::kZ;
  throw ValidationError("unknown gate axis '" + s + "' (expected x, y or z)");
}

struct Segment {
  double duration = 0.0;
  std::vector<double> frequencies;  // one angular frequency per atom
};

struct GateOp {
  std::size_t after_segment = 0;
  std::size_t atom = 0;
  Axis axis = Axis::kX;
  double angle = 0.0;
};

struct MeasurementOp {
  std::size_t after_segment = 0;
  std::string basis;  // Pauli string, one letter per atom
};

struct PulseSchedule {
  std::vector<Segment> segments;
  std::vector<GateOp> gates;
  std::vector<MeasurementOp> measurements;
  std::optional<double> frame_omega;  // default: mean of the first segment's frequencies
};

struct FrequencyBand {
  double lo = 0.0;
  double hi = 0.0;
};

inline void validate_schedule(const PulseSchedule& s, std::size_t atoms, std::optional<FrequencyBand> band = {}) {
  for (std::size_t i = 0; i < s.segments.size(); ++i) {
    const auto& seg = s.segments[i];
    const std::string where = "segment " + std::to_string(i);
    if (!(seg.duration >= 0.0) || !std::isfinite(seg.duration)) throw ValidationError(where + ": duration must be >= 0");
    if (seg.frequencies.size() != atoms) throw ValidationError(where + ": needs one frequency per atom");
    for (double w : seg.frequencies) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError(where + ": frequencies must be positive");
      if (band && (w < band->lo || w > band->hi)) throw ValidationError(where + ": frequency outside the allowed band");
    }
  }
  for (const auto& g : s.gates) {
    if (g.after_segment >= s.segments.size()) throw ValidationError("gate refers to a segment that does not exist");
    if (g.atom >= atoms) throw ValidationError("gate refers to an atom that does not exist");
    if (!std::isfinite(g.angle)) throw ValidationError("gate angle must be finite");
  }
  for (const auto& m : s.measurements) {
    if (m.after_segment >= s.segments.size()) {
      throw ValidationError("measurement refers to a segment that does not exist");
    }
    if (m.basis.size() != atoms) throw ValidationError("measurement basis needs one Pauli letter per atom");
    for (char c : m.basis) {
      if (std::string("IXYZ").find(c) == std::string::npos) throw ValidationError("measurement basis must use I, X, Y, Z");
    }
  }
}

/// exp(-i angle sigma_axis / 2) acting on one atom.
inline CMatrix rotation(std::size_t atom, std::size_t atoms, Axis axis, double angle) {
  const CMatrix single = std::cos(0.5 * angle) * CMatrix::Identity(2, 2) -
                         Complex(0, 1) * std::sin(0.5 * angle) * pauli(axis_label(axis));
  return embed(single, atom, atoms);
}

inline DensityMatrix apply_gate(const DensityMatrix& rho, std::size_t atom, Axis axis, double angle) {
  const std::size_t n = rho.atoms();
  if (atom >= n) throw DomainError("gate target atom " + std::to_string(atom) + " does not exist");
  const CMatrix u = rotation(atom, n, axis, angle);
  return DensityMatrix::unchecked(u * rho.matrix() * u.adjoint());
}

/// exp(-i sum_j phase_j sz_j / 2), sz = +1 on the excited state.
inline CMatrix free_precession(const std::vector<double>& phases) {
  const std::size_t n = phases.size();
  const auto d = hilbert_dim(n);
  CMatrix w = CMatrix::Zero(d, d);
  for (std::size_t idx = 0; idx < d; ++idx) {
    double angle = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool excited = (idx >> (n - 1 - j)) & 1u;
      angle += excited ? 0.5 * phases[j] : -0.5 * phases[j];
    }
    w(idx, idx) = std::polar(1.0, -angle);
  }
  return w;
}

/// Removes accumulated free precession: returns W^dag rho W.
inline DensityMatrix to_qubit_frame(const DensityMatrix& rho, const std::vector<double>& phases) {
  const CMatrix w = free_precession(phases);
  return DensityMatrix::unchecked(w.adjoint() * rho.matrix() * w);
}

struct TrajectoryPoint {
  double time = 0.0;
  std::string event;
  DensityMatrix state;        // shared rotating frame
  DensityMatrix qubit_state;  // frame following each qubit's frequency
};

struct MeasurementRecord {
  std::size_t after_segment = 0;
  std::string basis;
  double expectation = 0.0;
};

struct ScheduleRun {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<MeasurementRecord> measurements;
  std::vector<double> phases;
  double frame_omega = 0.0;

  const DensityMatrix& final_state() const { return trajectory.back().qubit_state; }
};

struct RunOptions {
  ModelOptions model;
  std::size_t samples_per_segment = 1;
};

/// Runs the schedule from rho0. For every segment the spectra are evaluated
/// at that segment's frequencies and a fresh Liouvillian is built.
inline ScheduleRun run_schedule(const DeviceLayout& layout, const PulseSchedule& schedule, const DensityMatrix& rho0,
                                const RunOptions& options = {}) {
  const std::size_t n = layout.atoms.size();
  validate_schedule(schedule, n);
  if (rho0.dim() != hilbert_dim(n)) throw DomainError("initial state dimension does not match the layout");

  ScheduleRun run;
  run.phases.assign(n, 0.0);
  run.frame_omega = schedule.frame_omega.value_or(
      schedule.segments.empty() ? 0.0 : mean_frequency(schedule.segments.front().frequencies));

  DensityMatrix rho = rho0;
  double time = 0.0;
  run.trajectory.push_back({0.0, "initial", rho, rho});
  const std::size_t samples = std::max<std::size_t>(1, options.samples_per_segment);

  for (std::size_t si = 0; si < schedule.segments.size(); ++si) {
    const auto& seg = schedule.segments[si];
    const Liouvillian l = build_liouvillian(rates_at(layout, seg.frequencies, options.model), run.frame_omega);
    const double dt = seg.duration / static_cast<double>(samples);
    const CMatrix step = propagator(l, dt);
    for (std::size_t k = 0; k < samples; ++k) {
      rho = apply_propagator(step, rho);
      time += dt;
      for (std::size_t j = 0; j < n; ++j) run.phases[j] += (seg.frequencies[j] - run.frame_omega) * dt;
      const std::string event = "segment " + std::to_string(si) + (k + 1 == samples ? "" : " (sample)");
      run.trajectory.push_back({time, event, rho, to_qubit_frame(rho, run.phases)});
    }
    for (const auto& gate : schedule.gates) {
      if (gate.after_segment != si) continue;
      // Gate axes are defined in the qubit's own frame.
      const CMatrix w = free_precession(run.phases);
      const CMatrix u = w * rotation(gate.atom, n, gate.axis, gate.angle) * w.adjoint();
      rho = DensityMatrix::unchecked(u * rho.matrix() * u.adjoint());
      std::string event = "gate ";
      event += axis_label(gate.axis);
      event += " on " + layout.atoms[gate.atom].id;
      run.trajectory.push_back({time, event, rho, to_qubit_frame(rho, run.phases)});
    }
    for (const auto& m : schedule.measurements) {
      if (m.after_segment != si) continue;
      const double value = run.trajectory.back().qubit_state.expectation(pauli_string(m.basis));
      run.measurements.push_back({si, m.basis, value});
    }
  }
  return run;
}

// Two-qubit tomography.

inline const std::array<std::string, 15>& pauli_labels() {
  static const std::array<std::string, 15> labels = [] {
    std::array<std::string, 15> out;
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    std::size_t k = 0;
    for (char a : letters) {
      for (char b : letters) {
        if (a == 'I' && b == 'I') continue;
        out[k++] = std::string{a, b};
      }
    }
    return out;
  }();
  return labels;
}

using PauliExpectations = std::array<double, 15>;

inline PauliExpectations pauli_expectations(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw DomainError("Pauli tomography needs a two-qubit state");
  PauliExpectations out{};
  const auto& labels = pauli_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = rho.expectation(pauli_string(labels[i]));
  return out;
}

/// Linear inversion followed by projection onto the nearest unit-trace PSD matrix.
inline DensityMatrix reconstruct(const PauliExpectations& expectations) {
  CMatrix m = CMatrix::Identity(4, 4);
  const auto& labels = pauli_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) m += expectations[i] * pauli_string(labels[i]);
  m /= 4.0;
  return DensityMatrix::unchecked(project_to_density(m));
}

/// Uhlmann fidelity Tr(sqrt(sqrt(sigma) rho sqrt(sigma)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("fidelity needs states of equal dimension");
  const DensityTolerance tol{1e-9, 1e-9, 1e-9};
  if (auto v = rho.violation(tol); !v.empty()) throw DomainError("fidelity: first argument: " + v);
  if (auto v = sigma.violation(tol); !v.empty()) throw DomainError("fidelity: second argument: " + v);
  // Eigenvalues at round-off level are zeroed so that rank-deficient states
  // do not pick up sqrt(eps) errors.
  const auto root = [](const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
    const double floor = 8.0 * static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon();
    const Eigen::VectorXd ev = es.eigenvalues().unaryExpr([&](double x) { return x > floor ? std::sqrt(x) : 0.0; });
    return CMatrix(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
  };
  const double s = Eigen::JacobiSVD<CMatrix>(root(rho.matrix()) * root(sigma.matrix())).singularValues().sum();
  return s * s;
}

/// Replaces each expectation by the mean of `shots` ideal +/-1 outcomes.
inline PauliExpectations add_shot_noise(const PauliExpectations& exact, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) return exact;
  std::mt19937_64 rng(seed);
  PauliExpectations out{};
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double p = std::clamp(0.5 * (1.0 + exact[i]), 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> dist(shots, p);
    out[i] = 2.0 * static_cast<double>(dist(rng)) / static_cast<double>(shots) - 1.0;
  }
  return out;
}

struct TomographyResult {
  PauliExpectations expectations{};
  DensityMatrix rho_hat;
  double fidelity = 0.0;
};

inline TomographyResult tomography(const DensityMatrix& rho, const DensityMatrix& target, std::uint64_t shots = 0,
                                   std::uint64_t seed = 0) {
  TomographyResult out;
  out.expectations = add_shot_noise(pauli_expectations(rho), shots, seed);
  out.rho_hat = reconstruct(out.expectations);
  out.fidelity = fidelity(out.rho_hat, target);
  return out;
}

/// (|01> - i|10>)/sqrt(2), atom a first.
inline DensityMatrix sqrt_iswap_target() {
  CVector psi = CVector::Zero(4);
  psi(0b01) = 1.0 / std::sqrt(2.0);
  psi(0b10) = Complex(0.0, -1.0 / std::sqrt(2.0));
  return DensityMatrix::pure(psi);
}

struct EntanglingOptions {
  std::optional<double> g_eff;  // rad/s; default: model coupling at omega_df2
  double idle_before = 20e-9;   // a at DF1, b at DF2 before the pi pulse on b
  double idle_after = 20e-9;    // a back at DF1 before tomography
  double df_tolerance = 1e-3;   // radiative rate / (sum sqrt(gamma_ref))^2
  RunOptions run;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};

struct EntanglingResult {
  PulseSchedule schedule;
  double g_eff = 0.0;
  double interaction_time = 0.0;
  ScheduleRun run;
  TomographyResult tomography;
};

/// The exchange acts in the lab frame, so in the qubit frames the created
/// coherence carries the relative phase accumulated while the atoms sat at
/// different frequencies. A virtual Z on a after the interaction removes it;
/// for a negative coupling it also adds pi so the target is reached.
inline double entangling_frame_correction(double omega_df1, double omega_df2, double idle_before, double g) {
  const double phase = (omega_df1 - omega_df2) * idle_before + (g < 0.0 ? kPi : 0.0);
  return std::remainder(-phase, kTwoPi);
}

inline PulseSchedule entangling_schedule(double omega_df1, double omega_df2, double interaction_time,
                                         double idle_before, double idle_after, double frame_correction = 0.0) {
  PulseSchedule s;
  s.segments.push_back({idle_before, {omega_df1, omega_df2}});
  s.segments.push_back({interaction_time, {omega_df2, omega_df2}});
  s.segments.push_back({idle_after, {omega_df1, omega_df2}});
  s.gates.push_back({0, 1, Axis::kX, kPi});
  if (frame_correction != 0.0) s.gates.push_back({1, 0, Axis::kZ, frame_correction});
  return s;
}

/// a parked at DF1 and b at DF2; pi pulse on b; a brought to DF2 for
/// pi/(4 g_eff); a returned to DF1; two-qubit tomography against
/// (|01> - i|10>)/sqrt(2). Atoms 0 and 1 of the layout play a and b.
inline EntanglingResult entangling_protocol(const DeviceLayout& layout, double omega_df1, double omega_df2,
                                            const EntanglingOptions& options = {}) {
  if (layout.atoms.size() != 2) throw ValidationError("entangling protocol needs a two-atom layout");
  require_positive_frequency(omega_df1, "omega_df1");
  require_positive_frequency(omega_df2, "omega_df2");
  if (omega_df1 == omega_df2) throw ValidationError("entangling protocol needs two distinct decoherence-free frequencies");

  auto check_df = [&](std::size_t j, double omega, const char* name) {
    double root_sum = 0.0;
    for (const auto& p : layout.atoms[j].points) root_sum += std::sqrt(coupling_rate(p, omega, layout.omega_ref));
    const double residual = radiative_rate(layout, j, omega);
    if (residual > options.df_tolerance * root_sum * root_sum) {
      throw ValidationError(std::string(name) + " is not a decoherence-free frequency of atom '" +
                            layout.atoms[j].id + "'");
    }
  };
  check_df(0, omega_df1, "omega_df1");
  check_df(0, omega_df2, "omega_df2");
  check_df(1, omega_df2, "omega_df2");

  EntanglingResult out;
  const double g_model = rates_at(layout, {omega_df2, omega_df2}, options.run.model).g(0, 1);
  out.g_eff = options.g_eff.value_or(std::abs(g_model));
  if (!(out.g_eff > 0.0)) throw ValidationError("exchange coupling at omega_df2 vanishes; cannot entangle");
  out.interaction_time = kPi / (4.0 * out.g_eff);
  out.schedule = entangling_schedule(omega_df1, omega_df2, out.interaction_time, options.idle_before,
                                     options.idle_after,
                                     entangling_frame_correction(omega_df1, omega_df2, options.idle_before, g_model));
  out.run = run_schedule(layout, out.schedule, DensityMatrix::ground(2), options.run);
  out.tomography = tomography(out.run.final_state(), sqrt_iswap_target(), options.shots, options.seed);
  return out;
}

}  // namespace gawqed
