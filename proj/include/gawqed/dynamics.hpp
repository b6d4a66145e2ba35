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

// Multi-atom master equation with individual and collective dissipators,
// represented as a dense superoperator on column-stacked density matrices,
// and exact propagation of time-independent segments.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/parallel.hpp"
#include "gawqed/quantum.hpp"
#include "gawqed/spectra.hpp"

namespace gawqed {

inline void require_supported_size(std::size_t atoms) {
  if (atoms == 0) throw DomainError("system must contain at least one atom");
  if (atoms > kMaxAtoms) {
    throw DomainError("systems larger than " + std::to_string(kMaxAtoms) +
                      " atoms are not supported by dense superoperator propagation");
  }
}

/// H = sum_j (w_j - w_rot) sz_j / 2 + sum_{j<k} g_jk (s-_j s+_k + s+_j s-_k),
/// with sz = +1 on the excited state.
inline CMatrix build_hamiltonian(const std::vector<double>& frequencies, const Eigen::MatrixXd& g_matrix,
                                 double rotating_frame_omega) {
  const std::size_t n = frequencies.size();
  require_supported_size(n);
  if (static_cast<std::size_t>(g_matrix.rows()) != n || static_cast<std::size_t>(g_matrix.cols()) != n) {
    throw DomainError("coupling matrix dimension does not match the number of atoms");
  }
  const double scale = std::max(1.0, g_matrix.cwiseAbs().maxCoeff());
  if ((g_matrix - g_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("coupling matrix must be symmetric");
  }
  if (g_matrix.diagonal().cwiseAbs().maxCoeff() > 0.0) throw DomainError("coupling matrix must have zero diagonal");

  const auto d = hilbert_dim(n);
  CMatrix h = CMatrix::Zero(d, d);
  std::vector<CMatrix> lower(n);
  for (std::size_t j = 0; j < n; ++j) {
    lower[j] = sigma_minus(j, n);
    h += 0.5 * (frequencies[j] - rotating_frame_omega) * sigma_z_excited(j, n);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      if (g_matrix(j, k) == 0.0) continue;
      const CMatrix hop = lower[j] * lower[k].adjoint();
      h += g_matrix(j, k) * (hop + hop.adjoint());
    }
  }
  return h;
}

struct Liouvillian {
  CMatrix superop;  // acts on column-stacked rho
  std::size_t atoms = 0;
};

inline CVector vectorize(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

inline CMatrix unvectorize(const CVector& v, std::size_t dim) {
  return Eigen::Map<const CMatrix>(v.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

/// Decay matrix with Gamma_j on the diagonal and Gamma_coll,jk off it.
inline Eigen::MatrixXd decay_matrix(const std::vector<double>& gammas, const Eigen::MatrixXd& gamma_coll) {
  Eigen::MatrixXd m = gamma_coll;
  for (std::size_t j = 0; j < gammas.size(); ++j) m(j, j) = gammas[j];
  return m;
}

/// drho/dt = -i[H, rho] + sum_jk D_jk (s-_j rho s+_k - {s+_k s-_j, rho}/2)
///         + sum_j (gamma_phi_j / 2) D[sz_j] rho.
/// D is the decay matrix; it must be positive semidefinite for the generator
/// to be completely positive.
inline Liouvillian build_liouvillian(const CMatrix& hamiltonian, const std::vector<double>& gammas,
                                     const Eigen::MatrixXd& gamma_coll, const std::vector<double>& gamma_phi) {
  const std::size_t n = gammas.size();
  require_supported_size(n);
  const auto d = hilbert_dim(n);
  if (static_cast<std::size_t>(hamiltonian.rows()) != d || static_cast<std::size_t>(hamiltonian.cols()) != d) {
    throw DomainError("Hamiltonian dimension does not match the number of atoms");
  }
  if (static_cast<std::size_t>(gamma_coll.rows()) != n || static_cast<std::size_t>(gamma_coll.cols()) != n) {
    throw DomainError("collective decay matrix dimension does not match the number of atoms");
  }
  if (gamma_phi.size() != n) throw DomainError("need one dephasing rate per atom");
  for (double r : gamma_phi) {
    if (!(r >= 0.0)) throw ValidationError("unphysical generator: negative dephasing rate");
  }

  const Eigen::MatrixXd dmat = decay_matrix(gammas, gamma_coll);
  const Eigen::MatrixXd dsym = 0.5 * (dmat + dmat.transpose());
  const double scale = dsym.cwiseAbs().maxCoeff();
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dsym, Eigen::EigenvaluesOnly);
    const double lowest = es.eigenvalues().minCoeff();
    if (lowest < -1e-9 * std::max(scale, std::numeric_limits<double>::min())) {
      throw ValidationError("unphysical generator: decay matrix has eigenvalue " + std::to_string(lowest) +
                            " (must be positive semidefinite)");
    }
  }

  const CMatrix id = CMatrix::Identity(d, d);
  Liouvillian out;
  out.atoms = n;
  out.superop = Complex(0, -1) * (kron(id, hamiltonian) - kron(hamiltonian.transpose(), id));

  std::vector<CMatrix> lower(n);
  for (std::size_t j = 0; j < n; ++j) lower[j] = sigma_minus(j, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double rate = dsym(j, k);
      if (rate == 0.0) continue;
      const CMatrix& a = lower[j];
      const CMatrix& b = lower[k];
      const CMatrix bda = b.adjoint() * a;
      out.superop += rate * (kron(b.conjugate(), a) - 0.5 * kron(id, bda) - 0.5 * kron(bda.transpose(), id));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (gamma_phi[j] == 0.0) continue;
    const CMatrix z = sigma_z_excited(j, n);
    // D[z] with z^2 = 1 reduces to z rho z - rho.
    out.superop += 0.5 * gamma_phi[j] * (kron(z.conjugate(), z) - kron(id, id));
  }
  return out;
}

/// Largest |entry| of vec(I)^T L relative to the largest entry of L.
inline double trace_preservation_error(const Liouvillian& l) {
  const auto d = hilbert_dim(l.atoms);
  const CVector trace_row = vectorize(CMatrix::Identity(d, d));
  const double scale = std::max(l.superop.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (trace_row.transpose() * l.superop).cwiseAbs().maxCoeff() / scale;
}

inline CMatrix propagator(const Liouvillian& l, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw DomainError("time step must be finite and >= 0");
  if (dt == 0.0) return CMatrix::Identity(l.superop.rows(), l.superop.cols());
  const CMatrix scaled = l.superop * dt;
  return scaled.exp();
}

inline DensityMatrix apply_propagator(const CMatrix& prop, const DensityMatrix& rho) {
  const auto d = rho.dim();
  if (static_cast<std::size_t>(prop.rows()) != d * d) throw DomainError("propagator does not match state dimension");
  CMatrix out = unvectorize(prop * vectorize(rho.matrix()), d);
  out = 0.5 * (out + out.adjoint()).eval();
  const double drift = std::abs(out.trace().real() - 1.0);
  if (drift > 1e-6) {
    throw NumericalError("propagation changed the trace by " + std::to_string(drift));
  }
  return DensityMatrix::unchecked(std::move(out));
}

inline DensityMatrix propagate(const DensityMatrix& rho, const Liouvillian& l, double dt) {
  if (rho.dim() != hilbert_dim(l.atoms)) throw DomainError("state dimension does not match the Liouvillian");
  return apply_propagator(propagator(l, dt), rho);
}

// Bridge from a device layout to master-equation coefficients.

struct ModelOptions {
  /// Parasitic exchange magnitude (rad/s) added in quadrature to every g_jk.
  double g_parasitic = 0.0;
  /// Collective decay between two atoms is kept only when their detuning is
  /// at most this fraction of their mean frequency.
  double collective_resonance = 1e-6;
};

struct MasterEquationRates {
  std::vector<double> frequencies;
  std::vector<double> gammas;
  Eigen::MatrixXd g;
  Eigen::MatrixXd gamma_coll;
  std::vector<double> gamma_phi;
};

/// Rates with each atom at its own frequency. Self terms use the atom's own
/// frequency, pair terms the mean of the two atom frequencies.
inline MasterEquationRates rates_at(const DeviceLayout& layout, const std::vector<double>& frequencies,
                                    const ModelOptions& options = {}) {
  const std::size_t n = layout.atoms.size();
  if (frequencies.size() != n) throw DomainError("need one frequency per atom");
  MasterEquationRates r;
  r.frequencies = frequencies;
  r.gammas.resize(n);
  r.gamma_phi.resize(n);
  r.g = Eigen::MatrixXd::Zero(n, n);
  r.gamma_coll = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    r.gammas[j] = gamma_general(layout, j, frequencies[j]);
    r.gamma_phi[j] = layout.atoms[j].gamma_phi;
    for (std::size_t k = j + 1; k < n; ++k) {
      const double mean = 0.5 * (frequencies[j] + frequencies[k]);
      r.g(j, k) = r.g(k, j) = with_parasitic(g_general(layout, j, k, mean), options.g_parasitic);
      if (std::abs(frequencies[j] - frequencies[k]) <= options.collective_resonance * mean) {
        r.gamma_coll(j, k) = r.gamma_coll(k, j) = gamma_coll_general(layout, j, k, mean);
      }
    }
  }

  // Near decoherence-free points the radiative decay matrix cancels to
  // round-off, which can leave tiny negative eigenvalues. Those are clipped;
  // anything larger than round-off on the natural rate scale is left for
  // build_liouvillian to reject.
  if (n > 0) {
    Eigen::MatrixXd radiative = r.gamma_coll;
    double natural = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      radiative(j, j) = r.gammas[j] - layout.atoms[j].gamma_nr;
      double root_sum = 0.0;
      for (const auto& p : layout.atoms[j].points) root_sum += std::sqrt(coupling_rate(p, frequencies[j], layout.omega_ref));
      natural = std::max(natural, root_sum * root_sum);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(radiative);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < 0.0 && ev.minCoeff() >= -1e-9 * natural) {
      const Eigen::MatrixXd clipped = es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
      for (std::size_t j = 0; j < n; ++j) {
        r.gammas[j] = clipped(j, j) + layout.atoms[j].gamma_nr;
        for (std::size_t k = 0; k < n; ++k) {
          if (k != j) r.gamma_coll(j, k) = clipped(j, k);
        }
      }
    }
  }
  return r;
}

inline double mean_frequency(const std::vector<double>& frequencies) {
  double s = 0.0;
  for (double f : frequencies) s += f;
  return frequencies.empty() ? 0.0 : s / static_cast<double>(frequencies.size());
}

inline Liouvillian build_liouvillian(const MasterEquationRates& r, double rotating_frame_omega) {
  return build_liouvillian(build_hamiltonian(r.frequencies, r.g, rotating_frame_omega), r.gammas, r.gamma_coll,
                           r.gamma_phi);
}

/// Layout restricted to the listed atoms, in the given order.
inline DeviceLayout sub_layout(const DeviceLayout& layout, const std::vector<std::size_t>& atoms) {
  DeviceLayout out;
  out.omega_ref = layout.omega_ref;
  for (auto j : atoms) {
    if (j >= layout.atoms.size()) throw DomainError("atom index out of range");
    out.atoms.push_back(layout.atoms[j]);
  }
  return out;
}

struct ExponentialFit {
  double amplitude = 0.0;
  double rate = 0.0;
  bool ok = false;
  std::string message;
};

/// Least-squares fit of p(t) = A exp(-rate t): log-linear start, then
/// Gauss-Newton on the unweighted residuals.
inline ExponentialFit fit_exponential(const std::vector<double>& t, const std::vector<double>& p) {
  ExponentialFit fit;
  const std::size_t n = t.size();
  if (n < 2 || p.size() != n) {
    fit.message = "need at least two samples";
    return fit;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p[i] > 0.0)) {
      fit.message = "population is not strictly positive";
      return fit;
    }
    if (i > 0 && p[i] > p[i - 1] * (1.0 + 1e-9) + 1e-12) {
      fit.message = "population is not monotonically decaying";
      return fit;
    }
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(p[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double denom = static_cast<double>(n) * stt - st * st;
  if (!(std::abs(denom) > 0.0)) {
    fit.message = "time grid is degenerate";
    return fit;
  }
  const double slope = (static_cast<double>(n) * sty - st * sy) / denom;
  double rate = -slope;
  double amplitude = std::exp((sy - slope * st) / static_cast<double>(n));

  for (int iter = 0; iter < 50; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-rate * t[i]);
      const double resid = p[i] - amplitude * e;
      const Eigen::Vector2d grad(e, -amplitude * t[i] * e);
      jtj += grad * grad.transpose();
      jtr += grad * resid;
    }
    const Eigen::Vector2d step = jtj.ldlt().solve(jtr);
    if (!step.allFinite()) break;
    amplitude += step(0);
    rate += step(1);
    if (std::abs(step(1)) <= 1e-15 * std::max(std::abs(rate), 1.0) &&
        std::abs(step(0)) <= 1e-15 * std::abs(amplitude)) {
      break;
    }
  }
  fit.amplitude = amplitude;
  fit.rate = rate;
  fit.ok = std::isfinite(rate) && std::isfinite(amplitude);
  if (!fit.ok) fit.message = "fit diverged";
  return fit;
}

struct T1Result {
  std::vector<double> t;
  std::vector<double> population;
  double fitted_rate = 0.0;
  double fitted_t1 = std::numeric_limits<double>::infinity();
  bool fit_ok = false;
  std::string message;
};

/// Excites atom `j` at frequency `omega` and records its population decay.
/// The remaining atoms are assumed parked far away and in their ground
/// state, so only atom `j` is simulated.
inline T1Result t1_experiment(const DeviceLayout& layout, std::size_t j, double omega, const std::vector<double>& t_grid,
                              const ModelOptions& options = {}) {
  require_positive_frequency(omega, "omega");
  const DeviceLayout single = sub_layout(layout, {j});
  const auto rates = rates_at(single, {omega}, options);
  const Liouvillian l = build_liouvillian(rates, omega);
  const DensityMatrix excited = DensityMatrix::basis_state(1, 1);

  T1Result out;
  out.t = t_grid;
  out.population.reserve(t_grid.size());
  for (double t : t_grid) out.population.push_back(propagate(excited, l, t).population(0));
  const auto fit = fit_exponential(out.t, out.population);
  out.fit_ok = fit.ok;
  out.message = fit.message;
  out.fitted_rate = fit.rate;
  out.fitted_t1 = fit.rate > 0.0 ? 1.0 / fit.rate : std::numeric_limits<double>::infinity();
  return out;
}

struct ChevronMap {
  std::vector<double> deltas;
  std::vector<double> times;
  std::vector<std::vector<double>> population;  // [delta][time], initially excited atom
};

/// Atom `first` starts excited at omega_df + delta, atom `second` sits at
/// omega_df in its ground state; records the population of `first`.
inline ChevronMap chevron_experiment(const DeviceLayout& layout, double omega_df, const std::vector<double>& delta_grid,
                                     const std::vector<double>& t_grid, const ModelOptions& options = {},
                                     std::size_t first = 0, std::size_t second = 1, unsigned threads = 1) {
  require_positive_frequency(omega_df, "omega_df");
  if (first == second) throw DomainError("chevron needs two distinct atoms");
  const DeviceLayout pair = sub_layout(layout, {first, second});
  const DensityMatrix start = DensityMatrix::basis_state(2, 0b10);

  ChevronMap map;
  map.deltas = delta_grid;
  map.times = t_grid;
  map.population = parallel_map(delta_grid.size(), threads, [&](std::size_t i) {
    const std::vector<double> freqs{omega_df + delta_grid[i], omega_df};
    const Liouvillian l = build_liouvillian(rates_at(pair, freqs, options), mean_frequency(freqs));
    std::vector<double> row;
    row.reserve(t_grid.size());
    for (double t : t_grid) row.push_back(propagate(start, l, t).population(0));
    return row;
  });
  return map;
}

/// Eigenfrequencies of two exchange-coupled atoms.
inline std::pair<double, double> avoided_crossing_branches(double omega_a, double omega_b, double g) {
  const double center = 0.5 * (omega_a + omega_b);
  const double half_delta = 0.5 * (omega_a - omega_b);
  const double split = std::sqrt(half_delta * half_delta + g * g);
  return {center + split, center - split};
}

}  // namespace gawqed
