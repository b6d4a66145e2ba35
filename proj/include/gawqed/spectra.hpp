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

// Relaxation rates, exchange couplings and collective decay for giant atoms.
//
// Two routes are provided and kept independent of each other:
//   * general double sums over every pair of coupling points of a layout;
//   * closed forms for the braided two-point and three-point devices.
// The test suite checks one against the other.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/parallel.hpp"

namespace gawqed {

namespace detail {

inline const GiantAtom& atom_at(const DeviceLayout& layout, std::size_t index) {
  if (index >= layout.atoms.size()) {
    throw DomainError("atom index " + std::to_string(index) + " out of range");
  }
  return layout.atoms[index];
}

template <typename Kernel>
double pair_sum(const DeviceLayout& layout, const GiantAtom& a, const GiantAtom& b, double omega, Kernel kernel) {
  double sum = 0.0;
  for (const auto& p : a.points) {
    const double gp = coupling_rate(p, omega, layout.omega_ref);
    for (const auto& q : b.points) {
      const double gq = coupling_rate(q, omega, layout.omega_ref);
      sum += std::sqrt(gp * gq) * kernel(phase_between(p, q, omega));
    }
  }
  return sum;
}

}  // namespace detail

/// Radiative part of the relaxation rate of atom `j` at its own frequency.
inline double radiative_rate(const DeviceLayout& layout, std::size_t j, double omega) {
  const auto& atom = detail::atom_at(layout, j);
  return detail::pair_sum(layout, atom, atom, omega, [](double phi) { return std::cos(phi); });
}

/// d(radiative_rate)/d(omega), analytic.
inline double radiative_rate_slope(const DeviceLayout& layout, std::size_t j, double omega) {
  require_positive_frequency(omega, "omega");
  const auto& atom = detail::atom_at(layout, j);
  const double inv_ref2 = 1.0 / (layout.omega_ref * layout.omega_ref);
  double slope = 0.0;
  for (const auto& p : atom.points) {
    for (const auto& q : atom.points) {
      const double weight = std::sqrt(p.gamma_ref * q.gamma_ref) * inv_ref2;
      const double dtau = std::abs(p.delay - q.delay);
      const double phi = omega * dtau;
      slope += weight * (2.0 * omega * std::cos(phi) - omega * omega * dtau * std::sin(phi));
    }
  }
  return slope;
}

/// Total relaxation rate: double sum over the atom's points plus gamma_nr.
inline double gamma_general(const DeviceLayout& layout, std::size_t j, double omega) {
  return radiative_rate(layout, j, omega) + detail::atom_at(layout, j).gamma_nr;
}

inline double g_general(const DeviceLayout& layout, std::size_t j, std::size_t k, double omega) {
  if (j == k) throw DomainError("exchange coupling needs two distinct atoms");
  return detail::pair_sum(layout, detail::atom_at(layout, j), detail::atom_at(layout, k), omega,
                          [](double phi) { return 0.5 * std::sin(phi); });
}

inline double gamma_coll_general(const DeviceLayout& layout, std::size_t j, std::size_t k, double omega) {
  if (j == k) throw DomainError("collective decay needs two distinct atoms");
  return detail::pair_sum(layout, detail::atom_at(layout, j), detail::atom_at(layout, k), omega,
                          [](double phi) { return std::cos(phi); });
}

// Closed forms. `phi` are the phases between neighbouring coupling points at
// the frequency of interest, `gamma` the per-point rates at that frequency.

inline double two_point_gamma(double gamma, double phi, double gamma_nr) {
  return 2.0 * gamma * (1.0 + std::cos(2.0 * phi)) + gamma_nr;
}

inline double two_point_g(double gamma, double phi) {
  return 0.5 * gamma * (3.0 * std::sin(phi) + std::sin(3.0 * phi));
}

inline double three_point_gamma(double gamma1, double gamma2, double phi1, double phi2, double phi3,
                                double gamma_nr) {
  return gamma2 + 2.0 * gamma1 * (1.0 + std::cos(phi1 + 2.0 * phi2 + phi3)) +
         2.0 * std::sqrt(gamma1 * gamma2) * (std::cos(phi1 + phi2) + std::cos(phi2 + phi3)) + gamma_nr;
}

inline double three_point_g(double gamma1, double gamma2, double phi1, double phi2, double phi3) {
  return std::sqrt(gamma1 * gamma2) * (std::sin(phi2) + std::sin(phi1 + phi2 + phi3)) +
         0.5 * gamma1 * (2.0 * std::sin(phi1) + std::sin(2.0 * phi2 + phi3) + std::sin(2.0 * phi1 + 2.0 * phi2 + phi3)) +
         0.5 * gamma2 * std::sin(phi3);
}

/// The three-point device with phi1 = phi3 = r*phi2 has a radiative rate equal
/// to (2 sqrt(gamma1) cos x + sqrt(gamma2))^2 with x = (1 + r) phi2, so it is
/// decoherence-free wherever cos x = -sqrt(gamma2/gamma1)/2. Returns the
/// `index`-th positive solution x in ascending order, or NaN when
/// gamma2 > 4 gamma1 (no solution).
inline double three_point_df_phase_sum(double gamma1, double gamma2, int index) {
  const double c = -0.5 * std::sqrt(gamma2 / gamma1);
  if (!(std::abs(c) <= 1.0) || index < 0) return std::numeric_limits<double>::quiet_NaN();
  const double a = std::acos(c);
  const int turn = (index + 1) / 2;
  return (index % 2 == 0) ? kTwoPi * turn + a : kTwoPi * turn - a;
}

/// Exchange coupling including a parasitic channel of magnitude `g_parasitic`
/// that adds in quadrature: |result| >= |g_parasitic|, sign follows g.
inline double with_parasitic(double g, double g_parasitic) {
  if (g_parasitic == 0.0) return g;
  const double magnitude = std::hypot(g, g_parasitic);
  return g < 0.0 ? -magnitude : magnitude;
}

struct SpectrumSample {
  double omega = 0.0;
  std::vector<double> gamma;   // per atom, includes gamma_nr
  Eigen::MatrixXd g;           // symmetric, zero diagonal
  Eigen::MatrixXd gamma_coll;  // symmetric, zero diagonal
};

inline SpectrumSample spectrum_at(const DeviceLayout& layout, double omega, double g_parasitic = 0.0) {
  const std::size_t n = layout.atoms.size();
  SpectrumSample s;
  s.omega = omega;
  s.gamma.resize(n);
  s.g = Eigen::MatrixXd::Zero(n, n);
  s.gamma_coll = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    s.gamma[j] = gamma_general(layout, j, omega);
    for (std::size_t k = j + 1; k < n; ++k) {
      s.g(j, k) = s.g(k, j) = with_parasitic(g_general(layout, j, k, omega), g_parasitic);
      s.gamma_coll(j, k) = s.gamma_coll(k, j) = gamma_coll_general(layout, j, k, omega);
    }
  }
  return s;
}

/// Radiative decay matrix: (Gamma_j - gamma_nr_j) on the diagonal, Gamma_coll off it.
inline Eigen::MatrixXd radiative_decay_matrix(const DeviceLayout& layout, const SpectrumSample& s) {
  Eigen::MatrixXd m = s.gamma_coll;
  for (std::size_t j = 0; j < s.gamma.size(); ++j) m(j, j) = s.gamma[j] - layout.atoms[j].gamma_nr;
  return m;
}

inline std::vector<SpectrumSample> sweep(const DeviceLayout& layout, const std::vector<double>& omega_grid,
                                         unsigned threads = 1, double g_parasitic = 0.0) {
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    require_positive_frequency(omega_grid[i], "sweep grid point");
    if (i > 0 && omega_grid[i] < omega_grid[i - 1]) throw DomainError("sweep grid must be sorted");
  }
  return parallel_map(omega_grid.size(), threads,
                      [&](std::size_t i) { return spectrum_at(layout, omega_grid[i], g_parasitic); });
}

struct DfFrequency {
  double omega = 0.0;
  std::string atom_id;
  double residual = 0.0;  // radiative rate at omega
};

/// Decoherence-free frequencies of atom `j` in [omega_lo, omega_hi].
///
/// The radiative rate is non-negative and touches zero without crossing, so a
/// sign-change search would miss it. Instead every local minimum on a dense
/// grid is bracketed and refined by bisection on the sign of the analytic
/// slope; minima whose radiative rate is at most `tol` are reported.
inline std::vector<DfFrequency> find_df_frequencies(const DeviceLayout& layout, std::size_t j, double omega_lo,
                                                    double omega_hi, double tol, std::size_t grid_points = 4001) {
  require_positive_frequency(omega_lo, "band lower edge");
  require_positive_frequency(omega_hi, "band upper edge");
  if (!(omega_hi > omega_lo)) throw DomainError("band must satisfy omega_lo < omega_hi");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  grid_points = std::max<std::size_t>(grid_points, 3);

  std::vector<double> grid(grid_points);
  std::vector<double> rate(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    rate[i] = radiative_rate(layout, j, grid[i]);
  }

  std::vector<DfFrequency> found;
  auto refine = [&](double lo, double hi) {
    // Invariant: slope(lo) <= 0 <= slope(hi).
    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (radiative_rate_slope(layout, j, mid) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double r_lo = radiative_rate(layout, j, lo);
    const double r_hi = radiative_rate(layout, j, hi);
    return r_lo <= r_hi ? lo : hi;
  };

  for (std::size_t i = 0; i < grid_points; ++i) {
    const bool left_ok = (i == 0) || rate[i] <= rate[i - 1];
    const bool right_ok = (i + 1 == grid_points) || rate[i] < rate[i + 1];
    if (!left_ok || !right_ok) continue;
    double omega = grid[i];
    if (i > 0 && i + 1 < grid_points) {
      omega = refine(grid[i - 1], grid[i + 1]);
    } else if (i == 0 && radiative_rate_slope(layout, j, grid[0]) < 0.0) {
      omega = refine(grid[0], grid[1]);
    } else if (i + 1 == grid_points && radiative_rate_slope(layout, j, grid[i]) > 0.0) {
      omega = refine(grid[i - 1], grid[i]);
    }
    const double residual = radiative_rate(layout, j, omega);
    if (std::abs(residual) <= tol) found.push_back({omega, layout.atoms[j].id, residual});
  }
  return found;
}

}  // namespace gawqed
