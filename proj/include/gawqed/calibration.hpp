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

// Transmon frequency versus flux and flux-line crosstalk compensation.
// Frequencies here are cyclic (Hz); flux is in units of the flux quantum.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gawqed/core.hpp"

namespace gawqed {

struct TransmonFluxModel {
  std::string id;
  double f_max = 0.0;        // Hz
  double d = 1.0;            // junction asymmetry, (0, 1]
  double phi0_offset = 0.0;  // rad
  double v0 = 1.0;           // volts per flux quantum on the qubit's own line
};

inline void validate(const TransmonFluxModel& m) {
  const std::string who = m.id.empty() ? "transmon" : "qubit '" + m.id + "'";
  if (!(m.f_max > 0.0) || !std::isfinite(m.f_max)) throw ValidationError(who + ": f_max must be positive");
  if (!(m.d > 0.0 && m.d <= 1.0)) throw ValidationError(who + ": asymmetry d must lie in (0, 1]");
  if (!(m.v0 != 0.0) || !std::isfinite(m.v0)) throw ValidationError(who + ": V0 must be non-zero");
  if (!std::isfinite(m.phi0_offset)) throw ValidationError(who + ": phi0 must be finite");
}

/// f = f_max (d^2 + (1 - d^2) cos^2(pi flux - phi0))^(1/4)
inline double transmon_frequency(const TransmonFluxModel& m, double flux) {
  const double c = std::cos(kPi * flux - m.phi0_offset);
  return m.f_max * std::pow(m.d * m.d + (1.0 - m.d * m.d) * c * c, 0.25);
}

inline double min_frequency(const TransmonFluxModel& m) { return m.f_max * std::sqrt(m.d); }

/// Flux on the `branch`-th period of the rising side:
/// (arccos(sqrt((r^4 - d^2)/(1 - d^2))) + phi0 + branch pi) / pi with r = target/f_max.
inline double flux_for_frequency(const TransmonFluxModel& m, double target, int branch = 0) {
  const double lo = min_frequency(m);
  const double slack = 1e-12 * m.f_max;
  if (!(target >= lo - slack && target <= m.f_max + slack)) {
    throw DomainError("target frequency " + std::to_string(target) + " Hz is outside [" + std::to_string(lo) + ", " +
                      std::to_string(m.f_max) + "] Hz" + (m.id.empty() ? "" : " for qubit '" + m.id + "'"));
  }
  const double r = target / m.f_max;
  const double d2 = m.d * m.d;
  double theta = 0.0;
  if (d2 < 1.0) {
    const double c2 = std::clamp((r * r * r * r - d2) / (1.0 - d2), 0.0, 1.0);
    theta = std::acos(std::sqrt(c2));
  }
  return (theta + m.phi0_offset + branch * kPi) / kPi;
}

/// Solution of transmon_frequency(flux) = target with the smallest |flux|,
/// considering both flanks of every period.
inline double nearest_flux_for_frequency(const TransmonFluxModel& m, double target) {
  const double rising = flux_for_frequency(m, target, 0);
  const double theta_over_pi = rising - m.phi0_offset / kPi;
  const double centre = m.phi0_offset / kPi;
  double best = std::numeric_limits<double>::infinity();
  for (double base : {centre + theta_over_pi, centre - theta_over_pi}) {
    const double candidate = base - std::round(base);
    if (std::abs(candidate) < std::abs(best) - 1e-15) best = candidate;
  }
  return best;
}

/// Flux-line crosstalk: flux_i = sum_j S_ij V_j, S in flux quanta per volt.
struct CrosstalkMatrix {
  Eigen::MatrixXd s;
};

/// Condition number from the singular values; infinity when singular.
inline double condition_number(const CrosstalkMatrix& c) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c.s);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

inline std::vector<Diagnostic> validate(const CrosstalkMatrix& c) {
  std::vector<Diagnostic> out;
  if (c.s.rows() != c.s.cols() || c.s.rows() == 0) {
    out.push_back({Severity::kError, "shape", "crosstalk matrix must be square and non-empty"});
    return out;
  }
  const double cond = condition_number(c);
  if (!(cond < 1e6)) {
    out.push_back({Severity::kError, "singular", "crosstalk matrix is singular or ill-conditioned (cond " +
                                                     std::to_string(cond) + ")"});
  }
  for (Eigen::Index i = 0; i < c.s.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.s.cols(); ++j) {
      if (i != j && std::abs(c.s(i, j)) >= std::abs(c.s(i, i))) {
        out.push_back({Severity::kWarning, "not_diagonal_dominant",
                       "row " + std::to_string(i) + " has an off-diagonal entry at least as large as its diagonal"});
        break;
      }
    }
  }
  return out;
}

inline Eigen::VectorXd voltages_for_fluxes(const CrosstalkMatrix& c, const Eigen::VectorXd& fluxes) {
  for (const auto& d : validate(c)) {
    if (d.severity == Severity::kError) throw DomainError(d.message);
  }
  if (fluxes.size() != c.s.rows()) throw DomainError("need one flux per qubit");
  return c.s.fullPivLu().solve(fluxes);
}

/// Maps target frequencies (Hz) to line voltages via V = S^-1 flux. The flux
/// for each qubit is the solution nearest zero flux.
inline Eigen::VectorXd voltages_for_targets(const std::vector<TransmonFluxModel>& models, const CrosstalkMatrix& c,
                                            const std::vector<double>& targets) {
  if (models.size() != targets.size()) throw DomainError("need one target per qubit");
  Eigen::VectorXd fluxes(static_cast<Eigen::Index>(models.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    validate(models[i]);
    fluxes(static_cast<Eigen::Index>(i)) = nearest_flux_for_frequency(models[i], targets[i]);
  }
  return voltages_for_fluxes(c, fluxes);
}

/// Forward map: frequencies produced by line voltages.
inline std::vector<double> frequencies_for_voltages(const std::vector<TransmonFluxModel>& models,
                                                    const CrosstalkMatrix& c, const Eigen::VectorXd& volts) {
  const Eigen::VectorXd flux = c.s * volts;
  std::vector<double> out(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    out[i] = transmon_frequency(models[i], flux(static_cast<Eigen::Index>(i)));
  }
  return out;
}

}  // namespace gawqed
