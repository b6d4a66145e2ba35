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

// Giant-atom geometry: coupling points along a waveguide, their
// frequency-scaled strengths, and the phase accumulated between them.
//
// All rates and frequencies are angular (rad/s). Positions are stored as
// photon travel times from the waveguide origin, so the phase between two
// points at frequency w is w * |delay_a - delay_b|.

#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gawqed/core.hpp"

namespace gawqed {

struct CouplingPoint {
  double delay = 0.0;      // seconds
  double gamma_ref = 0.0;  // rad/s, at DeviceLayout::omega_ref
};

struct GiantAtom {
  std::string id;
  std::vector<CouplingPoint> points;  // sorted by delay
  double gamma_nr = 0.0;
  double gamma_phi = 0.0;
};

struct DeviceLayout {
  std::vector<GiantAtom> atoms;
  double omega_ref = 0.0;

  std::size_t atom_index(const std::string& id) const {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].id == id) return i;
    }
    throw DomainError("unknown atom id '" + id + "'");
  }
};

/// Physical coupling of one point at frequency `omega`: gamma_ref * (omega/omega_ref)^2.
inline double coupling_rate(const CouplingPoint& point, double omega, double omega_ref) {
  require_positive_frequency(omega, "omega");
  require_positive_frequency(omega_ref, "omega_ref");
  const double s = omega / omega_ref;
  return point.gamma_ref * s * s;
}

inline double phase_between(const CouplingPoint& a, const CouplingPoint& b, double omega) {
  require_positive_frequency(omega, "omega");
  return omega * std::abs(a.delay - b.delay);
}

/// Sum of the phase factors exp(-i w tau_n) over the atom's coupling points.
inline std::complex<double> complex_amplitude(const GiantAtom& atom, double omega) {
  require_positive_frequency(omega, "omega");
  std::complex<double> sum{0.0, 0.0};
  for (const auto& p : atom.points) sum += std::polar(1.0, -omega * p.delay);
  return sum;
}

/// Order of coupling points along the waveguide: `order[i]` is the index into
/// `atom_ids` of the atom owning the i-th point. Braiding of two
/// atoms is {0, 1, 0, 1}.
struct BraidPattern {
  std::vector<std::string> atom_ids;
  std::vector<std::size_t> order;
};

/// Builds a layout from phase gaps between consecutive points, all quoted at
/// `omega_ref`. Delays are cumulative: tau_0 = 0, tau_{i+1} = tau_i + gap_i / omega_ref.
inline DeviceLayout layout_from_phase_refs(std::span<const double> phase_gaps_at_ref,
                                           std::span<const double> strengths_at_ref, double omega_ref,
                                           const BraidPattern& pattern) {
  if (!(omega_ref > 0.0) || !std::isfinite(omega_ref)) {
    throw ValidationError("omega_ref must be positive and finite");
  }
  const std::size_t n_points = pattern.order.size();
  if (n_points == 0) throw ValidationError("braid pattern has no coupling points");
  if (strengths_at_ref.size() != n_points) {
    throw ValidationError("braid pattern has " + std::to_string(n_points) + " points but " +
                          std::to_string(strengths_at_ref.size()) + " strengths were given");
  }
  if (phase_gaps_at_ref.size() + 1 != n_points) {
    throw ValidationError("expected " + std::to_string(n_points - 1) + " phase gaps, got " +
                          std::to_string(phase_gaps_at_ref.size()));
  }
  std::set<std::string> unique_ids(pattern.atom_ids.begin(), pattern.atom_ids.end());
  if (unique_ids.size() != pattern.atom_ids.size()) throw ValidationError("duplicate atom id in braid pattern");

  DeviceLayout layout;
  layout.omega_ref = omega_ref;
  layout.atoms.resize(pattern.atom_ids.size());
  for (std::size_t a = 0; a < pattern.atom_ids.size(); ++a) layout.atoms[a].id = pattern.atom_ids[a];

  // Summing phases first and dividing once keeps phase_between(.., omega_ref)
  // equal to the summed gaps up to a single rounding.
  double cumulative_phase = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    if (i > 0) {
      const double gap = phase_gaps_at_ref[i - 1];
      if (!(gap >= 0.0) || !std::isfinite(gap)) throw ValidationError("phase gaps must be finite and >= 0");
      cumulative_phase += gap;
    }
    const std::size_t owner = pattern.order[i];
    if (owner >= layout.atoms.size()) {
      throw ValidationError("braid pattern refers to atom index " + std::to_string(owner) + " which does not exist");
    }
    layout.atoms[owner].points.push_back({cumulative_phase / omega_ref, strengths_at_ref[i]});
  }
  for (const auto& atom : layout.atoms) {
    if (atom.points.empty()) throw ValidationError("atom '" + atom.id + "' has no coupling points in the pattern");
  }
  return layout;
}

/// Two atoms braided a,b,a,b with equal strengths and equal gaps `phi_ref`.
inline DeviceLayout braided_two_point(double gamma, double phi_ref, double omega_ref, double gamma_nr = 0.0) {
  const std::vector<double> gaps{phi_ref, phi_ref, phi_ref};
  const std::vector<double> strengths(4, gamma);
  auto layout = layout_from_phase_refs(gaps, strengths, omega_ref, {{"a", "b"}, {0, 1, 0, 1}});
  for (auto& atom : layout.atoms) atom.gamma_nr = gamma_nr;
  return layout;
}

/// Two atoms braided a,b,a,b,a,b. Outer points couple with `gamma1`, the
/// central ones with `gamma2`. Gaps are (phi1, phi2, phi3, phi2, phi1) with
/// phi1 = ratio1 * phi2 and phi3 = ratio3 * phi2.
inline DeviceLayout braided_three_point(double gamma1, double gamma2, double phi2_ref, double ratio1, double ratio3,
                                        double omega_ref, double gamma_nr = 0.0) {
  const double phi1 = ratio1 * phi2_ref;
  const double phi3 = ratio3 * phi2_ref;
  const std::vector<double> gaps{phi1, phi2_ref, phi3, phi2_ref, phi1};
  const std::vector<double> strengths{gamma1, gamma1, gamma2, gamma2, gamma1, gamma1};
  auto layout = layout_from_phase_refs(gaps, strengths, omega_ref, {{"a", "b"}, {0, 1, 0, 1, 0, 1}});
  for (auto& atom : layout.atoms) atom.gamma_nr = gamma_nr;
  return layout;
}

/// Largest (cyclic coupling rate) x (photon travel time across the device).
/// The effective master equation assumes this is much less than one.
inline double travel_time_figure(const DeviceLayout& layout) {
  double max_gamma = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& atom : layout.atoms) {
    for (const auto& p : atom.points) {
      max_gamma = std::max(max_gamma, p.gamma_ref);
      lo = std::min(lo, p.delay);
      hi = std::max(hi, p.delay);
    }
  }
  if (!(hi >= lo)) return 0.0;
  return cyclic(max_gamma) * (hi - lo);
}

inline std::vector<Diagnostic> validate(const DeviceLayout& layout, double travel_time_threshold = 1e-3) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string code, std::string msg) {
    out.push_back({Severity::kError, std::move(code), std::move(msg)});
  };
  if (!(layout.omega_ref > 0.0) || !std::isfinite(layout.omega_ref)) {
    error("omega_ref", "omega_ref must be positive and finite");
  }
  if (layout.atoms.empty()) error("no_atoms", "layout has no atoms");

  std::set<std::string> seen;
  for (const auto& atom : layout.atoms) {
    if (!seen.insert(atom.id).second) error("duplicate_id", "duplicate atom id '" + atom.id + "'");
    if (atom.points.empty()) error("no_points", "atom '" + atom.id + "' has no coupling points");
    if (!(atom.gamma_nr >= 0.0) || !std::isfinite(atom.gamma_nr)) {
      error("gamma_nr", "atom '" + atom.id + "' has negative or non-finite gamma_nr");
    }
    if (!(atom.gamma_phi >= 0.0) || !std::isfinite(atom.gamma_phi)) {
      error("gamma_phi", "atom '" + atom.id + "' has negative or non-finite gamma_phi");
    }
    for (std::size_t n = 0; n < atom.points.size(); ++n) {
      const auto& p = atom.points[n];
      if (!(p.gamma_ref > 0.0) || !std::isfinite(p.gamma_ref)) {
        error("gamma_ref", "atom '" + atom.id + "' point " + std::to_string(n) + " has non-positive gamma_ref");
      }
      if (!(p.delay >= 0.0) || !std::isfinite(p.delay)) {
        error("delay", "atom '" + atom.id + "' point " + std::to_string(n) + " has negative or non-finite delay");
      }
      if (n > 0 && p.delay < atom.points[n - 1].delay) {
        error("unsorted", "atom '" + atom.id + "' coupling points are not sorted by delay");
      }
    }
  }
  if (!has_errors(out)) {
    const double figure = travel_time_figure(layout);
    if (figure > travel_time_threshold) {
      out.push_back({Severity::kWarning, "travel_time",
                     "coupling rate x travel time across the device is " + std::to_string(figure) +
                         "; the Markovian model needs this << 1"});
    }
  }
  return out;
}

/// Sorts each atom's points by delay and throws on invariant violations.
inline DeviceLayout checked(DeviceLayout layout) {
  for (auto& atom : layout.atoms) {
    std::stable_sort(atom.points.begin(), atom.points.end(),
                     [](const CouplingPoint& a, const CouplingPoint& b) { return a.delay < b.delay; });
  }
  for (const auto& d : validate(layout)) {
    if (d.severity == Severity::kError) throw ValidationError(d.message);
  }
  return layout;
}

}  // namespace gawqed
