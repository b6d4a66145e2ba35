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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gawqed/calibration.hpp"
#include "gawqed/dynamics.hpp"
#include "gawqed/estimation.hpp"
#include "gawqed/reference_devices.hpp"
#include "gawqed/sequences.hpp"
#include "gawqed/spectra.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using namespace gawqed;

constexpr double kMHz = 1e6;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) detail << "; failed: ";
      else detail << ", ";
      detail << what;
      ok = false;
    }
  }
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

double three_point_df1() {
  const auto l = reference::three_point_device();
  return find_df_frequencies(l, 0, angular(4.2e9), angular(5.0e9), angular(1.0)).at(0).omega;
}

void df_two_point(Check& c) {
  const double gamma0 = angular(2 * kMHz);
  const auto l = reference::two_point_device(reference::kTwoPointGammaNrHz);
  const auto found = find_df_frequencies(l, 0, angular(4.2e9), angular(5.1e9), angular(1.0));
  c.require(found.size() == 1, "exactly one DF in band");
  if (found.empty()) return;
  const double f = cyclic(found[0].omega);
  const double excess = gamma_general(l, 0, found[0].omega) - l.atoms[0].gamma_nr;
  c.detail << "f_DF = " << f << " Hz, (Gamma1 - gamma_nr)/gamma0 = " << excess / gamma0;
  c.require(std::abs(f - 4.645e9) <= 1e3, "f_DF within 1 kHz");
  c.require(excess <= 1e-6 * gamma0, "Gamma1 - gamma_nr <= 1e-6 gamma0");
}

void g_two_point(Check& c) {
  const auto l = reference::two_point_device(reference::kTwoPointGammaNrHz);
  const double g = cyclic(g_general(l, 0, 1, angular(4.645e9)));
  c.detail << "g/2pi = " << g / kMHz << " MHz";
  c.require(std::abs(g / kMHz - 2.0) <= 1e-6, "g within 1e-6 MHz of 2 MHz");
}

void three_point_dual_df(Check& c) {
  const auto l = reference::three_point_device();
  const auto found = find_df_frequencies(l, 0, angular(4.2e9), angular(5.4e9), angular(1.0));
  c.require(found.size() == 2, "two DFs in band");
  if (found.size() != 2) return;
  c.detail << "DF1 = " << cyclic(found[0].omega) << " Hz, DF2 = " << cyclic(found[1].omega) << " Hz";
  c.require(std::abs(cyclic(found[1].omega) - 5.23e9) <= 1e3, "DF2 pinned at 5.23 GHz");
  c.require(std::abs(cyclic(found[0].omega) - 4.50e9) <= 0.05e9, "DF1 within 0.05 GHz of 4.50 GHz");
}

void check_three_point_g(Check& c) {
  const auto l = reference::three_point_device();
  const double g = cyclic(g_general(l, 0, 1, angular(5.23e9)));
  c.detail << "g(DF2)/2pi = " << g / kMHz << " MHz, deviation from 735 kHz = " << (g - 735e3) / 735e3;
  c.require(std::abs(g - 735e3) <= 0.2 * 735e3, "within 20% of 735 kHz");
}

void chevron(Check& c) {
  const double f_df = 5.23e9;
  const double g = angular(735e3);
  const auto pair = braided_two_point(g, kPi / 2, angular(f_df));
  std::vector<double> t;
  for (int i = 0; i <= 4000; ++i) t.push_back(i * 0.25e-9);
  const std::vector<double> deltas{0.0, g, 2 * g, -2 * g, 4 * g};
  const auto map = chevron_experiment(pair, angular(f_df), deltas, t);

  const auto& p = map.population[0];
  std::size_t first_min = 1;
  while (first_min + 1 < p.size() && p[first_min + 1] < p[first_min]) ++first_min;
  std::size_t revival = first_min;
  while (revival + 1 < p.size() && p[revival + 1] > p[revival]) ++revival;
  const double period = t[revival];
  c.detail << "resonant period = " << period * 1e9 << " ns (pi/g = " << kPi / g * 1e9 << " ns)";
  c.require(std::abs(period / (kPi / g) - 1.0) <= 0.01, "period within 1% of pi/g");
  c.require(std::abs(period - 680e-9) <= 0.01 * 680e-9, "period within 1% of 680 ns");

  double worst = 0.0;
  for (std::size_t k = 1; k < deltas.size(); ++k) {
    const double transfer = 1.0 - *std::min_element(map.population[k].begin(), map.population[k].end());
    const double expected = g * g / (g * g + deltas[k] * deltas[k] / 4);
    worst = std::max(worst, std::abs(transfer - expected));
  }
  c.detail << ", max off-resonant transfer error = " << worst;
  c.require(worst <= 1e-3, "off-resonant transfer within 1e-3");
}

void entangling(Check& c) {
  const double w1 = three_point_df1(), w2 = angular(5.23e9);
  const auto ideal = entangling_protocol(reference::three_point_device(), w1, w2);
  const auto device_c = entangling_protocol(reference::three_point_device_c(), w1, w2);
  c.detail << "ideal F = " << ideal.tomography.fidelity << ", device C F = " << device_c.tomography.fidelity;
  c.require(ideal.tomography.fidelity >= 0.999, "ideal fidelity >= 0.999");
  c.require(device_c.tomography.fidelity >= 0.90 && device_c.tomography.fidelity <= 0.97,
            "device C fidelity in [0.90, 0.97]");
}

void oracle_equivalence(Check& c) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_closed = 0.0, worst_oracle = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double w_ref = angular(4e9 + 2e9 * u(rng));
    const double w = angular(4e9 + 2e9 * u(rng));
    const double s = w / w_ref;
    const double gnr = angular(0.1 * kMHz * u(rng));

    const double gamma = angular(kMHz * (0.1 + 5 * u(rng)));
    const double phi_ref = 6 * kPi * u(rng);
    const auto two = braided_two_point(gamma, phi_ref, w_ref, gnr);
    const double scale2 = 16 * gamma * s * s + gnr;
    worst_closed = std::max({worst_closed,
                             std::abs(two_point_gamma(gamma * s * s, phi_ref * s, gnr) - gamma_general(two, 0, w)) / scale2,
                             std::abs(two_point_g(gamma * s * s, phi_ref * s) - g_general(two, 0, 1, w)) / scale2});

    const double g1 = angular(kMHz * (0.1 + 5 * u(rng)));
    const double g2 = angular(kMHz * (0.1 + 5 * u(rng)));
    const double phi2 = 4 * kPi * u(rng);
    const double r1 = u(rng), r3 = u(rng);
    const auto three = braided_three_point(g1, g2, phi2, r1, r3, w_ref, gnr);
    const double scale3 = std::pow(2 * std::sqrt(g1) + std::sqrt(g2), 2) * s * s + gnr;
    const double p1 = r1 * phi2 * s, p2 = phi2 * s, p3 = r3 * phi2 * s;
    worst_closed = std::max(
        {worst_closed,
         std::abs(three_point_gamma(g1 * s * s, g2 * s * s, p1, p2, p3, gnr) - gamma_general(three, 0, w)) / scale3,
         std::abs(three_point_g(g1 * s * s, g2 * s * s, p1, p2, p3) - g_general(three, 0, 1, w)) / scale3});

    std::vector<std::vector<oracle::Point>> pts(2);
    for (std::size_t j = 0; j < 2; ++j) {
      for (const auto& cp : three.atoms[j].points) pts[j].push_back({cp.delay, cp.gamma_ref * s * s});
    }
    worst_oracle = std::max(
        {worst_oracle, std::abs(oracle::radiative(pts[0], w) + gnr - gamma_general(three, 0, w)) / scale3,
         std::abs(oracle::exchange(pts[0], pts[1], w) - g_general(three, 0, 1, w)) / scale3,
         std::abs(oracle::collective(pts[0], pts[1], w) - gamma_coll_general(three, 0, 1, w)) / scale3});
  }
  c.detail << "10^4 draws, max error / rate scale: closed forms " << worst_closed << ", oracle " << worst_oracle;
  c.require(worst_closed <= 1e-12, "closed forms within 1e-12");
  c.require(worst_oracle <= 1e-12, "independent oracle within 1e-12");
}

void cptp(Check& c) {
  std::mt19937_64 rng(8128);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double trace = 0.0, herm = 0.0, min_ev = 0.0;
  for (int run = 0; run < 1000; ++run) {
    const int atoms = 1 + run % 3;
    const auto model = support::random_model(rng, atoms);
    const auto rho0 = DensityMatrix::from_matrix(oracle::random_density(1 << atoms, rng, 1 + run % (1 << atoms)));
    const auto rho = propagate(rho0, model.liouvillian(), 5.0 * u(rng));
    trace = std::max(trace, std::abs(rho.trace() - 1.0));
    herm = std::max(herm, hermiticity_error(rho.matrix()));
    min_ev = std::min(min_ev, rho.min_eigenvalue());
  }
  double rk4 = 0.0;
  for (int atoms = 1; atoms <= 3; ++atoms) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto model = support::random_model(rng, atoms);
      const CMatrix rho0 = oracle::random_density(1 << atoms, rng);
      const auto exact = propagate(DensityMatrix::from_matrix(rho0), model.liouvillian(), 1.0);
      const CMatrix ref = oracle::rk4(model.oracle_model(), rho0, 1.0, 1000);
      rk4 = std::max(rk4, (exact.matrix() - ref).cwiseAbs().maxCoeff());
    }
  }
  c.detail << "10^3 runs: trace drift " << trace << ", hermiticity " << herm << ", min eigenvalue " << min_ev
           << ", expm vs RK4 " << rk4;
  c.require(trace <= 1e-9, "trace drift <= 1e-9");
  c.require(herm <= 1e-12, "hermiticity <= 1e-12");
  c.require(min_ev >= -1e-9, "min eigenvalue >= -1e-9");
  c.require(rk4 <= 1e-8, "RK4 agreement <= 1e-8");
}

void t1_consistency(Check& c) {
  const auto l = reference::two_point_device(reference::kTwoPointGammaNrHz);
  std::mt19937_64 rng(1729);
  std::uniform_real_distribution<double> u(4.2e9, 5.1e9);
  double worst = 0.0;
  bool fits_ok = true;
  for (int i = 0; i < 20; ++i) {
    const double w = angular(u(rng));
    const double gamma = gamma_general(l, 0, w);
    std::vector<double> t;
    for (int k = 0; k <= 30; ++k) t.push_back(k * 0.1 / gamma);
    const auto r = t1_experiment(l, 0, w, t);
    fits_ok = fits_ok && r.fit_ok;
    worst = std::max(worst, std::abs(r.fitted_rate / gamma - 1.0));
  }
  c.detail << "20 frequencies, max relative error " << worst;
  c.require(fits_ok, "all fits succeed");
  c.require(worst <= 1e-6, "relative error <= 1e-6");
}

void fit_round_trip(Check& c) {
  const std::vector<Channel> both{{RowKind::kGamma, "a"}, {RowKind::kG, "a:b"}};
  const SpectralModel two{ModelKind::kTwoPoint, {}};
  const Params truth{{"gamma0_hz", 2e6}, {"phi_ref", kPi / 2}, {"f_ref_hz", 4.645e9}, {"gamma_nr_hz", 3e4}};
  const Bounds bounds{{"gamma0_hz", {1e6, 3e6}}, {"phi_ref", {1.2, 2.0}}, {"gamma_nr_hz", {0.0, 1e5}}};
  const auto data = synthesize(two, truth, linspace(4.2e9, 5.1e9, 40), both, 0.0, 0);
  Params init = truth;
  init["gamma0_hz"] = 1.5e6;
  init["phi_ref"] = 1.3;
  init["gamma_nr_hz"] = 5e4;
  const auto r = fit(data, two, init, bounds);
  double worst = 0.0;
  for (const auto& [name, range] : bounds) worst = std::max(worst, std::abs(r.params.at(name) / truth.at(name) - 1.0));
  c.detail << "two-point max relative error " << worst;
  c.require(worst <= 0.01, "parameters within 1%");

  const SpectralModel three{ModelKind::kThreePoint, {}};
  Params p3{{"gamma1_hz", 1.58e6},
            {"gamma2_hz", 3.68e6},
            {"phi2_ref", reference::three_point_phi2_ref()},
            {"ratio", 0.505},
            {"f_ref_hz", 5.23e9},
            {"g_p_hz", 70e3}};
  double floor = 1e300;
  for (double f : linspace(4.8e9, 5.1e9, 3001)) {
    floor = std::min(floor, std::abs(model_predict(three, p3, RowKind::kG, "a:b", f)));
  }
  c.detail << ", |g| floor with 70 kHz parasitic = " << floor / 1e3 << " kHz";
  c.require(floor >= 70e3 && floor <= 71e3, "|g| floor at 70 kHz");

  const auto data3 = synthesize(three, p3, linspace(4.6e9, 5.3e9, 60), both, 0.0, 0);
  Params init3 = p3;
  init3["g_p_hz"] = 20e3;
  const auto r3 = fit(data3, three, init3, {{"g_p_hz", {0.0, 2e5}}});
  c.detail << ", fitted g_p = " << r3.params.at("g_p_hz") / 1e3 << " kHz";
  c.require(std::abs(r3.params.at("g_p_hz") / 70e3 - 1.0) <= 0.01, "parasitic g recovered within 1%");
}

void calibration(Check& c) {
  const auto s = reference::example_crosstalk();
  const Eigen::Vector2d flux(1.0, 0.0);
  const Eigen::VectorXd v = voltages_for_fluxes(s, flux);
  const double residual = (s.s * v - flux).cwiseAbs().maxCoeff();
  const double vs_oracle = (v - oracle::solve2x2(s.s, flux)).cwiseAbs().maxCoeff();
  double endpoint = 0.0;
  for (const char* q : {"Q1", "Q2"}) {
    const auto& rec = reference::qubit("C", q);
    const TransmonFluxModel m{q, rec.f_max_hz, rec.d, 0.0, 1.0};
    endpoint = std::max({endpoint, std::abs(transmon_frequency(m, 0.0) / m.f_max - 1.0),
                         std::abs(transmon_frequency(m, 0.5) / (m.f_max * std::sqrt(m.d)) - 1.0)});
  }
  c.detail << "V = (" << v(0) << ", " << v(1) << ") V, |S V - Phi| = " << residual << ", endpoint error " << endpoint;
  c.require(residual <= 1e-12, "S V = Phi to 1e-12");
  c.require(vs_oracle <= 1e-12, "V matches direct 2x2 solve");
  c.require(endpoint <= 1e-12, "endpoints exact to 1e-12");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"1 two-point DF at 4.645 GHz", df_two_point},
      {"2 two-point g at DF is 2 MHz", g_two_point},
      {"3 three-point dual DF", three_point_dual_df},
      {"4 three-point g at DF2", check_three_point_g},
      {"5 chevron period and transfer", chevron},
      {"6 entangling protocol fidelity", entangling},
      {"7 closed forms vs general sums", oracle_equivalence},
      {"8 CPTP propagation", cptp},
      {"9 T1 consistency", t1_consistency},
      {"10 fit round trip and parasitic floor", fit_round_trip},
      {"11 flux calibration", calibration},
  };
  int failures = 0;
  for (const auto& [name, body] : criteria) {
    Check c;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    if (!c.ok) ++failures;
    std::printf("%s  %s: %s\n", c.ok ? "PASS" : "FAIL", name, c.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
