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

// Published device parameters and ready-made layouts for the braided
// two-point and three-point devices.

#pragma once

#include <array>
#include <string>

#include "gawqed/calibration.hpp"
#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/spectra.hpp"

namespace gawqed::reference {

struct QubitRecord {
  std::string device;
  std::string qubit;
  double f_max_hz;
  double f_min_hz;
  double d;
  double anharmonicity_hz;
  double t1_s;
  double t2_star_s;
  double readout_hz;
  double chi_hz;
  double kappa_hz;
};

inline const std::array<QubitRecord, 6>& qubit_table() {
  static const std::array<QubitRecord, 6> table{{
      {"A", "Q1", 4.856e9, 4.126e9, 0.903, -219e6, 31.5e-6, 4.2e-6, 6.982e9, 0.577e6, 0.95e6},
      {"A", "Q2", 4.801e9, 4.109e9, 0.856, -218e6, 26.1e-6, 3.6e-6, 7.161e9, 0.463e6, 0.693e6},
      {"B", "Q1", 5.403e9, 4.58e9, 0.848, -213e6, 23.5e-6, 7.9e-6, 6.984e9, 1.09e6, 0.971e6},
      {"B", "Q2", 5.451e9, 4.621e9, 0.852, -213e6, 29.7e-6, 10.8e-6, 7.166e9, 0.911e6, 0.698e6},
      {"C", "Q1", 5.319e9, 4.101e9, 0.771, -174e6, 19.5e-6, 5.4e-6, 7.094e9, 0.518e6, 0.575e6},
      {"C", "Q2", 5.371e9, 4.162e9, 0.775, -175e6, 21.2e-6, 3.9e-6, 7.287e9, 0.441e6, 0.491e6},
  }};
  return table;
}

inline const QubitRecord& qubit(const std::string& device, const std::string& q) {
  for (const auto& r : qubit_table()) {
    if (r.device == device && r.qubit == q) return r;
  }
  throw DomainError("no table entry for device " + device + " qubit " + q);
}

/// Non-radiative rate and pure dephasing (rad/s) from T1 and T2*:
/// gamma_nr = 1/T1, gamma_phi = 1/T2* - 1/(2 T1).
struct Decoherence {
  double gamma_nr;
  double gamma_phi;
};

inline Decoherence decoherence_from_times(double t1, double t2_star) {
  if (!(t1 > 0.0) || !(t2_star > 0.0)) throw DomainError("T1 and T2* must be positive");
  if (t2_star > 2.0 * t1) throw DomainError("T2* cannot exceed 2 T1");
  return {1.0 / t1, 1.0 / t2_star - 0.5 / t1};
}

// Two-point braided device (Devices A/B).
inline constexpr double kTwoPointGammaHz = 2.0e6;
inline constexpr double kTwoPointDfHz = 4.645e9;
inline constexpr double kTwoPointGammaNrHz = 0.03e6;

inline DeviceLayout two_point_device(double gamma_nr_hz = 0.0) {
  return braided_two_point(angular(kTwoPointGammaHz), kPi / 2.0, angular(kTwoPointDfHz), angular(gamma_nr_hz));
}

// Three-point braided device (Device C).
inline constexpr double kThreePointGamma1Hz = 1.58e6;
inline constexpr double kThreePointGamma2Hz = 3.68e6;
inline constexpr double kThreePointRatio = 0.505;
inline constexpr double kThreePointDf2Hz = 5.23e9;
inline constexpr int kThreePointWinding = 3;
inline constexpr double kThreePointGHz = 735e3;
inline constexpr double kParasiticGHz = 70e3;

/// phi2 at the reference frequency, chosen so that the upper decoherence-free
/// frequency lands on 5.23 GHz with the lower one near 4.5 GHz.
inline double three_point_phi2_ref() {
  return three_point_df_phase_sum(kThreePointGamma1Hz, kThreePointGamma2Hz, kThreePointWinding) /
         (1.0 + kThreePointRatio);
}

inline DeviceLayout three_point_device(double gamma_nr_hz = 0.0) {
  return braided_three_point(angular(kThreePointGamma1Hz), angular(kThreePointGamma2Hz), three_point_phi2_ref(),
                             kThreePointRatio, kThreePointRatio, angular(kThreePointDf2Hz), angular(gamma_nr_hz));
}

/// Three-point device with Device C lifetimes: Q1 plays atom a, Q2 atom b.
inline DeviceLayout three_point_device_c() {
  DeviceLayout layout = three_point_device();
  const std::array<const char*, 2> names{"Q1", "Q2"};
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& rec = qubit("C", names[j]);
    const auto dec = decoherence_from_times(rec.t1_s, rec.t2_star_s);
    layout.atoms[j].gamma_nr = dec.gamma_nr;
    layout.atoms[j].gamma_phi = dec.gamma_phi;
  }
  return layout;
}

/// Printed crosstalk matrix, flux quanta per volt.
inline CrosstalkMatrix example_crosstalk() {
  CrosstalkMatrix c;
  c.s.resize(2, 2);
  c.s << 1.0 / 4.46, 1.0 / 98.8, 1.0 / 103.4, 1.0 / 4.26;
  return c;
}

}  // namespace gawqed::reference
