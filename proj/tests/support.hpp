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

// Random generators shared by the unit tests and the acceptance binary.

#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "gawqed/dynamics.hpp"
#include "oracles.hpp"

namespace support {

/// Random master equation in dimensionless units: detunings and couplings of
/// order one, a positive semidefinite decay matrix and non-negative dephasing.
struct RandomModel {
  std::vector<double> detunings;
  Eigen::MatrixXd g;
  Eigen::MatrixXd decay;
  std::vector<double> dephasing;

  std::vector<double> gammas() const {
    std::vector<double> out(detunings.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = decay(j, j);
    return out;
  }

  Eigen::MatrixXd collective() const {
    Eigen::MatrixXd out = decay;
    out.diagonal().setZero();
    return out;
  }

  gawqed::CMatrix hamiltonian() const { return gawqed::build_hamiltonian(detunings, g, 0.0); }

  gawqed::Liouvillian liouvillian() const {
    return gawqed::build_liouvillian(hamiltonian(), gammas(), collective(), dephasing);
  }

  oracle::Lindblad oracle_model() const { return {hamiltonian(), decay, dephasing}; }
};

inline RandomModel random_model(std::mt19937_64& rng, int atoms, double rate_scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  RandomModel m;
  m.detunings.resize(atoms);
  m.dephasing.resize(atoms);
  m.g = Eigen::MatrixXd::Zero(atoms, atoms);
  Eigen::MatrixXd a(atoms, atoms);
  for (int j = 0; j < atoms; ++j) {
    m.detunings[j] = 2.0 * u(rng);
    m.dephasing[j] = rate_scale * 0.5 * (1.0 + u(rng));
    for (int k = 0; k < atoms; ++k) a(j, k) = n(rng);
    for (int k = j + 1; k < atoms; ++k) m.g(j, k) = m.g(k, j) = u(rng);
  }
  m.decay = rate_scale * 0.5 * a * a.transpose();
  return m;
}

}  // namespace support
