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

// Qubit operators and density matrices.
//
// Basis convention: computational index bits, atom 0 is the most significant
// bit, bit value 1 is the excited state. sigma_minus lowers |1> to |0>.
// pauli('Z') is diag(+1, -1) (ground +1) and is what tomography reports;
// the Hamiltonian uses excited_projector-based sigma_z that is +1 on |1>.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "gawqed/core.hpp"

namespace gawqed {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxAtoms = 5;

inline std::size_t hilbert_dim(std::size_t atoms) { return std::size_t{1} << atoms; }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline CMatrix pauli(char label) {
  CMatrix m = CMatrix::Zero(2, 2);
  switch (label) {
    case 'I': case 'i': m(0, 0) = m(1, 1) = 1.0; break;
    case 'X': case 'x': m(0, 1) = m(1, 0) = 1.0; break;
    case 'Y': case 'y': m(0, 1) = Complex(0, -1); m(1, 0) = Complex(0, 1); break;
    case 'Z': case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw DomainError(std::string("unknown Pauli label '") + label + "'");
  }
  return m;
}

/// Tensor product of single-qubit Paulis, leftmost character acts on atom 0.
inline CMatrix pauli_string(std::string_view labels) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (char c : labels) out = kron(out, pauli(c));
  return out;
}

/// Embeds a single-qubit operator on `atom` of an `atoms`-qubit register.
inline CMatrix embed(const CMatrix& op, std::size_t atom, std::size_t atoms) {
  if (atom >= atoms) throw DomainError("atom index out of range");
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < atoms; ++k) out = kron(out, k == atom ? op : CMatrix::Identity(2, 2));
  return out;
}

inline CMatrix sigma_minus(std::size_t atom, std::size_t atoms) {
  CMatrix lower = CMatrix::Zero(2, 2);
  lower(0, 1) = 1.0;
  return embed(lower, atom, atoms);
}

/// +1 on the excited state, -1 on the ground state.
inline CMatrix sigma_z_excited(std::size_t atom, std::size_t atoms) { return -embed(pauli('Z'), atom, atoms); }

inline CMatrix excited_projector(std::size_t atom, std::size_t atoms) {
  CMatrix p = CMatrix::Zero(2, 2);
  p(1, 1) = 1.0;
  return embed(p, atom, atoms);
}

inline double hermiticity_error(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Square root of a Hermitian positive semidefinite matrix. Eigenvalues
/// below zero (round-off) are clamped.
inline CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

/// Euclidean projection of `values` onto the probability simplex.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& values) {
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  return (values.array() - shift).cwiseMax(0.0);
}

/// Nearest (Frobenius) unit-trace positive semidefinite matrix.
inline CMatrix project_to_density(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd p = project_to_simplex(es.eigenvalues());
  return es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
}

struct DensityTolerance {
  double hermiticity = 1e-12;
  double trace = 1e-9;
  double min_eigenvalue = 1e-9;
};

/// 2^N x 2^N Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Validates `m` against `tol`; throws DomainError when it is not a state.
  static DensityMatrix from_matrix(CMatrix m, DensityTolerance tol = {}) {
    DensityMatrix rho(std::move(m));
    if (auto problem = rho.violation(tol); !problem.empty()) throw DomainError(problem);
    return rho;
  }

  /// Skips validation; for states produced by trusted numerical kernels.
  static DensityMatrix unchecked(CMatrix m) { return DensityMatrix(std::move(m)); }

  static DensityMatrix ground(std::size_t atoms) {
    CMatrix m = CMatrix::Zero(hilbert_dim(atoms), hilbert_dim(atoms));
    m(0, 0) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix basis_state(std::size_t atoms, std::size_t index) {
    if (index >= hilbert_dim(atoms)) throw DomainError("basis index out of range");
    CMatrix m = CMatrix::Zero(hilbert_dim(atoms), hilbert_dim(atoms));
    m(index, index) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix pure(const CVector& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw DomainError("state vector has zero norm");
    const CVector v = psi / norm;
    return DensityMatrix(v * v.adjoint());
  }

  static DensityMatrix maximally_mixed(std::size_t atoms) {
    const auto d = hilbert_dim(atoms);
    return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  const CMatrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t atoms() const {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim()) ++n;
    return n;
  }

  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }
  double min_eigenvalue() const { return hermitian_eigenvalues(m_).minCoeff(); }
  double population(std::size_t atom) const {
    return (excited_projector(atom, atoms()) * m_).trace().real();
  }
  double expectation(const CMatrix& op) const { return (op * m_).trace().real(); }

  /// Empty when the invariants hold, otherwise a description of the first violation.
  std::string violation(DensityTolerance tol = {}) const {
    const auto d = dim();
    if (d == 0 || (d & (d - 1)) != 0 || m_.rows() != m_.cols()) return "density matrix must be square with dimension 2^N";
    if (hermiticity_error(m_) > tol.hermiticity) return "density matrix is not Hermitian";
    if (std::abs(trace() - 1.0) > tol.trace) return "density matrix trace differs from 1";
    if (min_eigenvalue() < -tol.min_eigenvalue) return "density matrix has a negative eigenvalue";
    return {};
  }

 private:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

}  // namespace gawqed
