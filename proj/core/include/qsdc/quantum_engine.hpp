// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense density-matrix engine: product states, swap and rotation-Z jump
// operators, the jump-only Lindblad generator, RK4 evolution, reduced
// single-qubit states and a local depolarizing channel.
//
// Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
// basis index.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsdc::netgraph {
class CommGraph;
}

namespace qsdc::quantum {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxDenseQubits = 10;

enum class Pauli { X, Y, Z };

// Hermitian, unit-trace, positive semidefinite 2^n x 2^n matrix.
class DensityMatrix {
 public:
  // Validates Hermiticity, trace and PSD within `tol`.
  static DensityMatrix from_matrix(ComplexMatrix m, double tol = 1e-9);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t qubit_count() const noexcept { return qubits_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }

  Complex trace() const { return m_.trace(); }
  double purity() const;
  double min_eigenvalue() const;
  double hermiticity_error() const;  // max |rho - rho^dagger|

  // {"dim": d, "entries": [[re, im], ...]} row-major.
  std::string debug_json() const;

 private:
  friend DensityMatrix make_trusted(ComplexMatrix m);
  DensityMatrix(ComplexMatrix m, std::size_t qubits) : m_(std::move(m)), qubits_(qubits) {}

  ComplexMatrix m_;
  std::size_t qubits_ = 0;
};

// Skips the PSD check; for states that are valid by construction.
DensityMatrix make_trusted(ComplexMatrix m);

// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct PureQubitSpec {
  double theta = 0.5 * 3.14159265358979323846;
  double phi = 0.0;

  // Enforces theta in (0, pi) and phi in [0, pi/2].
  static PureQubitSpec make(double theta, double phi);
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double r() const;
  double theta() const;  // arccos(z / r); 0 for the zero vector
  double phi() const;    // atan2(y, x)
  double s() const;      // in-plane coherence sqrt(x^2 + y^2)

  static BlochVector from_polar(double r, double theta, double phi);
};

// A unitary jump operator with a non-negative rate: either a rotation-Z on
// one qubit or a swap of two qubits. The dissipator uses sqrt(rate) * C.
struct Jump {
  enum class Kind { kRotationZ, kSwap };
  Kind kind = Kind::kRotationZ;
  std::size_t a = 0;
  std::size_t b = 0;   // swap partner
  double angle = 0.0;  // rotation-Z angle
  double rate = 1.0;

  ComplexMatrix matrix(std::size_t qubits) const;
};

struct JumpSet {
  std::size_t qubits = 0;
  std::vector<Jump> pins;   // one rotation-Z per node
  std::vector<Jump> swaps;  // one swap per graph edge

  std::size_t size() const noexcept { return pins.size() + swaps.size(); }
  double total_rate() const;
};

// Pins with the given angles plus one swap per edge with the edge weight as
// rate.
JumpSet make_jump_set(const netgraph::CommGraph& g, std::span<const double> angles);

DensityMatrix product_state(std::span<const PureQubitSpec> specs);

ComplexMatrix swap_jump(std::size_t i, std::size_t j, std::size_t n);
ComplexMatrix rz_jump(std::size_t i, double alpha, std::size_t n);

// I^{(i)} (x) sigma (x) I^{(n-i-1)}.
ComplexMatrix local_pauli(std::size_t i, Pauli p, std::size_t n);

// Sum over jumps of rate * (C rho C^dag - 1/2 {C^dag C, rho}). Uses the
// structure of the operators; for unitary C this is
// sum rate * C rho C^dag - total_rate * rho.
ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const JumpSet& jumps);
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const JumpSet& jumps);

// Textbook dissipator with dense operators; independent of the structured
// path above.
ComplexMatrix lindblad_rhs_dense(const ComplexMatrix& rho,
                                 std::span<const ComplexMatrix> ops,
                                 std::span<const double> rates);

// One classical RK4 step of size h (h may be negative). No renormalisation.
ComplexMatrix rk4_step(const ComplexMatrix& rho, const JumpSet& jumps, double h);

// RK4 with step dt / substeps; trace renormalised and Hermitised after each
// substep. Throws IntegrationDiverged if the result has an eigenvalue below
// -1e-6.
DensityMatrix evolve(const DensityMatrix& rho, const JumpSet& jumps, double dt,
                     int substeps);

DensityMatrix partial_trace_single(const DensityMatrix& rho, std::size_t i);

BlochVector bloch_of(const DensityMatrix& rho2);
BlochVector bloch_of(const ComplexMatrix& rho2);

// Reduced Bloch vector of qubit i without forming the 2x2 matrix.
BlochVector local_bloch(const DensityMatrix& rho, std::size_t i);

// (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z) on qubit i.
DensityMatrix depolarize_local(const DensityMatrix& rho, std::size_t i, double p);

// Bloch-length factor of the depolarizing channel.
constexpr double depolarizing_shrink(double p) { return 1.0 - 4.0 * p / 3.0; }

// tr(rho A), real part.
double expectation(const ComplexMatrix& rho, const ComplexMatrix& a);

}  // namespace qsdc::quantum
