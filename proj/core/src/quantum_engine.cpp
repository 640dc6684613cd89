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

#include "qsdc/quantum_engine.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qsdc/error.hpp"
#include "qsdc/netgraph.hpp"

namespace qsdc::quantum {
namespace {

using Index = Eigen::Index;
constexpr Complex kI{0.0, 1.0};

std::size_t qubits_for_dim(Index dim) {
  if (dim <= 0 || !std::has_single_bit(static_cast<std::size_t>(dim))) {
    throw ValidationError("matrix dimension " + std::to_string(dim) +
                          " is not a power of two");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(static_cast<std::size_t>(dim)));
  if (n > kMaxDenseQubits) {
    throw CapacityError("dense backend holds at most " + std::to_string(kMaxDenseQubits) +
                        " qubits; use the bloch backend");
  }
  return n;
}

inline std::size_t mask_of(std::size_t i, std::size_t n) {
  return std::size_t{1} << (n - 1 - i);
}

void check_qubit(std::size_t i, std::size_t n, const char* what) {
  if (i >= n) {
    std::ostringstream os;
    os << what << ": qubit index " << i << " out of range for " << n << " qubits";
    throw ValidationError(os.str());
  }
}

// out += rate * C rho C^dag for structured C.
void accumulate_conjugation(const ComplexMatrix& rho, const Jump& jump, std::size_t n,
                            ComplexMatrix& out) {
  const Index d = rho.rows();
  if (jump.kind == Jump::Kind::kSwap) {
    const std::size_t ma = mask_of(jump.a, n);
    const std::size_t mb = mask_of(jump.b, n);
    auto perm = [&](Index b) -> Index {
      const auto u = static_cast<std::size_t>(b);
      const bool ba = (u & ma) != 0;
      const bool bb = (u & mb) != 0;
      if (ba == bb) return b;
      return static_cast<Index>(u ^ ma ^ mb);
    };
    for (Index c = 0; c < d; ++c) {
      const Index pc = perm(c);
      for (Index r = 0; r < d; ++r) out(r, c) += jump.rate * rho(perm(r), pc);
    }
    return;
  }
  const std::size_t m = mask_of(jump.a, n);
  const Complex up = std::exp(kI * jump.angle);     // bit_r = 1, bit_c = 0
  const Complex down = std::exp(-kI * jump.angle);  // bit_r = 0, bit_c = 1
  for (Index c = 0; c < d; ++c) {
    const bool bc = (static_cast<std::size_t>(c) & m) != 0;
    for (Index r = 0; r < d; ++r) {
      const bool br = (static_cast<std::size_t>(r) & m) != 0;
      Complex v = rho(r, c);
      if (br != bc) v *= br ? up : down;
      out(r, c) += jump.rate * v;
    }
  }
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix embed_single(std::size_t i, const ComplexMatrix& op, std::size_t n) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    out = kron(out, k == i ? op : ComplexMatrix::Identity(2, 2));
  }
  return out;
}

}  // namespace

DensityMatrix make_trusted(ComplexMatrix m) {
  const auto n = qubits_for_dim(m.rows());
  return DensityMatrix(std::move(m), n);
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m, double tol) {
  if (m.rows() != m.cols()) throw ValidationError("density matrix must be square");
  const auto n = qubits_for_dim(m.rows());
  DensityMatrix rho(std::move(m), n);
  if (rho.hermiticity_error() > tol) {
    throw ValidationError("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > tol) {
    throw ValidationError("density matrix trace differs from 1");
  }
  if (rho.min_eigenvalue() < -tol) {
    throw ValidationError("density matrix is not positive semidefinite");
  }
  return rho;
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::hermiticity_error() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

std::string DensityMatrix::debug_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (Index r = 0; r < m_.rows(); ++r)
    for (Index c = 0; c < m_.cols(); ++c)
      entries.push_back({m_(r, c).real(), m_(r, c).imag()});
  nlohmann::json j{{"dim", m_.rows()}, {"entries", std::move(entries)}};
  return j.dump();
}

PureQubitSpec PureQubitSpec::make(double theta, double phi) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) {
    throw ValidationError("theta must lie in (0, pi), got " + std::to_string(theta));
  }
  if (!(phi >= 0.0 && phi <= 0.5 * std::numbers::pi)) {
    throw ValidationError("phi must lie in [0, pi/2], got " + std::to_string(phi));
  }
  return PureQubitSpec{theta, phi};
}

double BlochVector::r() const { return std::sqrt(x * x + y * y + z * z); }
double BlochVector::s() const { return std::hypot(x, y); }
double BlochVector::phi() const { return std::atan2(y, x); }
double BlochVector::theta() const {
  const double len = r();
  return len > 0.0 ? std::acos(std::clamp(z / len, -1.0, 1.0)) : 0.0;
}

BlochVector BlochVector::from_polar(double r, double theta, double phi) {
  return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi),
          r * std::cos(theta)};
}

ComplexMatrix Jump::matrix(std::size_t qubits) const {
  return kind == Kind::kSwap ? swap_jump(a, b, qubits) : rz_jump(a, angle, qubits);
}

double JumpSet::total_rate() const {
  double t = 0.0;
  for (const auto& j : pins) t += j.rate;
  for (const auto& j : swaps) t += j.rate;
  return t;
}

JumpSet make_jump_set(const netgraph::CommGraph& g, std::span<const double> angles) {
  const std::size_t n = g.node_count();
  if (angles.size() != n) {
    throw ValidationError("make_jump_set: need one rotation angle per node");
  }
  JumpSet set;
  set.qubits = n;
  for (std::size_t i = 0; i < n; ++i) {
    set.pins.push_back({Jump::Kind::kRotationZ, i, i, angles[i], 1.0});
  }
  for (const auto& e : g.edges()) {
    set.swaps.push_back({Jump::Kind::kSwap, e.lo, e.hi, 0.0, e.weight});
  }
  return set;
}

DensityMatrix product_state(std::span<const PureQubitSpec> specs) {
  const std::size_t n = specs.size();
  if (n == 0) throw ValidationError("product_state: need at least one qubit");
  if (n > kMaxDenseQubits) {
    throw CapacityError("product_state: " + std::to_string(n) +
                        " qubits exceed the dense backend limit of " +
                        std::to_string(kMaxDenseQubits) + "; use the bloch backend");
  }
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (const auto& q : specs) {
    if (!std::isfinite(q.theta) || !std::isfinite(q.phi) || q.theta < 0.0 ||
        q.theta > std::numbers::pi) {
      throw ValidationError("product_state: invalid qubit angles");
    }
    Eigen::Vector2cd v(std::cos(0.5 * q.theta),
                       std::exp(kI * q.phi) * std::sin(0.5 * q.theta));
    Eigen::VectorXcd next(psi.size() * 2);
    for (Index k = 0; k < psi.size(); ++k) {
      next(2 * k) = psi(k) * v(0);
      next(2 * k + 1) = psi(k) * v(1);
    }
    psi = std::move(next);
  }
  return make_trusted(psi * psi.adjoint());
}

ComplexMatrix swap_jump(std::size_t i, std::size_t j, std::size_t n) {
  check_qubit(i, n, "swap_jump");
  check_qubit(j, n, "swap_jump");
  if (i == j) throw ValidationError("swap_jump: qubits must differ");
  if (n > kMaxDenseQubits) throw CapacityError("swap_jump: too many qubits");
  const auto d = static_cast<Index>(std::size_t{1} << n);
  const std::size_t mi = mask_of(i, n);
  const std::size_t mj = mask_of(j, n);
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Index b = 0; b < d; ++b) {
    const auto u = static_cast<std::size_t>(b);
    const bool bi = (u & mi) != 0;
    const bool bj = (u & mj) != 0;
    const auto target = static_cast<Index>(bi == bj ? u : (u ^ mi ^ mj));
    out(target, b) = 1.0;
  }
  return out;
}

ComplexMatrix rz_jump(std::size_t i, double alpha, std::size_t n) {
  check_qubit(i, n, "rz_jump");
  if (n > kMaxDenseQubits) throw CapacityError("rz_jump: too many qubits");
  ComplexMatrix rz = ComplexMatrix::Zero(2, 2);
  rz(0, 0) = std::exp(-0.5 * kI * alpha);
  rz(1, 1) = std::exp(0.5 * kI * alpha);
  return embed_single(i, rz, n);
}

ComplexMatrix local_pauli(std::size_t i, Pauli p, std::size_t n) {
  check_qubit(i, n, "local_pauli");
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  switch (p) {
    case Pauli::X: s(0, 1) = 1.0; s(1, 0) = 1.0; break;
    case Pauli::Y: s(0, 1) = -kI; s(1, 0) = kI; break;
    case Pauli::Z: s(0, 0) = 1.0; s(1, 1) = -1.0; break;
  }
  return embed_single(i, s, n);
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const JumpSet& jumps) {
  const auto d = static_cast<Index>(std::size_t{1} << jumps.qubits);
  if (rho.rows() != d || rho.cols() != d) {
    throw ValidationError("lindblad_rhs: state dimension does not match jump set");
  }
  ComplexMatrix out = -jumps.total_rate() * rho;
  for (const auto& j : jumps.pins) accumulate_conjugation(rho, j, jumps.qubits, out);
  for (const auto& j : jumps.swaps) accumulate_conjugation(rho, j, jumps.qubits, out);
  return out;
}

ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const JumpSet& jumps) {
  return lindblad_rhs(rho.matrix(), jumps);
}

ComplexMatrix lindblad_rhs_dense(const ComplexMatrix& rho,
                                 std::span<const ComplexMatrix> ops,
                                 std::span<const double> rates) {
  if (ops.size() != rates.size()) {
    throw ValidationError("lindblad_rhs_dense: one rate per operator required");
  }
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto& c = ops[k];
    if (c.rows() != rho.rows() || c.cols() != rho.cols()) {
      throw ValidationError("lindblad_rhs_dense: dimension mismatch");
    }
    const ComplexMatrix cdc = c.adjoint() * c;
    out += rates[k] * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
  }
  return out;
}

ComplexMatrix rk4_step(const ComplexMatrix& rho, const JumpSet& jumps, double h) {
  const ComplexMatrix k1 = lindblad_rhs(rho, jumps);
  const ComplexMatrix k2 = lindblad_rhs(rho + 0.5 * h * k1, jumps);
  const ComplexMatrix k3 = lindblad_rhs(rho + 0.5 * h * k2, jumps);
  const ComplexMatrix k4 = lindblad_rhs(rho + h * k3, jumps);
  return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

DensityMatrix evolve(const DensityMatrix& rho, const JumpSet& jumps, double dt,
                     int substeps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("evolve: dt must be positive");
  if (substeps < 1) throw ValidationError("evolve: substeps must be at least 1");
  if (rho.qubit_count() != jumps.qubits) {
    throw ValidationError("evolve: state and jump set disagree on qubit count");
  }
  const double h = dt / substeps;
  ComplexMatrix m = rho.matrix();
  for (int k = 0; k < substeps; ++k) {
    m = rk4_step(m, jumps, h);
    m = 0.5 * (m + m.adjoint()).eval();
    const Complex tr = m.trace();
    if (!std::isfinite(tr.real()) || std::abs(tr) < 1e-12) {
      throw IntegrationDiverged("evolve: trace collapsed; use a smaller substep");
    }
    m /= tr.real();
  }
  DensityMatrix out = make_trusted(std::move(m));
  if (out.min_eigenvalue() < -1e-6) {
    throw IntegrationDiverged(
        "evolve: state lost positivity (min eigenvalue below -1e-6); use a smaller substep");
  }
  return out;
}

DensityMatrix partial_trace_single(const DensityMatrix& rho, std::size_t i) {
  const std::size_t n = rho.qubit_count();
  check_qubit(i, n, "partial_trace_single");
  const std::size_t m = mask_of(i, n);
  const auto& a = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (Index b = 0; b < a.rows(); ++b) {
    const auto u = static_cast<std::size_t>(b);
    const Index row = (u & m) ? 1 : 0;
    const auto rest = u & ~m;
    out(row, 0) += a(b, static_cast<Index>(rest));
    out(row, 1) += a(b, static_cast<Index>(rest | m));
  }
  return make_trusted(std::move(out));
}

BlochVector bloch_of(const ComplexMatrix& rho2) {
  if (rho2.rows() != 2 || rho2.cols() != 2) {
    throw ValidationError("bloch_of: expected a 2x2 matrix");
  }
  return {(rho2(0, 1) + rho2(1, 0)).real(), (kI * (rho2(0, 1) - rho2(1, 0))).real(),
          (rho2(0, 0) - rho2(1, 1)).real()};
}

BlochVector bloch_of(const DensityMatrix& rho2) { return bloch_of(rho2.matrix()); }

BlochVector local_bloch(const DensityMatrix& rho, std::size_t i) {
  return bloch_of(partial_trace_single(rho, i));
}

DensityMatrix depolarize_local(const DensityMatrix& rho, std::size_t i, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("depolarize_local: p must lie in [0, 1]");
  }
  const std::size_t n = rho.qubit_count();
  check_qubit(i, n, "depolarize_local");
  const std::size_t m = mask_of(i, n);
  const auto& a = rho.matrix();
  ComplexMatrix out(a.rows(), a.cols());
  for (Index c = 0; c < a.cols(); ++c) {
    const bool bc = (static_cast<std::size_t>(c) & m) != 0;
    const auto cf = static_cast<Index>(static_cast<std::size_t>(c) ^ m);
    for (Index r = 0; r < a.rows(); ++r) {
      const bool br = (static_cast<std::size_t>(r) & m) != 0;
      const auto rf = static_cast<Index>(static_cast<std::size_t>(r) ^ m);
      const double sign = br == bc ? 1.0 : -1.0;
      const Complex flipped = a(rf, cf);
      // X rho X = flipped; Y rho Y = sign * flipped; Z rho Z = sign * rho.
      out(r, c) = (1.0 - p) * a(r, c) +
                  (p / 3.0) * ((1.0 + sign) * flipped + sign * a(r, c));
    }
  }
  return make_trusted(std::move(out));
}

double expectation(const ComplexMatrix& rho, const ComplexMatrix& a) {
  return (rho.cwiseProduct(a.transpose())).sum().real();
}

}  // namespace qsdc::quantum
