#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qtime/core/pauli.hpp"
#include "qtime/core/types.hpp"

namespace qtime {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const Matrix& m) { return max_abs(m - m.adjoint()); }

/// Normalized pure state on q qubits.
class StateVector {
 public:
  StateVector() = default;

  /// Checked constructor: length 2^q and unit norm within 1e-12.
  explicit StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
    q_ = qubits_for_length(amps_.size());
    if (std::abs(amps_.norm() - 1.0) > 1e-12) throw ValidationError("state vector is not normalized");
  }

  static StateVector normalized(Vector amplitudes) {
    const double nrm = amplitudes.norm();
    if (nrm == 0.0) throw ValidationError("cannot normalize the zero vector");
    return StateVector(Vector(amplitudes / nrm));
  }

  static StateVector basis(int q, std::size_t index) {
    if (index >= (std::size_t{1} << q)) throw DimensionError("basis index out of range");
    Vector v = Vector::Zero(Eigen::Index(1) << q);
    v(Eigen::Index(index)) = 1.0;
    return StateVector(std::move(v));
  }

  /// |+>^{\otimes q}
  static StateVector plus(int q) {
    const Eigen::Index dim = Eigen::Index(1) << q;
    return StateVector(Vector::Constant(dim, cplx(1.0 / std::sqrt(double(dim)), 0.0)));
  }

  int num_qubits() const { return q_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }

  cplx inner(const StateVector& other) const { return amps_.dot(other.amps_); }

  /// a (x) b with a occupying the most significant bits.
  StateVector tensor(const StateVector& low) const {
    Vector out(dim() * low.dim());
    for (Eigen::Index i = 0; i < dim(); ++i) out.segment(i * low.dim(), low.dim()) = amps_(i) * low.amps_;
    return StateVector::normalized(std::move(out));
  }

  static int qubits_for_length(Eigen::Index len) {
    if (len < 1 || !is_power_of_two(len)) throw DimensionError("state length must be a power of two");
    return log2_exact(len);
  }

 private:
  Vector amps_ = Vector::Ones(1);
  int q_ = 0;
};

/// |<a|b>| == 1 within tol, i.e. equal up to a global phase.
inline bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol = 1e-12) {
  if (a.dim() != b.dim()) return false;
  return std::abs(std::abs(a.inner(b)) - 1.0) <= tol;
}

/// Density operator on q qubits.
class DensityMatrix {
 public:
  struct Unchecked {};

  DensityMatrix() = default;

  /// Checked constructor: Hermitian (1e-12), unit trace (1e-12), PSD (-1e-10 floor).
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
    q_ = StateVector::qubits_for_length(m_.rows());
    if (m_.rows() != m_.cols()) throw DimensionError("density matrix must be square");
    if (hermiticity_defect(m_) > 1e-12) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > 1e-12) throw ValidationError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw ValidationError("density matrix is not positive semidefinite");
  }

  DensityMatrix(Matrix m, Unchecked) : m_(std::move(m)) { q_ = StateVector::qubits_for_length(m_.rows()); }

  static DensityMatrix from_pure(const StateVector& psi) {
    return {psi.amplitudes() * psi.amplitudes().adjoint(), Unchecked{}};
  }

  static DensityMatrix maximally_mixed(int q) {
    const Eigen::Index d = Eigen::Index(1) << q;
    return {Matrix::Identity(d, d) / double(d), Unchecked{}};
  }

  int num_qubits() const { return q_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_ = Matrix::Ones(1, 1);
  int q_ = 0;
};

/// Eigen-decomposition with eigenvalues sorted descending.
struct Spectrum {
  RealVector eigenvalues;
  Matrix eigenvectors;  // columns, orthonormal

  Eigen::Index size() const { return eigenvalues.size(); }
};

inline Spectrum hermitian_eig(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("hermitian_eig needs a square matrix");
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > 1e-10 * scale) throw ValidationError("hermitian_eig: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw ValidationError("hermitian_eig: eigensolver failed");
  Spectrum s;
  s.eigenvalues = es.eigenvalues().reverse();
  s.eigenvectors = es.eigenvectors().rowwise().reverse();
  return s;
}

inline Spectrum hermitian_eig(const PauliSum& h) { return hermitian_eig(pauli_sum_to_matrix(h)); }

/// V exp(-i diag(lambda) t) V^dagger.
inline Matrix propagator(const Spectrum& s, double t) {
  Vector phases(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) phases(k) = std::exp(-kI * (s.eigenvalues(k) * t));
  return s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
}

inline Matrix propagator(const Matrix& h, double t) { return propagator(hermitian_eig(h), t); }

inline Matrix propagator(const PauliSum& h, double t) { return propagator(hermitian_eig(h), t); }

enum class Keep { A, B };

/// Reduced state of a pure state on (qA | qB) qubits; block A holds the most significant bits.
inline DensityMatrix partial_trace(const StateVector& psi, int qA, int qB, Keep keep) {
  if (qA < 0 || qB < 0 || qA + qB != psi.num_qubits()) throw DimensionError("partial_trace: inconsistent split");
  const Eigen::Index dA = Eigen::Index(1) << qA, dB = Eigen::Index(1) << qB;
  Eigen::Map<const Matrix> mt(psi.amplitudes().data(), dB, dA);  // mt(b, a) = psi[a*dB + b]
  if (keep == Keep::A) return {Matrix(mt.transpose() * mt.conjugate()), DensityMatrix::Unchecked{}};
  return {Matrix(mt * mt.adjoint()), DensityMatrix::Unchecked{}};
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, int qA, int qB, Keep keep) {
  if (qA < 0 || qB < 0 || qA + qB != rho.num_qubits()) throw DimensionError("partial_trace: inconsistent split");
  const Eigen::Index dA = Eigen::Index(1) << qA, dB = Eigen::Index(1) << qB;
  const Matrix& m = rho.matrix();
  if (keep == Keep::A) {
    Matrix out = Matrix::Zero(dA, dA);
    for (Eigen::Index a = 0; a < dA; ++a)
      for (Eigen::Index a2 = 0; a2 < dA; ++a2)
        for (Eigen::Index b = 0; b < dB; ++b) out(a, a2) += m(a * dB + b, a2 * dB + b);
    return {std::move(out), DensityMatrix::Unchecked{}};
  }
  Matrix out = Matrix::Zero(dB, dB);
  for (Eigen::Index a = 0; a < dA; ++a) out += m.block(a * dB, a * dB, dB, dB);
  return {std::move(out), DensityMatrix::Unchecked{}};
}

/// Tr[rho^2]; the linear entropy is 1 - purity.
inline double purity(const DensityMatrix& rho) {
  // Tr[rho^2] = sum_ij |rho_ij|^2 for Hermitian rho.
  return rho.matrix().squaredNorm();
}

/// Squared Schmidt coefficients p_l (descending) of a pure state across (qA | qB).
inline RealVector schmidt_spectrum(const StateVector& psi, int qA, int qB) {
  if (qA + qB != psi.num_qubits()) throw DimensionError("schmidt_spectrum: inconsistent split");
  const Eigen::Index dA = Eigen::Index(1) << qA, dB = Eigen::Index(1) << qB;
  Eigen::Map<const Matrix> mt(psi.amplitudes().data(), dB, dA);
  Eigen::JacobiSVD<Matrix> svd(mt);
  RealVector p = svd.singularValues().array().square();
  std::sort(p.data(), p.data() + p.size(), std::greater<>());
  return p;
}

/// Descending eigenvalues of a density matrix.
inline RealVector density_spectrum(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

/// Controlled-U on a state. Bits are 0-based positions in the computational
/// index (0 = least significant); the target block spans bits [lo, lo + k)
/// with bit lo + k - 1 as U's most significant bit.
inline StateVector apply_controlled(const StateVector& state, int control_bit, const Matrix& target_unitary,
                                    int target_lo) {
  const int q = state.num_qubits();
  const Eigen::Index kd = target_unitary.rows();
  if (target_unitary.cols() != kd || !is_power_of_two(kd)) throw DimensionError("target unitary must be 2^k square");
  const int k = log2_exact(kd);
  if (target_lo < 0 || target_lo + k > q || control_bit < 0 || control_bit >= q) {
    throw WiringError("apply_controlled: wire index out of range");
  }
  if (control_bit >= target_lo && control_bit < target_lo + k) {
    throw WiringError("apply_controlled: control overlaps the target block");
  }
  Vector out = state.amplitudes();
  const std::size_t dim = std::size_t(state.dim());
  const std::size_t block_mask = ((std::size_t{1} << k) - 1) << target_lo;
  const std::size_t cbit = std::size_t{1} << control_bit;
  Vector buf(kd);
  for (std::size_t base = 0; base < dim; ++base) {
    if ((base & block_mask) != 0 || (base & cbit) == 0) continue;
    for (Eigen::Index j = 0; j < kd; ++j) buf(j) = out(Eigen::Index(base | (std::size_t(j) << target_lo)));
    Vector res = target_unitary * buf;
    for (Eigen::Index j = 0; j < kd; ++j) out(Eigen::Index(base | (std::size_t(j) << target_lo))) = res(j);
  }
  return StateVector::normalized(std::move(out));
}

/// Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qtime
