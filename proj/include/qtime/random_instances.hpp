#pragma once

#include <Eigen/QR>

#include "qtime/core/linalg.hpp"
#include "qtime/core/pauli.hpp"
#include "qtime/core/random.hpp"

namespace qtime {

inline Vector random_gaussian_vector(Eigen::Index dim, Philox& rng) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(rng.normal(), rng.normal());
  return v;
}

/// Haar-random pure state on q qubits.
inline StateVector random_state(int q, Philox& rng) {
  return StateVector::normalized(random_gaussian_vector(Eigen::Index(1) << q, rng));
}

/// GUE-like Hermitian matrix.
inline Matrix random_hermitian(Eigen::Index dim, Philox& rng) {
  Matrix a(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) a.col(j) = random_gaussian_vector(dim, rng);
  return (a + a.adjoint()) / 2.0;
}

/// Haar-random unitary via QR with the phase correction of Mezzadri.
inline Matrix random_unitary(Eigen::Index dim, Philox& rng) {
  Matrix a(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) a.col(j) = random_gaussian_vector(dim, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Mixed state of the given rank with random eigenbasis and weights.
inline DensityMatrix random_density(int q, int rank, Philox& rng) {
  const Eigen::Index dim = Eigen::Index(1) << q;
  Matrix m = Matrix::Zero(dim, dim);
  for (int r = 0; r < rank; ++r) {
    const Vector v = random_gaussian_vector(dim, rng);
    m += v * v.adjoint();
  }
  m /= m.trace().real();
  m = (m + m.adjoint()) / 2.0;
  return DensityMatrix(std::move(m), DensityMatrix::Unchecked{});
}

/// Random real-coefficient Pauli sum with `terms` non-identity strings.
inline PauliSum random_pauli_sum(int n, int terms, Philox& rng) {
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  PauliSum h(n);
  for (int t = 0; t < terms; ++t) {
    std::string s;
    do {
      s.assign(std::size_t(n), 'I');
      for (auto& c : s) c = kLetters[rng.below(4)];
    } while (s.find_first_not_of('I') == std::string::npos);
    h.add(rng.normal(), s);
  }
  return h;
}

/// Random non-identity Pauli string with unit coefficient.
inline PauliString random_pauli_string(int n, Philox& rng) {
  return PauliString(1.0, random_pauli_sum(n, 1, rng).terms()[0].letters());
}

}  // namespace qtime
