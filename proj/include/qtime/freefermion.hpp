#pragma once

#include <cmath>
#include <vector>

#include "qtime/core/linalg.hpp"
#include "qtime/hamiltonians.hpp"
#include "qtime/histstate.hpp"

namespace qtime {

// Single-particle (one-excitation) sector of the Jordan-Wigner chain. Sites
// are 1-based. In the spin picture the excitation at site j is qubit j in
// |0> with every other qubit in |1>.

struct HoppingMatrix {
  Matrix matrix;
  Boundary boundary = Boundary::Open;
  int sigma = -1;  // fermion parity sector; -1 = odd (single particle)
};

/// Off-diagonal J/2 on every bond, diagonal lambda cos(2 pi alpha j). For a
/// periodic chain the wrap-around bond carries -sigma * J/2.
inline HoppingMatrix build_hopping_matrix(const AubryAndreParams& p, int sigma = -1) {
  p.validate();
  if (sigma != 1 && sigma != -1) throw ValidationError("parity sector must be +1 or -1");
  const Eigen::Index n = p.n;
  HoppingMatrix h;
  h.boundary = p.boundary;
  h.sigma = sigma;
  h.matrix = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) h.matrix(j, j) = p.lambda * p.field(int(j + 1));
  for (Eigen::Index j = 0; j + 1 < n; ++j) h.matrix(j, j + 1) = h.matrix(j + 1, j) = p.J / 2;
  if (p.boundary == Boundary::Periodic) h.matrix(n - 1, 0) = h.matrix(0, n - 1) = -double(sigma) * p.J / 2;
  return h;
}

/// Normalized equal superposition of excitations on the given 1-based sites.
inline Vector site_superposition(int n, const std::vector<int>& sites) {
  Vector v = Vector::Zero(n);
  for (int s : sites) {
    if (s < 1 || s > n) throw DimensionError("site out of range");
    v(s - 1) += 1.0;
  }
  if (v.norm() == 0.0) throw ValidationError("empty site list");
  return v / v.norm();
}

/// Hopping observable c_a^dagger c_b + h.c. as an n x n matrix.
inline Matrix hopping_observable(int n, int a, int b) {
  if (a < 1 || a > n || b < 1 || b > n || a == b) throw DimensionError("invalid hopping observable sites");
  Matrix m = Matrix::Zero(n, n);
  m(a - 1, b - 1) = m(b - 1, a - 1) = 1.0;
  return m;
}

/// Embed a single-particle vector into the 2^n spin register.
inline StateVector embed_single_particle(const Vector& psi) {
  const int n = int(psi.size());
  require_dense(n, "embed_single_particle");
  const std::size_t all = (std::size_t{1} << n) - 1;
  Vector out = Vector::Zero(Eigen::Index(all + 1));
  for (int j = 1; j <= n; ++j) out(Eigen::Index(all ^ (std::size_t{1} << (n - j)))) = psi(j - 1);
  return StateVector::normalized(out);
}

/// Hopping matrix with its eigendecomposition, clustered once and reused for
/// every time evaluation.
class FreeFermionSystem {
 public:
  explicit FreeFermionSystem(const Matrix& M)
      : M_(M), clusters_(cluster_spectrum(hermitian_eig(M), 1e-10 * std::max(1.0, max_abs(M)))) {
    if (hermiticity_defect(M) > 1e-12) throw ValidationError("hopping matrix is not Hermitian");
  }
  explicit FreeFermionSystem(const HoppingMatrix& h) : FreeFermionSystem(h.matrix) {}

  int n() const { return int(M_.rows()); }
  const Matrix& matrix() const { return M_; }
  const Spectrum& spectrum() const { return clusters_.spectrum; }
  const EnergyClusters& clusters() const { return clusters_; }

  /// Per-eigenvector weights w_k = |phi_k^dagger psi|^2.
  RealVector weights(const Vector& psi) const {
    check(psi);
    return (spectrum().eigenvectors.adjoint() * psi).cwiseAbs2();
  }

  /// L(t) = |psi^dagger e^{-iMt} psi|^2.
  double loschmidt_t(const Vector& psi, double t) const { return echo(weights(psi), t); }

  /// sum_k |phi_k^dagger psi|^4 with degenerate clusters merged first.
  double loschmidt_bar(const Vector& psi) const {
    check(psi);
    return clusters_.weights(psi).array().square().sum();
  }

  /// (1/N) sum_{t<N} L(eps t).
  double loschmidt_tilde(const Vector& psi, long long N, double epsilon) const {
    const RealVector w = weights(psi);
    double s = 0.0;
    for (long long t = 0; t < N; ++t) s += echo(w, epsilon * double(t));
    return s / double(N);
  }

  /// Tr[rho_S^2] = (2/N^2) sum_{t<N} (N - t) L(eps t) - 1/N.
  double purity_single_sum(const Vector& psi, long long N, double epsilon) const {
    const RealVector w = weights(psi);
    const double Nd = double(N);
    double s = 0.0;
    for (long long t = 0; t < N; ++t) s += (Nd - double(t)) * echo(w, epsilon * double(t));
    return 2.0 * s / (Nd * Nd) - 1.0 / Nd;
  }

  /// L~ and Tr[rho_S^2] from one pass over the time grid.
  std::pair<double, double> tilde_and_purity(const Vector& psi, long long N, double epsilon) const {
    const RealVector w = weights(psi);
    const double Nd = double(N);
    double s = 0.0, sp = 0.0;
    for (long long t = 0; t < N; ++t) {
      const double L = echo(w, epsilon * double(t));
      s += L;
      sp += (Nd - double(t)) * L;
    }
    return {s / Nd, 2.0 * sp / (Nd * Nd) - 1.0 / Nd};
  }

  struct Fluctuations {
    double sigma2 = 0.0;
    double delta2 = 0.0;
    double Lbar = 0.0;
  };

  /// sigma^2 = sum_{k != k'} |v_k^dagger O v_k'|^2 over cluster projections v_k = P_k psi,
  /// with Delta^2 the squared spread of O on span{v_k}.
  Fluctuations observable_fluctuations(const Vector& psi, const Matrix& O) const {
    check(psi);
    if (O.rows() != M_.rows() || O.cols() != M_.cols()) throw DimensionError("observable size differs from M");
    Fluctuations f;
    const auto proj = clusters_.projections(psi);
    std::vector<Vector> Oproj;
    Oproj.reserve(proj.size());
    for (const auto& v : proj) Oproj.push_back(O * v);
    for (std::size_t k = 0; k < proj.size(); ++k)
      for (std::size_t l = 0; l < proj.size(); ++l)
        if (k != l) f.sigma2 += std::norm(proj[k].dot(Oproj[l]));
    f.delta2 = restricted_spread_sq(proj, O);
    f.Lbar = loschmidt_bar(psi);
    return f;
  }

 private:
  void check(const Vector& psi) const {
    if (psi.size() != M_.rows()) throw DimensionError("single-particle state size differs from M");
    if (std::abs(psi.norm() - 1.0) > 1e-12) throw ValidationError("single-particle state is not normalized");
  }

  double echo(const RealVector& w, double t) const {
    const RealVector& E = spectrum().eigenvalues;
    double re = 0.0, im = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double ph = E(k) * t;
      re += w(k) * std::cos(ph);
      im -= w(k) * std::sin(ph);
    }
    return re * re + im * im;
  }

  Matrix M_;
  EnergyClusters clusters_;
};

}  // namespace qtime
