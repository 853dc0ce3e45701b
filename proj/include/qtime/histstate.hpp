#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qtime/core/circuit.hpp"
#include "qtime/core/linalg.hpp"
#include "qtime/hamiltonians.hpp"

namespace qtime {

// Register layout: system on bits [0, n), clock qubit j (1-based) on bit
// n + j - 1, so the clock integer t occupies the high bits and the global
// index is t * 2^n + s.

/// Discrete history state (1/sqrt N) sum_t |t> (x) U(eps t)|psi0>.
struct HistoryState {
  StateVector state;
  int n = 0;
  int m = 0;
  double epsilon = 0.0;
  double T = 0.0;

  long long N() const { return 1LL << m; }
  Eigen::Index system_dim() const { return Eigen::Index(1) << n; }
};

inline void check_history_args(int n, int m, double epsilon) {
  if (m < 0) throw ValidationError("clock qubit count must be non-negative");
  if (!std::isfinite(epsilon)) throw ValidationError("epsilon must be finite");
  require_dense(n + m, "history state");
}

/// Formula path: amplitudes (1/sqrt N) |t> (x) V e^{-i lambda eps t} V^dagger |psi0>.
inline HistoryState build_history_state(const Spectrum& spec, const StateVector& psi0, int m, double epsilon) {
  const int n = psi0.num_qubits();
  if (spec.size() != psi0.dim()) throw DimensionError("Hamiltonian and initial state dimensions differ");
  check_history_args(n, m, epsilon);
  const long long N = 1LL << m;
  const Eigen::Index d = psi0.dim();
  const Vector c = spec.eigenvectors.adjoint() * psi0.amplitudes();
  Vector amps(d * N);
  const double norm = 1.0 / std::sqrt(double(N));
  for (long long t = 0; t < N; ++t) {
    Vector ct(d);
    for (Eigen::Index k = 0; k < d; ++k) ct(k) = c(k) * std::exp(-kI * (spec.eigenvalues(k) * epsilon * double(t)));
    amps.segment(Eigen::Index(t) * d, d) = norm * (spec.eigenvectors * ct);
  }
  return {StateVector::normalized(std::move(amps)), n, m, epsilon, epsilon * double(N)};
}

inline HistoryState build_history_state(const PauliSum& h, const StateVector& psi0, int m, double epsilon) {
  if (h.num_qubits() != psi0.num_qubits()) throw DimensionError("Hamiltonian and initial state widths differ");
  return build_history_state(hermitian_eig(h), psi0, m, epsilon);
}

/// Circuit path: Hadamards on the clock, then controlled U(eps 2^{j-1}) from
/// clock qubit j onto the system. Gates are appended to `reg`.
inline void append_history_circuit(Register& reg, const Spectrum& spec, int n, int m, double epsilon,
                                   int system_lo = 0, int clock_lo = -1) {
  if (clock_lo < 0) clock_lo = system_lo + n;
  for (int j = 1; j <= m; ++j) reg.h(clock_lo + j - 1);
  for (int j = 1; j <= m; ++j) {
    const Matrix u = propagator(spec, epsilon * std::ldexp(1.0, j - 1));
    reg.controlled_block(clock_lo + j - 1, system_lo, u, "cU");
  }
}

inline HistoryState build_history_state_circuit(const Spectrum& spec, const StateVector& psi0, int m, double epsilon,
                                                GateLog* log = nullptr) {
  const int n = psi0.num_qubits();
  check_history_args(n, m, epsilon);
  Register reg(StateVector::basis(m, 0).tensor(psi0));
  append_history_circuit(reg, spec, n, m, epsilon);
  if (log) *log = reg.log();
  const long long N = 1LL << m;
  return {reg.state(), n, m, epsilon, epsilon * double(N)};
}

inline HistoryState build_history_state_circuit(const PauliSum& h, const StateVector& psi0, int m, double epsilon,
                                                GateLog* log = nullptr) {
  return build_history_state_circuit(hermitian_eig(h), psi0, m, epsilon, log);
}

/// Normalized <t|Psi>.
inline StateVector condition_on_time(const HistoryState& psi, long long t) {
  if (t < 0 || t >= psi.N()) throw ValidationError("clock value out of range");
  const Eigen::Index d = psi.system_dim();
  return StateVector::normalized(psi.state.amplitudes().segment(Eigen::Index(t) * d, d));
}

struct ReducedStates {
  DensityMatrix rho_T;
  DensityMatrix rho_S;
};

inline ReducedStates reduced_states(const HistoryState& psi) {
  return {partial_trace(psi.state, psi.m, psi.n, Keep::A), partial_trace(psi.state, psi.m, psi.n, Keep::B)};
}

/// E2 = 1 - Tr[rho_T^2].
inline double linear_entropy(const HistoryState& psi) {
  return 1.0 - purity(partial_trace(psi.state, psi.m, psi.n, Keep::A));
}

/// (1/N) sum_t U(eps t)|psi0><psi0|U(eps t)^dagger, built term by term.
inline DensityMatrix discrete_time_average(const Spectrum& spec, const StateVector& psi0, long long N, double epsilon) {
  Matrix rho = Matrix::Zero(psi0.dim(), psi0.dim());
  for (long long t = 0; t < N; ++t) {
    const Vector v = propagator(spec, epsilon * double(t)) * psi0.amplitudes();
    rho += v * v.adjoint();
  }
  return {Matrix(rho / double(N)), DensityMatrix::Unchecked{}};
}

/// (1/N) sum_{t<N} e^{-i dE eps t} in closed form; exactly 1 when dE eps is a
/// multiple of 2 pi.
inline cplx dephasing_coefficient(double dE, double epsilon, long long N) {
  const double phi = dE * epsilon;
  const double wrapped = std::remainder(phi, 2.0 * kPi);
  if (std::abs(wrapped) < 1e-13) return 1.0;
  const cplx num = 1.0 - std::exp(-kI * (phi * double(N)));
  const cplx den = 1.0 - std::exp(-kI * wrapped);
  return num / (den * double(N));
}

/// rho_S as the dephasing channel sum_{kk'} Delta_{kk'} P_k rho0 P_k'.
inline DensityMatrix dephasing_channel(const EnergyClusters& c, const StateVector& psi0, long long N, double epsilon) {
  const auto proj = c.projections(psi0.amplitudes());
  Matrix rho = Matrix::Zero(psi0.dim(), psi0.dim());
  for (std::size_t k = 0; k < proj.size(); ++k)
    for (std::size_t l = 0; l < proj.size(); ++l)
      rho += dephasing_coefficient(c.energies[k] - c.energies[l], epsilon, N) * proj[k] * proj[l].adjoint();
  return {std::move(rho), DensityMatrix::Unchecked{}};
}

/// sum_{k != k'} |Delta_{kk'}|^2 over distinct energies.
inline double offdiagonal_coherence(const EnergyClusters& c, long long N, double epsilon) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    for (std::size_t l = 0; l < c.size(); ++l)
      if (k != l) s += std::norm(dephasing_coefficient(c.energies[k] - c.energies[l], epsilon, N));
  return s;
}

struct MajorizationReport {
  RealVector spectrum_rho_s;
  RealVector spectrum_rho_bar;
  bool holds = true;
  double max_violation = 0.0;
};

/// Checks rho_bar < rho_S: every partial sum of the descending spectrum of
/// rho_S dominates that of rho_bar. A violation is reported as a positive
/// excess of a rho_bar partial sum.
inline MajorizationReport check_majorization(const HistoryState& psi, const EnergyClusters& c, double tol = 1e-12) {
  MajorizationReport r;
  const StateVector psi0 = condition_on_time(psi, 0);
  r.spectrum_rho_s = density_spectrum(reduced_states(psi).rho_S);
  r.spectrum_rho_bar = density_spectrum(dephased_state(c, psi0));
  double ss = 0.0, sb = 0.0;
  for (Eigen::Index i = 0; i < r.spectrum_rho_s.size(); ++i) {
    ss += r.spectrum_rho_s(i);
    sb += r.spectrum_rho_bar(i);
    r.max_violation = std::max(r.max_violation, sb - ss);
  }
  r.holds = r.max_violation <= tol;
  return r;
}

inline MajorizationReport check_majorization(const HistoryState& psi, const PauliSum& h, double tol = 1e-12) {
  return check_majorization(psi, cluster_spectrum(h), tol);
}

struct EntanglementBound {
  double E2 = 0.0;
  double Lbar = 0.0;
  double slack = 0.0;  // (1 - Lbar) - E2
};

inline EntanglementBound entanglement_loschmidt_bound(const HistoryState& psi, const EnergyClusters& c,
                                                      const StateVector& psi0) {
  EntanglementBound b;
  b.E2 = linear_entropy(psi);
  b.Lbar = loschmidt_bar(c, psi0);
  b.slack = (1.0 - b.Lbar) - b.E2;
  return b;
}

/// Spread (lambda_max - lambda_min)^2 of O restricted to span{P_k psi}.
inline double restricted_spread_sq(const std::vector<Vector>& proj, const Matrix& O, double tol = 1e-14) {
  std::vector<Vector> basis;
  for (const auto& v : proj) {
    const double nv = v.norm();
    if (nv * nv > tol) basis.push_back(v / nv);
  }
  if (basis.empty()) return 0.0;
  Matrix B(O.rows(), Eigen::Index(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) B.col(Eigen::Index(i)) = basis[i];
  const Matrix Or = B.adjoint() * O * B;
  Eigen::SelfAdjointEigenSolver<Matrix> es((Or + Or.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  const double spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
  return spread * spread;
}

struct FluctuationBound {
  double sigma2 = 0.0;
  double delta2 = 0.0;
  double Lbar = 0.0;
  double purity_S = 0.0;
  double bound = 0.0;  // delta2 * (1 - E2)
};

/// sigma^2_O = sum_{k != k'} |<psi|P_k O P_k'|psi>|^2 and the chain
/// sigma^2 <= Delta^2 Lbar <= Delta^2 Tr[rho_S^2].
inline FluctuationBound fluctuation_bound(const HistoryState& psi, const EnergyClusters& c, const StateVector& psi0,
                                          const Matrix& O) {
  FluctuationBound f;
  const auto proj = c.projections(psi0.amplitudes());
  std::vector<Vector> Oproj;
  for (const auto& v : proj) Oproj.push_back(O * v);
  for (std::size_t k = 0; k < proj.size(); ++k)
    for (std::size_t l = 0; l < proj.size(); ++l)
      if (k != l) f.sigma2 += std::norm(proj[k].dot(Oproj[l]));
  f.delta2 = restricted_spread_sq(proj, O);
  f.Lbar = loschmidt_bar(c, psi0);
  f.purity_S = 1.0 - linear_entropy(psi);
  f.bound = f.delta2 * f.purity_S;
  return f;
}

inline FluctuationBound fluctuation_bound(const HistoryState& psi, const PauliSum& h, const StateVector& psi0,
                                          const PauliSum& O) {
  return fluctuation_bound(psi, cluster_spectrum(h), psi0, pauli_sum_to_matrix(O));
}

}  // namespace qtime
