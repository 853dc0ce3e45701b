#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qtime/histstate.hpp"
#include "qtime/random_instances.hpp"

using namespace qtime;

namespace {

PauliSum single(const std::string& letters, double c = 1.0) {
  PauliSum h(int(letters.size()));
  h.add(c, letters);
  return h;
}

}  // namespace

TEST(HistoryState, SeparableExample) {
  const double eps = 0.3;
  const auto psi = build_history_state(single("Z"), StateVector::basis(1, 0), 2, eps);
  EXPECT_EQ(psi.N(), 4);
  EXPECT_NEAR(psi.T, 4 * eps, 1e-15);
  for (long long t = 0; t < 4; ++t) {
    EXPECT_NEAR(std::abs(psi.state.amplitudes()(2 * t) - 0.5 * std::exp(-kI * eps * double(t))), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(psi.state.amplitudes()(2 * t + 1)), 0.0, 1e-15);
  }
  EXPECT_NEAR(linear_entropy(psi), 0.0, 1e-14);
  EXPECT_NEAR(purity(reduced_states(psi).rho_S), 1.0, 1e-14);
}

TEST(HistoryState, MaximallyEntangledExample) {
  const auto psi = build_history_state(single("X"), StateVector::basis(1, 0), 1, kPi / 2);
  // (|0>|0> - i|1>|1>)/sqrt 2 with clock on the high bit
  Vector expect = Vector::Zero(4);
  expect(0) = 1.0 / std::sqrt(2.0);
  expect(3) = -kI / std::sqrt(2.0);
  EXPECT_TRUE(equal_up_to_phase(psi.state, StateVector(expect), 1e-12));
  EXPECT_NEAR(linear_entropy(psi), 0.5, 1e-14);
  EXPECT_LT(max_abs(reduced_states(psi).rho_T.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-14);
}

TEST(HistoryState, CircuitMatchesFormulaWithGateLog) {
  Philox rng(51);
  for (int trial = 0; trial < 5; ++trial) {
    const PauliSum h = random_pauli_sum(3, 6, rng);
    const StateVector psi0 = random_state(3, rng);
    const double eps = 0.2 + rng.uniform();
    const auto a = build_history_state(h, psi0, 3, eps);
    GateLog log;
    const auto b = build_history_state_circuit(h, psi0, 3, eps, &log);
    EXPECT_LT((a.state.amplitudes() - b.state.amplitudes()).norm(), 1e-12);
    const auto counts = audit_gate_log(log);
    EXPECT_EQ(counts.one_qubit, 3);
    EXPECT_EQ(counts.controlled_multi, 3);
    EXPECT_EQ(counts.total(), 6);
  }
}

TEST(HistoryState, RejectsOversizedRegisters) {
  set_dense_qubit_cap(4);
  EXPECT_THROW(build_history_state(single("ZZ"), StateVector::basis(2, 0), 3, 0.1), SizeError);
  set_dense_qubit_cap(14);
  EXPECT_THROW(build_history_state(single("ZZ"), StateVector::basis(1, 0), 1, 0.1), DimensionError);
}

TEST(ConditionOnTime, MatchesPropagatorForEveryT) {
  Philox rng(52);
  const PauliSum h = random_pauli_sum(3, 6, rng);
  const StateVector psi0 = random_state(3, rng);
  const auto psi = build_history_state(h, psi0, 3, 0.37);
  const Matrix H = pauli_sum_to_matrix(h);
  for (long long t = 0; t < 8; ++t) {
    const auto want = StateVector::normalized(oracle::expm_taylor(-kI * 0.37 * double(t) * H) * psi0.amplitudes());
    EXPECT_TRUE(equal_up_to_phase(condition_on_time(psi, t), want, 1e-10)) << t;
  }
  EXPECT_TRUE(equal_up_to_phase(condition_on_time(psi, 0), psi0, 1e-12));
  EXPECT_THROW(condition_on_time(psi, 8), ValidationError);
}

TEST(ReducedStates, KrausSumAndPuritySymmetry) {
  Philox rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix H = random_hermitian(4, rng);
    const auto spec = hermitian_eig(H);
    const StateVector psi0 = random_state(2, rng);
    const auto psi = build_history_state(spec, psi0, 3, 0.5);
    const auto red = reduced_states(psi);
    // oracle: explicit time-evolved projectors via the series exponential
    Matrix rho = Matrix::Zero(4, 4);
    for (int t = 0; t < 8; ++t) {
      const Vector v = oracle::expm_taylor(-kI * 0.5 * double(t) * H) * psi0.amplitudes();
      rho += v * v.adjoint() / 8.0;
    }
    EXPECT_LT(max_abs(red.rho_S.matrix() - rho), 1e-12);
    EXPECT_LT(max_abs(discrete_time_average(spec, psi0, 8, 0.5).matrix() - rho), 1e-12);
    EXPECT_NEAR(purity(red.rho_T), purity(red.rho_S), 1e-12);
    const RealVector p = schmidt_spectrum(psi.state, psi.m, psi.n);
    EXPECT_NEAR(linear_entropy(psi), 1.0 - p.squaredNorm(), 1e-12);
  }
}

TEST(LinearEntropy, Range) {
  Philox rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = build_history_state(random_pauli_sum(2, 4, rng), random_state(2, rng), 2, rng.uniform(0.1, 3.0));
    const double e2 = linear_entropy(psi);
    EXPECT_GE(e2, -1e-14);
    EXPECT_LE(e2, 1.0 - 1.0 / 4.0 + 1e-14);
  }
}

TEST(DephasingChannel, EqualsRhoSAndHandlesResonances) {
  Philox rng(55);
  const PauliSum h = random_pauli_sum(3, 5, rng);
  const StateVector psi0 = random_state(3, rng);
  const auto c = cluster_spectrum(h);
  for (double eps : {0.3, 1.1}) {
    const auto psi = build_history_state(h, psi0, 3, eps);
    EXPECT_LT(max_abs(dephasing_channel(c, psi0, 8, eps).matrix() - reduced_states(psi).rho_S.matrix()), 1e-12);
  }
  EXPECT_EQ(dephasing_coefficient(2 * kPi, 1.0, 16), cplx(1.0));
  EXPECT_EQ(dephasing_coefficient(0.0, 0.4, 16), cplx(1.0));
  // direct sum oracle
  cplx direct = 0.0;
  for (int t = 0; t < 16; ++t) direct += std::exp(-kI * 0.7 * 0.4 * double(t)) / 16.0;
  EXPECT_LT(std::abs(dephasing_coefficient(0.7, 0.4, 16) - direct), 1e-14);
}

TEST(DephasingChannel, OffDiagonalCoherenceDecaysWithT) {
  AubryAndreParams p{3, 2.0, 1.3, golden_alpha(), Boundary::Open};
  const auto c = cluster_spectrum(build_aubry_andre_spin(p));
  const double eps = 0.5;
  double prev = offdiagonal_coherence(c, 1, eps);
  double first = prev;
  for (long long N = 2; N <= 8192; N *= 2) {
    const double cur = offdiagonal_coherence(c, N, eps);
    EXPECT_LE(cur, prev + 1e-12) << N;
    prev = cur;
  }
  EXPECT_LT(prev, 1e-3 * first);
}

TEST(Majorization, EigenstateAndPeriodicCases) {
  PauliSum h(1);
  h.add(1.0, "Z").add(1.0, "I");
  const auto eig = build_history_state(h, StateVector::basis(1, 0), 2, 0.3);
  const auto r1 = check_majorization(eig, h);
  EXPECT_TRUE(r1.holds);
  EXPECT_NEAR(r1.spectrum_rho_s(0), 1.0, 1e-12);
  EXPECT_NEAR(r1.spectrum_rho_bar(0), 1.0, 1e-12);

  const auto per = build_history_state(h, StateVector::plus(1), 1, kPi / 2);  // T = tau = pi
  const auto red = reduced_states(per);
  EXPECT_LT(max_abs(red.rho_S.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-12);
  EXPECT_LT(max_abs(dephased_state(h, StateVector::plus(1)).matrix() - red.rho_S.matrix()), 1e-12);
  EXPECT_TRUE(check_majorization(per, h).holds);
}

TEST(Majorization, RandomInstancesHold) {
  Philox rng(56);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + int(rng.below(3));
    const int m = 1 + int(rng.below(3));
    const PauliSum h = random_pauli_sum(n, 2 + int(rng.below(5)), rng);
    const StateVector psi0 = random_state(n, rng);
    const auto c = cluster_spectrum(h);
    const auto psi = build_history_state(c.spectrum, psi0, m, rng.uniform(0.05, 3.0));
    const auto r = check_majorization(psi, c);
    EXPECT_NEAR(r.spectrum_rho_s.sum(), 1.0, 1e-10);
    EXPECT_NEAR(r.spectrum_rho_bar.sum(), 1.0, 1e-10);
    worst = std::max(worst, r.max_violation);
    const auto b = entanglement_loschmidt_bound(psi, c, psi0);
    EXPECT_GE(b.slack, -1e-12);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(EntanglementBound, EigenstateAndPeriodicSaturation) {
  PauliSum h(1);
  h.add(1.0, "Z").add(1.0, "I");
  const auto c = cluster_spectrum(h);
  const auto eig = build_history_state(h, StateVector::basis(1, 0), 2, 0.3);
  const auto b0 = entanglement_loschmidt_bound(eig, c, StateVector::basis(1, 0));
  EXPECT_NEAR(b0.E2, 0.0, 1e-14);
  EXPECT_NEAR(b0.Lbar, 1.0, 1e-14);
  EXPECT_NEAR(b0.slack, 0.0, 1e-14);

  // two-level periodic model, T = tau with N = 4
  Philox rng(57);
  const StateVector psi0 = random_state(1, rng);
  const auto psi = build_history_state(c.spectrum, psi0, 2, kPi / 4);
  const auto b = entanglement_loschmidt_bound(psi, c, psi0);
  EXPECT_NEAR(b.slack, 0.0, 1e-12);
  double Ltilde = 0.0;
  for (long long t = 0; t < 4; ++t) Ltilde += std::norm(psi0.inner(condition_on_time(psi, t))) / 4.0;
  EXPECT_NEAR(b.E2, 1.0 - Ltilde, 1e-12);
}

TEST(FluctuationBound, ClosedFormSingleQubit) {
  const auto h = single("Z");
  const auto psi = build_history_state(h, StateVector::plus(1), 3, 0.4);
  const auto f = fluctuation_bound(psi, h, StateVector::plus(1), single("X"));
  EXPECT_NEAR(f.sigma2, 0.5, 1e-14);
  EXPECT_NEAR(f.Lbar, 0.5, 1e-14);
  EXPECT_NEAR(f.delta2, 4.0, 1e-12);
  EXPECT_GE(f.delta2 * f.Lbar, f.sigma2);
  // commuting observable has no fluctuations
  EXPECT_NEAR(fluctuation_bound(psi, h, StateVector::plus(1), single("Z")).sigma2, 0.0, 1e-14);
}

TEST(FluctuationBound, MatchesLongTimeVarianceAndChainHolds) {
  Philox rng(58);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix H = random_hermitian(4, rng);
    const auto c = cluster_spectrum(hermitian_eig(H));
    const StateVector psi0 = random_state(2, rng);
    const Matrix O = random_hermitian(4, rng);
    const auto psi = build_history_state(c.spectrum, psi0, 3, 0.7);
    const auto f = fluctuation_bound(psi, c, psi0, O);
    // long, fine time grid
    const int steps = 200000;
    const double dt = 0.05;
    const Matrix U = oracle::expm_taylor(-kI * dt * H);
    Vector v = psi0.amplitudes();
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double o = v.dot(O * v).real();
      s += o;
      s2 += o * o;
      v = U * v;
      if (k % 1000 == 999) v.normalize();
    }
    const double var = s2 / steps - (s / steps) * (s / steps);
    EXPECT_NEAR(var, f.sigma2, 0.02 * f.sigma2 + 1e-6);
    EXPECT_LE(f.sigma2, f.delta2 * f.Lbar + 1e-12);
    EXPECT_LE(f.delta2 * f.Lbar, f.delta2 * f.purity_S + 1e-12);
  }
}
