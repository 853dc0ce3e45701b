#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qtime/depth.hpp"
#include "qtime/hamiltonians.hpp"
#include "qtime/random_instances.hpp"
#include "qtime/vhd.hpp"

using namespace qtime;

namespace {

CartanAnsatz random_ansatz(int n, int L, Philox& rng, bool tied = false) {
  CartanAnsatz a(n, L, tied);
  for (auto& x : a.alpha) x = rng.uniform(0.0, 2 * kPi);
  for (auto& x : a.beta) x = rng.normal();
  return a;
}

PauliSum random_xy(int n, Philox& rng) {
  XYParams p{n, {}, {}, {}};
  for (int j = 0; j < n - 1; ++j) {
    p.ax.push_back(rng.normal());
    p.ay.push_back(rng.normal());
  }
  for (int j = 0; j < n; ++j) p.az.push_back(rng.normal());
  return build_xy_spin(p);
}

// Brute-force (1/2^n) Tr[(H - W D W^dag)^dag (H - W D W^dag)] with series exponentials.
double cost_oracle(const PauliSum& h, const CartanAnsatz& a) {
  const Eigen::Index d = Eigen::Index(1) << a.n;
  Matrix W = Matrix::Identity(d, d);
  for (const auto& g : ansatz_gates(a))
    W = W * oracle::expm_taylor(kI * a.alpha[std::size_t(g.param)] * oracle::pauli_kron(g.letters));
  Matrix D = Matrix::Zero(d, d);
  for (int mu = 1; mu <= a.n; ++mu) {
    std::string s(std::size_t(a.n), 'I');
    s[std::size_t(mu - 1)] = 'Z';
    D += a.beta[std::size_t(mu - 1)] * oracle::pauli_kron(s);
  }
  const Matrix R = pauli_sum_to_matrix(h) - W * D * W.adjoint();
  return (R.adjoint() * R).trace().real() / double(d);
}

}  // namespace

TEST(Ansatz, ParameterCountsAndGateOrder) {
  CartanAnsatz a(4, 3);
  EXPECT_EQ(a.alpha.size(), 18u);
  EXPECT_EQ(a.beta.size(), 4u);
  EXPECT_EQ(a.gate_count(), 18);
  const auto g = ansatz_gates(a);
  ASSERT_EQ(g.size(), 18u);
  // brick order: bonds (0,1), (2,3), then (1,2); XY before YX on each bond
  EXPECT_EQ(g[0].letters, "XYII");
  EXPECT_EQ(g[1].letters, "YXII");
  EXPECT_EQ(g[2].letters, "IIXY");
  EXPECT_EQ(g[4].letters, "IXYI");
  EXPECT_EQ(g[1].param, 3);
  EXPECT_EQ(g[4].param, 1);
  EXPECT_EQ(g[6].param, 6);
  CartanAnsatz t(4, 3, true);
  EXPECT_EQ(t.alpha.size(), 9u);
  EXPECT_EQ(ansatz_gates(t)[1].param, 0);  // YX shares the XY angle on the same bond
  EXPECT_EQ(t.gate_count(), 18);
  CartanAnsatz bad = a;
  bad.alpha.pop_back();
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Ansatz, UnitaryCases) {
  EXPECT_LT(max_abs(ansatz_unitary(CartanAnsatz(3, 2)) - Matrix::Identity(8, 8)), 1e-15);
  CartanAnsatz a(2, 1);
  a.alpha = {0.63, 0.0};
  EXPECT_LT(max_abs(ansatz_unitary(a) - oracle::expm_taylor(kI * 0.63 * oracle::pauli_kron("XY"))), 1e-12);
  Philox rng(91);
  const auto r = random_ansatz(4, 2, rng);
  const Matrix W = ansatz_unitary(r);
  EXPECT_LT(max_abs(W.adjoint() * W - Matrix::Identity(16, 16)), 1e-10);
}

TEST(Ansatz, RegisterApplicationMatchesDense) {
  Philox rng(92);
  const auto a = random_ansatz(3, 2, rng);
  const StateVector psi = random_state(3, rng);
  const Matrix W = ansatz_unitary(a);
  Register r1(psi), r2(psi);
  append_ansatz(r1, a, 0, false, "W");
  append_ansatz(r2, a, 0, true, "Wd");
  EXPECT_LT((r1.amplitudes() - W * psi.amplitudes()).norm(), 1e-12);
  EXPECT_LT((r2.amplitudes() - W.adjoint() * psi.amplitudes()).norm(), 1e-12);
  EXPECT_EQ(audit_gate_log(r1.log()).two_qubit, a.gate_count());
}

TEST(Cost, TrivialValues) {
  CartanAnsatz a(3, 1);
  a.beta = {0.5, -0.2, 1.1};
  EXPECT_NEAR(vhd_cost(diagonal_model(a), a), 0.0, 1e-15);
  PauliSum h(3);
  h.add(0.3, "XXI").add(-0.7, "IYY").add(0.2, "ZIZ").add(0.4, "III");
  CartanAnsatz zero(3, 1);
  EXPECT_NEAR(vhd_cost(h, zero), 0.09 + 0.49 + 0.04 + 0.16, 1e-14);
  EXPECT_NEAR(vhd_cost_dense(h, zero), 0.09 + 0.49 + 0.04 + 0.16, 1e-14);
}

TEST(Cost, EngineMatchesDenseTraceOracle) {
  Philox rng(93);
  for (int trial = 0; trial < 5; ++trial) {
    const PauliSum h = trial % 2 ? random_pauli_sum(3, 6, rng) : random_xy(3, rng);
    const auto a = random_ansatz(3, 2, rng, trial == 4);
    const double want = cost_oracle(h, a);
    EXPECT_NEAR(vhd_cost(h, a), want, 1e-12);
    EXPECT_NEAR(vhd_cost_dense(h, a), want, 1e-12);
  }
}

TEST(Cost, ModelHamiltonianMatchesDense) {
  Philox rng(94);
  const auto a = random_ansatz(4, 2, rng);
  const VhdEngine eng(random_xy(4, rng), 4, 2);
  const Matrix W = ansatz_unitary(a);
  const Matrix want = W * pauli_sum_to_matrix(diagonal_model(a)) * W.adjoint();
  EXPECT_LT(max_abs(pauli_sum_to_matrix(eng.model_hamiltonian(a)) - want), 1e-12);
}

TEST(Gradient, MatchesFiniteDifferencesAndShiftRule) {
  Philox rng(95);
  for (int n : {2, 3, 4}) {
    const PauliSum h = n == 3 ? random_pauli_sum(3, 6, rng) : random_xy(n, rng);
    const auto a = random_ansatz(n, 2, rng);
    const auto g = vhd_gradient(h, a);
    const auto gs = vhd_gradient_shift(h, a);
    const double step = 1e-5;
    for (std::size_t k = 0; k < a.alpha.size(); ++k) {
      CartanAnsatz p = a, m = a;
      p.alpha[k] += step;
      m.alpha[k] -= step;
      const double fd = (cost_oracle(h, p) - cost_oracle(h, m)) / (2 * step);
      EXPECT_NEAR(g.alpha[k], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "n=" << n << " alpha " << k;
      EXPECT_NEAR(gs.alpha[k], g.alpha[k], 1e-10);
    }
    for (std::size_t k = 0; k < a.beta.size(); ++k) {
      CartanAnsatz p = a, m = a;
      p.beta[k] += step;
      m.beta[k] -= step;
      const double fd = (cost_oracle(h, p) - cost_oracle(h, m)) / (2 * step);
      EXPECT_NEAR(g.beta[k], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "beta " << k;
      EXPECT_NEAR(gs.beta[k], g.beta[k], 1e-10);
    }
  }
}

TEST(Gradient, TiedParametersMatchFiniteDifferences) {
  Philox rng(96);
  const PauliSum h = random_xy(3, rng);
  const auto a = random_ansatz(3, 2, rng, true);
  const auto g = vhd_gradient(h, a);
  for (std::size_t k = 0; k < a.alpha.size(); ++k) {
    CartanAnsatz p = a, m = a;
    p.alpha[k] += 1e-5;
    m.alpha[k] -= 1e-5;
    const double fd = (cost_oracle(h, p) - cost_oracle(h, m)) / 2e-5;
    EXPECT_NEAR(g.alpha[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Gradient, VanishesAtConstructedMinimum) {
  Philox rng(97);
  const auto star = random_ansatz(4, 2, rng);
  const VhdEngine eng(random_xy(4, rng), 4, 2);
  const PauliSum h = eng.model_hamiltonian(star);
  const auto g = vhd_gradient(h, star);
  double nrm = 0.0;
  for (double x : g.alpha) nrm += x * x;
  for (double x : g.beta) nrm += x * x;
  EXPECT_LT(std::sqrt(nrm), 1e-8);
  EXPECT_LT(vhd_cost(h, star), 1e-20);
}

TEST(Gradient, BetaAtIdentityForDiagonalTarget) {
  PauliSum h(2);
  h.add(0.8, "ZI").add(-0.3, "IZ");
  CartanAnsatz a(2, 1);
  a.beta = {0.5, 0.1};
  const auto g = vhd_gradient(h, a);
  EXPECT_NEAR(g.beta[0], 2 * (0.5 - 0.8), 1e-14);
  EXPECT_NEAR(g.beta[1], 2 * (0.1 + 0.3), 1e-14);
  a.beta = {0.8, -0.3};
  const auto z = vhd_gradient(h, a);
  EXPECT_NEAR(z.beta[0], 0.0, 1e-15);
  EXPECT_NEAR(z.beta[1], 0.0, 1e-15);
}

TEST(Adam, MinimizesQuadratic) {
  std::vector<double> x{3.0, -2.0};
  Adam opt(2, 0.1);
  for (int i = 0; i < 2000; ++i) opt.step(x, {2 * (x[0] - 1.0), 2 * (x[1] + 0.5)});
  EXPECT_NEAR(x[0], 1.0, 1e-3);
  EXPECT_NEAR(x[1], -0.5, 1e-3);
}

TEST(Train, TwoQubitXYConverges) {
  XYParams p{2, {0.7}, {-0.4}, {0.3, 0.9}};
  const PauliSum h = build_xy_spin(p);
  TrainConfig cfg;
  cfg.restarts = 3;
  cfg.max_iters = 20000;
  cfg.seed = 5;
  const auto rep = vhd_train(h, 2, 1, cfg);
  EXPECT_LT(rep.best_loss, 1e-12);
  EXPECT_GE(rep.converged_runs, 1);
  for (const auto& r : rep.runs) EXPECT_FALSE(r.loss_history.empty());
  double mn = rep.runs[0].final_loss;
  for (const auto& r : rep.runs) mn = std::min(mn, r.final_loss);
  EXPECT_EQ(rep.best_loss, mn);
  // trained W diagonalizes H
  EXPECT_LT(offdiagonal_residual(h, rep.best_params), std::sqrt(4.0 * std::max(rep.best_loss, 1e-30)) + 1e-12);
  // eigenvalue recovery
  const RealVector ev = hermitian_eig(h).eigenvalues;
  EXPECT_LT((diagonal_spectrum(rep.best_params) - ev).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Train, DeterministicPerSeed) {
  const PauliSum h = build_xy_spin(aubry_andre_xy_params(AubryAndreParams{3, 2.0, 1.0}));
  TrainConfig cfg;
  cfg.restarts = 2;
  cfg.max_iters = 300;
  cfg.seed = 11;
  const auto a = vhd_train(h, 3, 2, cfg), b = vhd_train(h, 3, 2, cfg);
  EXPECT_EQ(a.best_loss, b.best_loss);
  EXPECT_EQ(a.best_params.alpha, b.best_params.alpha);
  EXPECT_EQ(a.runs[1].loss_history, b.runs[1].loss_history);
  TrainConfig bad = cfg;
  bad.lr_alpha = 0.0;
  EXPECT_THROW(vhd_train(h, 3, 2, bad), ValidationError);
  bad = cfg;
  bad.lr_decay = 1.5;
  EXPECT_THROW(vhd_train(h, 3, 2, bad), ValidationError);
}

TEST(Train, AubryAndreSixSitesOverparametrized) {
  const PauliSum h = build_xy_spin(aubry_andre_xy_params(AubryAndreParams{6, 2.0, 2.0}));
  TrainConfig cfg;
  cfg.restarts = 4;
  const auto rep = vhd_train(h, 6, 3, cfg);
  EXPECT_LT(rep.best_loss, 1e-10);
  EXPECT_LT(offdiagonal_residual(h, rep.best_params), std::sqrt(64.0 * rep.best_loss) + 1e-12);
}

TEST(LieClosure, DimensionIsNTimesNMinusOne) {
  for (int n = 2; n <= 6; ++n) EXPECT_EQ(lie_closure_dim(ansatz_generators(n)).dim, n * (n - 1)) << n;
  const auto t = lie_closure_dim(ansatz_generators(6), 10);
  EXPECT_TRUE(t.truncated);
  EXPECT_GT(t.dim, 10);
}

TEST(LieClosure, KnownSmallAlgebras) {
  // {X, Z} on one qubit generates su(2)
  EXPECT_EQ(lie_closure_dim({PauliString(1.0, "X"), PauliString(1.0, "Z")}).dim, 3);
  EXPECT_EQ(lie_closure_dim({PauliString(1.0, "ZZ"), PauliString(1.0, "IZ")}).dim, 2);
}

TEST(DiagonalizedHistory, ExactToyModelMatchesFormula) {
  Philox rng(98);
  const auto star = random_ansatz(3, 2, rng);
  const VhdEngine eng(random_xy(3, rng), 3, 2);
  const PauliSum h = eng.model_hamiltonian(star);
  const StateVector psi0 = random_state(3, rng);
  const auto builder = DiagonalizedHistoryBuilder::create(star, vhd_cost(h, star), 1e-12, 2, 0.35);
  const auto got = builder.build(psi0);
  const auto want = build_history_state(h, psi0, 2, 0.35);
  EXPECT_LT((got.state.amplitudes() - want.state.amplitudes()).norm(), 1e-10);
  // entanglement-only path keeps the clock spectrum
  const auto partial = builder.build(psi0, true);
  const RealVector s1 = schmidt_spectrum(got.state, 2, 3), s2 = schmidt_spectrum(partial.state, 2, 3);
  EXPECT_LT((s1 - s2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(DiagonalizedHistoryBuilder::create(star, 1e-3, 1e-8, 2, 0.35), ValidationError);
}

TEST(DiagonalizedHistory, GateLogMatchesCountingModel) {
  Philox rng(99);
  const auto a = random_ansatz(6, 3, rng);
  const auto b = DiagonalizedHistoryBuilder::create(a, 0.0, 1.0, 4, 0.2);
  const Register full = b.build_register(StateVector::basis(6, 0));
  const GateCounts c = audit_gate_log(full.log());
  EXPECT_EQ(c.total(), 88);
  EXPECT_EQ(c, diagonalized_circuit_counts(6, 4, a.gate_count(), false));
  const Register ent = b.build_register(StateVector::basis(6, 0), true);
  EXPECT_EQ(audit_gate_log(ent.log()).total(), 88 - 30);
  EXPECT_EQ(audit_gate_log(ent.log()), diagonalized_circuit_counts(6, 4, a.gate_count(), true));
}
