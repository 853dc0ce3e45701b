#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtime/core/circuit.hpp"
#include "qtime/core/linalg.hpp"
#include "qtime/core/pauli.hpp"
#include "qtime/core/random.hpp"
#include "qtime/histstate.hpp"

namespace qtime {

/// Brickwork XY/YX ansatz W(alpha) with diagonal model D(beta) = sum_mu beta_mu Z_mu.
///
/// W = prod_l [brick layer l], read left to right. A layer visits bonds
/// (0,1), (2,3), ... then (1,2), (3,4), ...; each bond contributes
/// e^{i a X_j Y_{j+1}} followed by e^{i a Y_j X_{j+1}}.
/// Untied layout: alpha[l*2(n-1) + j] for XY on bond j (0-based) and
/// alpha[l*2(n-1) + (n-1) + j] for YX. Tied layout shares alpha[l*(n-1) + j].
struct CartanAnsatz {
  int n = 2;
  int L = 1;
  bool tied = false;
  std::vector<double> alpha;
  std::vector<double> beta;

  CartanAnsatz() = default;
  CartanAnsatz(int n_, int L_, bool tied_ = false)
      : n(n_), L(L_), tied(tied_), alpha(std::size_t(param_count(n_, L_, tied_)), 0.0), beta(std::size_t(n_), 0.0) {
    if (n_ < 2) throw ValidationError("ansatz needs n >= 2");
    if (L_ < 0) throw ValidationError("layer count must be non-negative");
  }

  static int param_count(int n, int L, bool tied) { return (tied ? 1 : 2) * (n - 1) * L; }

  void validate() const {
    if (int(alpha.size()) != param_count(n, L, tied) || int(beta.size()) != n) {
      throw ValidationError("ansatz parameter counts do not match (n, L)");
    }
  }

  int gate_count() const { return 2 * (n - 1) * L; }
};

/// One rotation e^{i theta P} of the ansatz, in written order.
struct AnsatzGate {
  std::string letters;
  int param = 0;
};

inline std::vector<AnsatzGate> ansatz_gates(const CartanAnsatz& a) {
  std::vector<AnsatzGate> out;
  const int b = a.n - 1;
  for (int l = 0; l < a.L; ++l) {
    for (int parity = 0; parity < 2; ++parity) {
      for (int j = parity; j < b; j += 2) {
        for (int flavor = 0; flavor < 2; ++flavor) {
          std::string s(std::size_t(a.n), 'I');
          s[std::size_t(j)] = flavor == 0 ? 'X' : 'Y';
          s[std::size_t(j + 1)] = flavor == 0 ? 'Y' : 'X';
          const int p = a.tied ? l * b + j : l * 2 * b + flavor * b + j;
          out.push_back({std::move(s), p});
        }
      }
    }
  }
  return out;
}

/// Generator set {X_j Y_{j+1}, Y_j X_{j+1}} of the ansatz.
inline std::vector<PauliString> ansatz_generators(int n) {
  std::vector<PauliString> g;
  for (int j = 1; j < n; ++j) {
    g.push_back(PauliString::on_sites(1.0, n, {{j, 'X'}, {j + 1, 'Y'}}));
    g.push_back(PauliString::on_sites(1.0, n, {{j, 'Y'}, {j + 1, 'X'}}));
  }
  return g;
}

inline PauliSum diagonal_model(const CartanAnsatz& a) {
  PauliSum d(a.n);
  for (int mu = 1; mu <= a.n; ++mu) d.add(PauliString::on_sites(a.beta[std::size_t(mu - 1)], a.n, {{mu, 'Z'}}));
  return d;
}

/// Dense W(alpha).
inline Matrix ansatz_unitary(const CartanAnsatz& a) {
  a.validate();
  require_dense(a.n, "ansatz_unitary");
  const Eigen::Index d = Eigen::Index(1) << a.n;
  Matrix W = Matrix::Identity(d, d);
  for (const auto& g : ansatz_gates(a)) {
    const double th = a.alpha[std::size_t(g.param)];
    const Matrix P = pauli_string_to_matrix(PauliString(1.0, g.letters));
    W = W * (std::cos(th) * Matrix::Identity(d, d) + kI * std::sin(th) * P);
  }
  return W;
}

/// Apply W (or W^dagger) to bits [lo, lo+n) of a register as logged 2-qubit rotations.
inline void append_ansatz(Register& reg, const CartanAnsatz& a, int lo, bool dagger, const std::string& label) {
  const auto gates = ansatz_gates(a);
  if (dagger) {
    for (const auto& g : gates) reg.pauli_rotation(lo, g.letters, -a.alpha[std::size_t(g.param)], label);
  } else {
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
      reg.pauli_rotation(lo, it->letters, a.alpha[std::size_t(it->param)], label);
    }
  }
}

/// C = ||H - W D W^dagger||_HS^2 / 2^n by dense matrices.
inline double vhd_cost_dense(const PauliSum& h, const CartanAnsatz& a) {
  const Matrix H = pauli_sum_to_matrix(h);
  const Matrix W = ansatz_unitary(a);
  const Matrix R = H - W * pauli_sum_to_matrix(diagonal_model(a)) * W.adjoint();
  return R.squaredNorm() / double(H.rows());
}

/// Pauli-basis engine: the ansatz acts by Givens rotations on the coefficient
/// vector of any operator in the basis closed under the generators.
class VhdEngine {
 public:
  VhdEngine(const PauliSum& h, int n, int L, bool tied = false) : n_(n), L_(L), tied_(tied) {
    if (h.num_qubits() != n) throw DimensionError("Hamiltonian width differs from n");
    CartanAnsatz proto(n, L, tied);
    gates_ = ansatz_gates(proto);
    std::vector<PauliMask> gens;
    for (const auto& g : ansatz_generators(n)) gens.push_back(g.mask());
    // Closure of H's strings and the Z_mu under Q -> i P Q.
    std::vector<PauliMask> seeds;
    for (const auto& t : h.simplified(0.0).terms()) seeds.push_back(t.mask());
    for (int mu = 0; mu < n; ++mu) seeds.push_back({0, std::uint64_t{1} << mu});
    for (const auto& s : seeds) insert(s);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      for (const auto& p : gens)
        if (anticommute(p, basis_[i])) insert(multiply_masks(p, basis_[i]));
    // Pair tables per generator.
    for (const auto& p : gens) {
      std::vector<Pair> pairs;
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (!anticommute(p, basis_[i])) continue;
        const PauliMask r = multiply_masks(p, basis_[i]);
        const std::size_t j = index_.at(r);
        if (j < i) continue;  // each pair once, keyed by the smaller index
        // i P Q_i = i * i^phase * Q_j, real because phase is odd.
        const cplx f = kI * i_power(product_phase(p, basis_[i]));
        pairs.push_back({int(i), int(j), f.real() > 0 ? 1.0 : -1.0});
      }
      gen_pairs_.push_back(std::move(pairs));
    }
    for (const auto& g : gates_) {
      PauliString ps(1.0, g.letters);
      const PauliMask m = ps.mask();
      gate_gen_.push_back(int(std::find(gens.begin(), gens.end(), m) - gens.begin()));
    }
    target_ = RealVector::Zero(Eigen::Index(basis_.size()));
    for (const auto& t : h.simplified(0.0).terms()) {
      if (std::abs(t.coefficient().imag()) > 1e-12) throw ValidationError("Hamiltonian must be Hermitian");
      if (t.is_identity()) {
        identity_offset_ += std::norm(t.coefficient());
        continue;
      }
      target_(Eigen::Index(index_.at(t.mask()))) += t.coefficient().real();
    }
    for (int mu = 0; mu < n; ++mu) z_index_.push_back(int(index_.at({0, std::uint64_t{1} << mu})));
  }

  int n() const { return n_; }
  int L() const { return L_; }
  std::size_t basis_size() const { return basis_.size(); }
  const std::vector<PauliMask>& basis() const { return basis_; }
  int num_alpha() const { return CartanAnsatz::param_count(n_, L_, tied_); }

  /// Cost and, if requested, its gradient by one backward and one forward sweep.
  double cost_and_gradient(const CartanAnsatz& a, std::vector<double>* g_alpha, std::vector<double>* g_beta) const {
    const std::size_t K = gates_.size();
    const Eigen::Index B = Eigen::Index(basis_.size());
    std::vector<RealVector> S(K + 1, RealVector::Zero(B));
    for (int mu = 0; mu < n_; ++mu) S[K](z_index_[std::size_t(mu)]) = a.beta[std::size_t(mu)];
    for (std::size_t k = K; k-- > 0;) {
      S[k] = S[k + 1];
      rotate(S[k], k, a.alpha[std::size_t(gates_[k].param)]);
    }
    RealVector R = target_ - S[0];
    const double cost = R.squaredNorm() + identity_offset_;
    if (!g_alpha && !g_beta) return cost;
    if (g_alpha) g_alpha->assign(std::size_t(num_alpha()), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const double th = a.alpha[std::size_t(gates_[k].param)];
      if (g_alpha) {
        double d = 0.0;
        for (const auto& pr : gen_pairs_[std::size_t(gate_gen_[k])])
          d += pr.s * (S[k](pr.i) * R(pr.j) - S[k](pr.j) * R(pr.i));
        (*g_alpha)[std::size_t(gates_[k].param)] += -4.0 * d;
      }
      rotate(R, k, -th);  // R_{k+1} = g_k^dagger R_k g_k
    }
    if (g_beta) {
      g_beta->resize(std::size_t(n_));
      for (int mu = 0; mu < n_; ++mu) (*g_beta)[std::size_t(mu)] = -2.0 * R(z_index_[std::size_t(mu)]);
    }
    return cost;
  }

  double cost(const CartanAnsatz& a) const { return cost_and_gradient(a, nullptr, nullptr); }

  /// Coefficients of W D W^dagger in the engine basis.
  RealVector model_coefficients(const CartanAnsatz& a) const {
    RealVector S = RealVector::Zero(Eigen::Index(basis_.size()));
    for (int mu = 0; mu < n_; ++mu) S(z_index_[std::size_t(mu)]) = a.beta[std::size_t(mu)];
    for (std::size_t k = gates_.size(); k-- > 0;) rotate(S, k, a.alpha[std::size_t(gates_[k].param)]);
    return S;
  }

  PauliSum model_hamiltonian(const CartanAnsatz& a) const {
    const RealVector c = model_coefficients(a);
    PauliSum out(n_);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (c(Eigen::Index(i)) != 0.0) out.add(PauliString::from_mask(c(Eigen::Index(i)), n_, basis_[i]));
    return out;
  }

 private:
  struct Pair {
    int i, j;
    double s;  // i P Q_i = s Q_j, i P Q_j = -s Q_i
  };

  void insert(const PauliMask& m) {
    if (index_.emplace(m, basis_.size()).second) basis_.push_back(m);
  }

  // v <- g v g^dagger for g = e^{i theta P_k}.
  void rotate(RealVector& v, std::size_t k, double theta) const {
    const double c = std::cos(2 * theta), sn = std::sin(2 * theta);
    for (const auto& pr : gen_pairs_[std::size_t(gate_gen_[k])]) {
      const double vi = v(pr.i), vj = v(pr.j);
      v(pr.i) = c * vi - sn * pr.s * vj;
      v(pr.j) = c * vj + sn * pr.s * vi;
    }
  }

  int n_, L_;
  bool tied_;
  std::vector<AnsatzGate> gates_;
  std::vector<int> gate_gen_;
  std::vector<PauliMask> basis_;
  std::map<PauliMask, std::size_t> index_;
  std::vector<std::vector<Pair>> gen_pairs_;
  RealVector target_;
  double identity_offset_ = 0.0;
  std::vector<int> z_index_;
};

inline double vhd_cost(const PauliSum& h, const CartanAnsatz& a) {
  return VhdEngine(h, a.n, a.L, a.tied).cost(a);
}

struct VhdGradient {
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Analytic gradient from the adjoint sweep.
inline VhdGradient vhd_gradient(const PauliSum& h, const CartanAnsatz& a) {
  VhdGradient g;
  VhdEngine(h, a.n, a.L, a.tied).cost_and_gradient(a, &g.alpha, &g.beta);
  return g;
}

/// Dense reference gradient: parameter shift [C(a + pi/4) - C(a - pi/4)] for
/// alpha, closed-form quadratic derivative for beta.
inline VhdGradient vhd_gradient_shift(const PauliSum& h, const CartanAnsatz& a) {
  VhdGradient g;
  CartanAnsatz w = a;
  for (std::size_t k = 0; k < a.alpha.size(); ++k) {
    w.alpha[k] = a.alpha[k] + kPi / 4;
    const double cp = vhd_cost_dense(h, w);
    w.alpha[k] = a.alpha[k] - kPi / 4;
    const double cm = vhd_cost_dense(h, w);
    w.alpha[k] = a.alpha[k];
    g.alpha.push_back(cp - cm);
  }
  // dC/dbeta_mu = -2 Tr[(H - Hhat) W Z_mu W^dagger] / 2^n
  const Matrix H = pauli_sum_to_matrix(h);
  const Matrix W = ansatz_unitary(a);
  const Matrix R = H - W * pauli_sum_to_matrix(diagonal_model(a)) * W.adjoint();
  for (int mu = 1; mu <= a.n; ++mu) {
    const Matrix Z = pauli_string_to_matrix(PauliString::on_sites(1.0, a.n, {{mu, 'Z'}}));
    g.beta.push_back(-2.0 * (R * W * Z * W.adjoint()).trace().real() / double(H.rows()));
  }
  return g;
}

/// Standard ADAM with bias correction.
class Adam {
 public:
  explicit Adam(std::size_t dim, double lr = 0.1, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(b1), b2_(b2), eps_(eps), m_(dim, 0.0), v_(dim, 0.0) {}

  void set_learning_rate(double lr) { lr_ = lr; }

  void step(std::vector<double>& x, const std::vector<double>& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, double(t_)), c2 = 1.0 - std::pow(b2_, double(t_));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m_[i] = b1_ * m_[i] + (1 - b1_) * g[i];
      v_[i] = b2_ * v_[i] + (1 - b2_) * g[i] * g[i];
      x[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainConfig {
  double lr_alpha = 0.1;
  double lr_beta = 0.1;
  long max_iters = 100000;
  double stop_loss = 1e-14;
  int restarts = 10;
  std::uint64_t seed = 0;
  bool tied = false;
  long record_every = 1;  // loss-history stride
  double lr_decay = 1e-8;  // rate at max_iters relative to the initial rate; 1 keeps it constant

  /// Exponential schedule lr * lr_decay^(it / max_iters).
  double schedule(long it) const { return std::pow(lr_decay, double(it) / double(max_iters)); }

  void validate() const {
    if (!(lr_alpha > 0) || !(lr_beta > 0)) throw ValidationError("learning rates must be positive");
    if (!(lr_decay > 0) || lr_decay > 1) throw ValidationError("lr_decay must lie in (0, 1]");
    if (!(stop_loss > 0)) throw ValidationError("stop_loss must be positive");
    if (max_iters < 1 || restarts < 1 || record_every < 1) throw ValidationError("iteration counts must be positive");
  }
};

struct TrainRun {
  std::vector<std::pair<long, double>> loss_history;  // (iteration, loss)
  double final_loss = 0.0;
  long iterations = 0;
  bool converged = false;
  CartanAnsatz params;
};

struct TrainReport {
  std::vector<TrainRun> runs;
  double best_loss = 0.0;
  CartanAnsatz best_params;
  int converged_runs = 0;
  std::uint64_t seed = 0;
};

inline double max_abs_entry(const PauliSum& h) {
  if (h.num_qubits() <= dense_qubit_cap()) return max_abs(pauli_sum_to_matrix(h));
  double s = 0.0;
  for (const auto& t : h.terms()) s += std::abs(t.coefficient());
  return s;
}

/// One ADAM run from a random start drawn from stream (seed, run_id).
inline TrainRun vhd_train_run(const VhdEngine& eng, const TrainConfig& cfg, double beta_scale, int run_id) {
  Philox rng(cfg.seed, std::uint64_t(run_id));
  TrainRun run;
  run.params = CartanAnsatz(eng.n(), eng.L(), cfg.tied);
  for (auto& x : run.params.alpha) x = rng.uniform(0.0, 2.0 * kPi);
  for (auto& x : run.params.beta) x = rng.uniform(-beta_scale, beta_scale);
  Adam opt_a(run.params.alpha.size(), cfg.lr_alpha), opt_b(run.params.beta.size(), cfg.lr_beta);
  std::vector<double> ga, gb;
  double loss = 0.0;
  long it = 0;
  for (; it < cfg.max_iters; ++it) {
    loss = eng.cost_and_gradient(run.params, &ga, &gb);
    if (it % cfg.record_every == 0) run.loss_history.emplace_back(it, loss);
    if (loss < cfg.stop_loss) {
      run.converged = true;
      break;
    }
    const double f = cfg.schedule(it);
    opt_a.set_learning_rate(cfg.lr_alpha * f);
    opt_b.set_learning_rate(cfg.lr_beta * f);
    opt_a.step(run.params.alpha, ga);
    opt_b.step(run.params.beta, gb);
  }
  if (!run.converged) loss = eng.cost(run.params);
  if (run.loss_history.empty() || run.loss_history.back().first != it) run.loss_history.emplace_back(it, loss);
  run.final_loss = loss;
  run.iterations = it;
  return run;
}

inline TrainReport vhd_train(const PauliSum& h, int n, int L, const TrainConfig& cfg) {
  cfg.validate();
  const VhdEngine eng(h, n, L, cfg.tied);
  const double scale = max_abs_entry(h);
  TrainReport rep;
  rep.seed = cfg.seed;
  for (int r = 0; r < cfg.restarts; ++r) {
    rep.runs.push_back(vhd_train_run(eng, cfg, scale, r));
    const auto& run = rep.runs.back();
    rep.converged_runs += run.converged;
    if (r == 0 || run.final_loss < rep.best_loss) {
      rep.best_loss = run.final_loss;
      rep.best_params = run.params;
    }
  }
  return rep;
}

/// Max off-diagonal |(W^dagger H W)_{ij}|.
inline double offdiagonal_residual(const PauliSum& h, const CartanAnsatz& a) {
  const Matrix W = ansatz_unitary(a);
  Matrix M = W.adjoint() * pauli_sum_to_matrix(h) * W;
  M.diagonal().setZero();
  return max_abs(M);
}

/// Sorted (descending) spectrum of D(beta): sum_mu +-beta_mu over all sign patterns.
inline RealVector diagonal_spectrum(const CartanAnsatz& a) {
  const Eigen::Index d = Eigen::Index(1) << a.n;
  RealVector e(d);
  for (Eigen::Index s = 0; s < d; ++s) {
    double v = 0.0;
    for (int mu = 0; mu < a.n; ++mu) v += ((s >> (a.n - 1 - mu)) & 1) ? -a.beta[std::size_t(mu)] : a.beta[std::size_t(mu)];
    e(s) = v;
  }
  std::sort(e.data(), e.data() + d, std::greater<>());
  return e;
}

struct LieClosure {
  int dim = 0;
  bool truncated = false;
};

/// Dimension of the real Lie algebra generated by i*G for Pauli strings G,
/// by breadth-first closure under commutation with the generators.
inline LieClosure lie_closure_dim(const std::vector<PauliString>& generators, int max_dim = 1 << 20) {
  std::vector<PauliMask> gens;
  std::map<PauliMask, bool> seen;
  std::vector<PauliMask> queue;
  for (const auto& g : generators) {
    const PauliMask m = g.mask();
    if (m.is_identity()) continue;  // central
    if (seen.emplace(m, true).second) {
      gens.push_back(m);
      queue.push_back(m);
    }
  }
  LieClosure out;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (const auto& p : gens) {
      if (!anticommute(p, queue[i])) continue;
      const PauliMask r = multiply_masks(p, queue[i]);
      if (seen.emplace(r, true).second) {
        queue.push_back(r);
        if (int(queue.size()) > max_dim) {
          out.dim = int(queue.size());
          out.truncated = true;
          return out;
        }
      }
    }
  }
  out.dim = int(queue.size());
  return out;
}

/// History-state preparation through a trained diagonalization:
/// system psi0 -> W^dagger -> controlled e^{-i D eps 2^{j-1}} (per-qubit
/// controlled Z rotations) -> W, with Hadamards on the clock.
struct DiagonalizedHistoryBuilder {
  CartanAnsatz ansatz;
  int m = 0;
  double epsilon = 0.0;

  /// Refuses when the trained loss is above `threshold`.
  static DiagonalizedHistoryBuilder create(const CartanAnsatz& a, double trained_loss, double threshold, int m,
                                           double epsilon) {
    a.validate();
    if (!(trained_loss <= threshold)) {
      throw ValidationError("trained loss " + std::to_string(trained_loss) + " exceeds threshold " +
                            std::to_string(threshold));
    }
    return {a, m, epsilon};
  }

  /// Builds the register; `omit_final_w` skips the closing W (entanglement-only runs).
  Register build_register(const StateVector& psi0, bool omit_final_w = false) const {
    const int n = ansatz.n;
    if (psi0.num_qubits() != n) throw DimensionError("initial state width differs from ansatz");
    require_dense(n + m, "diagonalized history state");
    Register reg(StateVector::basis(m, 0).tensor(psi0));
    for (int j = 1; j <= m; ++j) reg.h(n + j - 1);
    append_ansatz(reg, ansatz, 0, true, "W");
    for (int j = 1; j <= m; ++j) {
      const double tau = epsilon * std::ldexp(1.0, j - 1);
      for (int mu = 1; mu <= n; ++mu) {
        // e^{-i beta Z tau} = Rz(2 beta tau) on qubit mu (bit n - mu)
        reg.controlled_1q(n + j - 1, n - mu, gates::rz(2.0 * ansatz.beta[std::size_t(mu - 1)] * tau), "cRz");
      }
    }
    if (!omit_final_w) append_ansatz(reg, ansatz, 0, false, "W");
    return reg;
  }

  HistoryState build(const StateVector& psi0, bool omit_final_w = false) const {
    const Register reg = build_register(psi0, omit_final_w);
    return {reg.state(), ansatz.n, m, epsilon, epsilon * std::ldexp(1.0, m)};
  }
};

}  // namespace qtime
