#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qtime/core/circuit.hpp"
#include "qtime/core/linalg.hpp"
#include "qtime/core/random.hpp"
#include "qtime/histstate.hpp"

namespace qtime {

enum class Mode { Exact, Sampled };

inline const char* to_string(Mode m) { return m == Mode::Exact ? "exact" : "sampled"; }

struct EstimatorConfig {
  Mode mode = Mode::Exact;
  long shots = 1024;  // per circuit cell in sampled mode
  std::uint64_t seed = 0;
  double delta_target = 0.01;

  void validate() const {
    if (mode == Mode::Sampled && shots < 1) throw ValidationError("sampled mode needs shots >= 1");
  }
};

struct EstimateResult {
  cplx value{0.0, 0.0};
  double std_error = 0.0;
  long shots_used = 0;
  Mode mode = Mode::Exact;
  std::uint64_t seed = 0;

  double real() const { return value.real(); }
};

namespace detail {

// Pure-state ensemble {(p_i, |i>)} of a density matrix.
inline std::vector<std::pair<double, Vector>> pure_ensemble(const DensityMatrix& rho, double floor = 1e-14) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  std::vector<std::pair<double, Vector>> out;
  for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
    if (es.eigenvalues()(i) > floor) out.emplace_back(es.eigenvalues()(i), es.eigenvectors().col(i));
  }
  return out;
}

// Number of ones among `shots` Bernoulli(p) draws.
inline long sample_ones(Philox& rng, double p, long shots) {
  long ones = 0;
  for (long s = 0; s < shots; ++s) ones += rng.uniform() < p;
  return ones;
}

// Inverse-CDF draw from a discrete distribution given its cumulative sums.
inline Eigen::Index sample_index(const std::vector<double>& cdf, Philox& rng) {
  const double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<Eigen::Index>(Eigen::Index(it - cdf.begin()), Eigen::Index(cdf.size()) - 1);
}

// Mean and variance of the mean of a +-1 valued sample from `ones` minus-ones.
struct PmOneStats {
  double mean;
  double var_of_mean;
};

inline PmOneStats pm_one_stats(long minus_ones, long shots) {
  const double p = double(minus_ones) / double(shots);
  const double mean = 1.0 - 2.0 * p;
  const double var = shots > 1 ? 4.0 * p * (1.0 - p) * double(shots) / double(shots - 1) : 1.0;
  return {mean, var / double(shots)};
}

// Hadamard-test combiner: accumulates c * (x + i y) for per-cell estimates.
struct ComplexAccumulator {
  cplx value{0.0, 0.0};
  double var = 0.0;
  long shots = 0;

  void add(cplx c, double x, double vx, double y, double vy) {
    value += c * cplx(x, y);
    var += std::norm(c) * (vx + vy);
  }
};

}  // namespace detail

/// Terms of a Pauli sum as (coefficient, letters).
inline std::vector<std::pair<cplx, std::string>> pauli_terms(const PauliSum& o) {
  std::vector<std::pair<cplx, std::string>> out;
  for (const auto& t : o.terms()) out.emplace_back(t.coefficient(), t.letters());
  return out;
}

/// F~(O1,O2,w) = (1/N) sum_t e^{-i w eps t} Tr[rho U^dagger O1 U O2], evaluated directly.
inline cplx F_tilde_direct(const Spectrum& spec, const DensityMatrix& rho0, const Matrix& O1, const Matrix& O2,
                           double omega, long long N, double epsilon) {
  cplx acc{0.0, 0.0};
  for (long long t = 0; t < N; ++t) {
    const Matrix U = propagator(spec, epsilon * double(t));
    acc += std::exp(-kI * (omega * epsilon * double(t))) * (rho0.matrix() * U.adjoint() * O1 * U * O2).trace();
  }
  return acc / double(N);
}

// ---------------------------------------------------------------------------
// Sequential F~: Hadamard test per (t, term pair, branch).
// Layout: system on bits [0, n), ancilla on bit n.

/// Probability that the ancilla of the sequential Hadamard test reads 0.
inline double F_sequential_p0(const Matrix& U, const std::string& p1, const std::string& p2, bool imag_branch,
                              const std::vector<std::pair<double, Vector>>& ensemble, GateLog* log = nullptr) {
  double p0 = 0.0;
  for (const auto& [w, v] : ensemble) {
    const int n = StateVector::qubits_for_length(v.size());
    Register reg(StateVector::basis(1, 0).tensor(StateVector(v)));
    reg.h(n);
    if (imag_branch) reg.s_dag(n);
    reg.controlled_pauli(n, 0, p2, "cO2");
    reg.apply_block(0, U, "U");
    reg.controlled_pauli(n, 0, p1, "cO1");
    reg.h(n);
    p0 += w * (1.0 - reg.prob_one(n));
    if (log) *log = reg.log();
  }
  return p0;
}

inline EstimateResult estimate_F_sequential(const Spectrum& spec, const DensityMatrix& rho0, const PauliSum& O1,
                                            const PauliSum& O2, double omega, long long N, double epsilon,
                                            const EstimatorConfig& cfg) {
  cfg.validate();
  const int n = rho0.num_qubits();
  if (O1.num_qubits() != n || O2.num_qubits() != n) throw DimensionError("observable width differs from state");
  if (N < 1) throw ValidationError("N must be >= 1");
  require_dense(n + 1, "estimate_F_sequential");
  const auto ens = detail::pure_ensemble(rho0);
  const auto t1 = pauli_terms(O1), t2 = pauli_terms(O2);
  detail::ComplexAccumulator acc;
  std::uint64_t cell = 0;
  for (long long t = 0; t < N; ++t) {
    const Matrix U = propagator(spec, epsilon * double(t));
    const cplx phase = std::exp(-kI * (omega * epsilon * double(t))) / double(N);
    for (const auto& [a, p1] : t1) {
      for (const auto& [b, p2] : t2) {
        std::array<double, 2> mean{}, var{};
        for (int branch = 0; branch < 2; ++branch, ++cell) {
          const double p0 = F_sequential_p0(U, p1, p2, branch == 1, ens);
          if (cfg.mode == Mode::Exact) {
            mean[std::size_t(branch)] = 2.0 * p0 - 1.0;
          } else {
            Philox rng(cfg.seed, cell);
            const auto st = detail::pm_one_stats(detail::sample_ones(rng, 1.0 - p0, cfg.shots), cfg.shots);
            mean[std::size_t(branch)] = st.mean;
            var[std::size_t(branch)] = st.var_of_mean;
            acc.shots += cfg.shots;
          }
        }
        acc.add(phase * a * b, mean[0], var[0], mean[1], var[1]);
      }
    }
  }
  return {acc.value, std::sqrt(acc.var), acc.shots, cfg.mode, cfg.seed};
}

// ---------------------------------------------------------------------------
// Parallel F~: one Hadamard test over the history-state register.
// Layout: system [0, n), clock [n, n+m), ancilla n+m.

inline Register build_F_parallel_circuit(const Spectrum& spec, const Vector& psi, const std::string& p1,
                                         const std::string& p2, double omega, int m, double epsilon,
                                         bool imag_branch) {
  const int n = StateVector::qubits_for_length(psi.size());
  const int anc = n + m;
  Register reg(StateVector::basis(m + 1, 0).tensor(StateVector(psi)));
  reg.h(anc);
  if (imag_branch) reg.s_dag(anc);
  reg.controlled_pauli(anc, 0, p2, "cO2");
  append_history_circuit(reg, spec, n, m, epsilon);
  reg.controlled_pauli(anc, 0, p1, "cO1");
  for (int j = 1; j <= m; ++j) {
    reg.controlled_1q(anc, n + j - 1, gates::phase(-omega * epsilon * std::ldexp(1.0, j - 1)), "cP");
  }
  reg.h(anc);
  return reg;
}

inline EstimateResult estimate_F_parallel(const Spectrum& spec, const DensityMatrix& rho0, const PauliSum& O1,
                                          const PauliSum& O2, double omega, int m, double epsilon,
                                          const EstimatorConfig& cfg) {
  cfg.validate();
  const int n = rho0.num_qubits();
  if (O1.num_qubits() != n || O2.num_qubits() != n) throw DimensionError("observable width differs from state");
  require_dense(n + m + 1, "estimate_F_parallel");
  const auto ens = detail::pure_ensemble(rho0);
  detail::ComplexAccumulator acc;
  std::uint64_t cell = 0;
  for (const auto& [a, p1] : pauli_terms(O1)) {
    for (const auto& [b, p2] : pauli_terms(O2)) {
      std::array<double, 2> mean{}, var{};
      for (int branch = 0; branch < 2; ++branch, ++cell) {
        double p0 = 0.0;
        for (const auto& [w, v] : ens) {
          const Register reg = build_F_parallel_circuit(spec, v, p1, p2, omega, m, epsilon, branch == 1);
          p0 += w * (1.0 - reg.prob_one(n + m));
        }
        if (cfg.mode == Mode::Exact) {
          mean[std::size_t(branch)] = 2.0 * p0 - 1.0;
        } else {
          Philox rng(cfg.seed, cell);
          const auto st = detail::pm_one_stats(detail::sample_ones(rng, 1.0 - p0, cfg.shots), cfg.shots);
          mean[std::size_t(branch)] = st.mean;
          var[std::size_t(branch)] = st.var_of_mean;
          acc.shots += cfg.shots;
        }
      }
      acc.add(a * b, mean[0], var[0], mean[1], var[1]);
    }
  }
  return {acc.value, std::sqrt(acc.var), acc.shots, cfg.mode, cfg.seed};
}

// ---------------------------------------------------------------------------
// Bell-basis overlap. For each qubit pair (a, b): CNOT a->b, H a; the SWAP
// eigenvalue of an outcome is (-1)^{# pairs with both bits 1}.

inline void append_bell_measurement(Register& reg, const std::vector<std::pair<int, int>>& pairs) {
  for (auto [a, b] : pairs) {
    reg.cnot(a, b);
    reg.h(a);
  }
}

inline std::uint64_t pair_mask(const std::vector<std::pair<int, int>>& pairs, bool first) {
  std::uint64_t m = 0;
  for (auto [a, b] : pairs) m |= std::uint64_t{1} << (first ? a : b);
  return m;
}

inline double swap_sign(std::uint64_t outcome, const std::vector<std::pair<int, int>>& pairs) {
  int parity = 0;
  for (auto [a, b] : pairs) parity ^= int((outcome >> a) & (outcome >> b) & 1);
  return parity ? -1.0 : 1.0;
}

struct OverlapStats {
  double mean = 0.0;
  double var_of_mean = 0.0;
};

/// <SWAP> on the paired wires, exactly or from `shots` sampled outcomes.
inline OverlapStats bell_overlap(const Register& reg, const std::vector<std::pair<int, int>>& pairs, Mode mode,
                                 long shots, Philox& rng) {
  const RealVector probs = reg.probabilities();
  if (mode == Mode::Exact) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) s += probs(i) * swap_sign(std::uint64_t(i), pairs);
    return {s, 0.0};
  }
  std::vector<double> cdf(std::size_t(probs.size()));
  double run = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) cdf[std::size_t(i)] = (run += probs(i));
  long minus = 0;
  for (long s = 0; s < shots; ++s) minus += swap_sign(std::uint64_t(detail::sample_index(cdf, rng)), pairs) < 0;
  const auto st = detail::pm_one_stats(minus, shots);
  return {st.mean, st.var_of_mean};
}

/// Qubit pairs matching letter q of block A (at a_lo) with letter q of block B (at b_lo).
inline std::vector<std::pair<int, int>> block_pairs(int a_lo, int b_lo, int width) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < width; ++i) out.emplace_back(a_lo + i, b_lo + i);
  return out;
}

/// Sequential Loschmidt: per t >= 1 prepare psi0 (x) U(eps t) psi0 and measure
/// the overlap; the t = 0 term is 1. Layout: copy A [n, 2n), copy B [0, n).
inline EstimateResult estimate_loschmidt_sequential(const Spectrum& spec, const StateVector& psi0, long long N,
                                                    double epsilon, const EstimatorConfig& cfg) {
  cfg.validate();
  const int n = psi0.num_qubits();
  if (N < 1) throw ValidationError("N must be >= 1");
  require_dense(2 * n, "estimate_loschmidt_sequential");
  const auto pairs = block_pairs(n, 0, n);
  double sum = 1.0, var = 0.0;
  long shots = 0;
  for (long long t = 1; t < N; ++t) {
    const StateVector evolved = StateVector::normalized(propagator(spec, epsilon * double(t)) * psi0.amplitudes());
    Register reg(psi0.tensor(evolved));
    append_bell_measurement(reg, pairs);
    Philox rng(cfg.seed, std::uint64_t(t));
    const auto st = bell_overlap(reg, pairs, cfg.mode, cfg.shots, rng);
    sum += st.mean;
    var += st.var_of_mean;
    if (cfg.mode == Mode::Sampled) shots += cfg.shots;
  }
  const double Nd = double(N);
  return {cplx(sum / Nd, 0.0), std::sqrt(var) / Nd, shots, cfg.mode, cfg.seed};
}

/// Parallel Loschmidt: history state (x) psi0 with the overlap measured between
/// the system block and the reference copy. Layout: reference [0, n),
/// system [n, 2n), clock [2n, 2n+m).
inline EstimateResult estimate_loschmidt_parallel(const Spectrum& spec, const StateVector& psi0, int m,
                                                  double epsilon, const EstimatorConfig& cfg,
                                                  GateLog* log = nullptr) {
  cfg.validate();
  const int n = psi0.num_qubits();
  require_dense(2 * n + m, "estimate_loschmidt_parallel");
  Register reg(StateVector::basis(m, 0).tensor(psi0).tensor(psi0));
  append_history_circuit(reg, spec, n, m, epsilon, n, 2 * n);
  const auto pairs = block_pairs(n, 0, n);
  append_bell_measurement(reg, pairs);
  if (log) *log = reg.log();
  Philox rng(cfg.seed, 0);
  const auto st = bell_overlap(reg, pairs, cfg.mode, cfg.shots, rng);
  return {cplx(st.mean, 0.0), std::sqrt(st.var_of_mean), cfg.mode == Mode::Sampled ? cfg.shots : 0, cfg.mode,
          cfg.seed};
}

/// Tr[rho_T^2] from two copies of the history state with the overlap measured
/// on the clock blocks. Layout: copy B [0, n+m), copy A [n+m, 2(n+m)).
inline EstimateResult estimate_purity_overlap(const HistoryState& psi, const EstimatorConfig& cfg) {
  cfg.validate();
  const int w = psi.n + psi.m;
  require_dense(2 * w, "estimate_purity_overlap");
  if (psi.m == 0) return {cplx(1.0, 0.0), 0.0, 0, cfg.mode, cfg.seed};
  Register reg(psi.state.tensor(psi.state));
  const auto pairs = block_pairs(w + psi.n, psi.n, psi.m);
  append_bell_measurement(reg, pairs);
  Philox rng(cfg.seed, 0);
  const auto st = bell_overlap(reg, pairs, cfg.mode, cfg.shots, rng);
  return {cplx(st.mean, 0.0), std::sqrt(st.var_of_mean), cfg.mode == Mode::Sampled ? cfg.shots : 0, cfg.mode,
          cfg.seed};
}

// ---------------------------------------------------------------------------
// Classical shadows of the clock marginal with random single-qubit Cliffords.

/// The 24 single-qubit Cliffords modulo phase, generated from H and S.
inline const std::vector<Matrix>& clifford_group() {
  static const std::vector<Matrix> group = [] {
    Matrix S = Matrix::Zero(2, 2);
    S(0, 0) = 1.0;
    S(1, 1) = kI;
    const Matrix H = gates::h();
    auto canonical = [](Matrix u) {
      // fix the global phase by making the first nonzero entry real positive
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (std::abs(u(i)) > 1e-9) {
          u *= std::conj(u(i)) / std::abs(u(i));
          break;
        }
      }
      return u;
    };
    std::vector<Matrix> out{Matrix::Identity(2, 2)};
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (const Matrix* g : std::array<const Matrix*, 2>{&H, &S}) {
        const Matrix c = canonical(*g * out[k]);
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Matrix& x) { return (x - c).norm() < 1e-9; });
        if (!seen) out.push_back(c);
      }
    }
    return out;
  }();
  return group;
}

/// Bloch vector of U^dagger |b><b| U for Clifford index u and outcome bit b.
inline std::array<int, 3> shadow_axis(int u, int b) {
  static const auto table = [] {
    std::vector<std::array<std::array<int, 3>, 2>> t;
    Matrix X = Matrix::Zero(2, 2), Y = Matrix::Zero(2, 2), Z = Matrix::Zero(2, 2);
    X(0, 1) = X(1, 0) = 1.0;
    Y(0, 1) = -kI;
    Y(1, 0) = kI;
    Z(0, 0) = 1.0;
    Z(1, 1) = -1.0;
    for (const auto& U : clifford_group()) {
      std::array<std::array<int, 3>, 2> row{};
      for (int bit = 0; bit < 2; ++bit) {
        const Vector v = U.adjoint().col(bit);
        const Matrix* paulis[3] = {&X, &Y, &Z};
        for (int a = 0; a < 3; ++a) row[std::size_t(bit)][std::size_t(a)] = int(std::lround(v.dot(*paulis[a] * v).real()));
      }
      t.push_back(row);
    }
    return t;
  }();
  return table[std::size_t(u)][std::size_t(b)];
}

struct ShadowSnapshot {
  std::vector<int> unitary_choice;  // per clock qubit, index into clifford_group()
  std::vector<int> outcome_bits;    // per clock qubit
};

/// Draw K snapshots of an m-qubit density matrix. Qubit j (1-based) of the
/// snapshot is bit j-1 of the matrix index.
inline std::vector<ShadowSnapshot> draw_shadows(const DensityMatrix& rho, long K, Philox& rng) {
  const int m = rho.num_qubits();
  const Eigen::Index d = rho.dim();
  const auto& G = clifford_group();
  std::vector<ShadowSnapshot> out;
  out.reserve(std::size_t(K));
  std::vector<double> cdf(static_cast<std::size_t>(d));
  for (long k = 0; k < K; ++k) {
    ShadowSnapshot s;
    Matrix U = Matrix::Identity(1, 1);
    for (int j = m; j >= 1; --j) {  // most significant qubit first in the Kronecker product
      const int c = int(rng.below(G.size()));
      s.unitary_choice.insert(s.unitary_choice.begin(), c);
      U = kron(U, G[std::size_t(c)]);
    }
    const Matrix r = U * rho.matrix() * U.adjoint();
    double run = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) cdf[std::size_t(i)] = (run += std::max(0.0, r(i, i).real()));
    const auto b = std::uint64_t(detail::sample_index(cdf, rng));
    for (int j = 1; j <= m; ++j) s.outcome_bits.push_back(int((b >> (j - 1)) & 1));
    out.push_back(std::move(s));
  }
  return out;
}

/// Per-qubit kernel Tr[(3|u><u| - I)(3|v><v| - I)] = (1 + 9 r.s) / 2.
inline double shadow_pair_kernel(const ShadowSnapshot& a, const ShadowSnapshot& b) {
  double k = 1.0;
  for (std::size_t j = 0; j < a.unitary_choice.size(); ++j) {
    const auto r = shadow_axis(a.unitary_choice[j], a.outcome_bits[j]);
    const auto s = shadow_axis(b.unitary_choice[j], b.outcome_bits[j]);
    k *= 0.5 * (1.0 + 9.0 * (r[0] * s[0] + r[1] * s[1] + r[2] * s[2]));
  }
  return k;
}

namespace detail {

// Feature map with Tr[rho_i rho_j] = <Phi_i, Phi_j> / 2^m, Phi = (x)_q (1, 3 r_q).
inline std::vector<RealVector> shadow_features(const std::vector<ShadowSnapshot>& snaps) {
  std::vector<RealVector> out;
  out.reserve(snaps.size());
  for (const auto& s : snaps) {
    RealVector phi = RealVector::Ones(1);
    for (std::size_t j = 0; j < s.unitary_choice.size(); ++j) {
      const auto r = shadow_axis(s.unitary_choice[j], s.outcome_bits[j]);
      RealVector next(phi.size() * 4);
      for (Eigen::Index i = 0; i < phi.size(); ++i) {
        next(4 * i) = phi(i);
        for (int a = 0; a < 3; ++a) next(4 * i + 1 + a) = 3.0 * r[std::size_t(a)] * phi(i);
      }
      phi = std::move(next);
    }
    out.push_back(std::move(phi));
  }
  return out;
}

// U-statistic with integer multiplicities c_i (all ones for the plain
// estimator). Pairs of copies of the same snapshot are excluded.
inline double weighted_u_statistic(const std::vector<RealVector>& phi, const std::vector<double>& c, int m) {
  RealVector S = RealVector::Zero(phi.front().size());
  double diag = 0.0, total = 0.0, ties = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (c[i] == 0.0) continue;
    S += c[i] * phi[i];
    diag += c[i] * c[i] * phi[i].squaredNorm();
    total += c[i];
    ties += c[i] * c[i];
  }
  return (S.squaredNorm() - diag) / (std::ldexp(1.0, m) * (total * total - ties));
}

}  // namespace detail

/// (1/(K(K-1))) sum_{i != j} Tr[rho_i rho_j], evaluated pair by pair.
inline double shadow_purity_pairwise(const std::vector<ShadowSnapshot>& snaps) {
  const std::size_t K = snaps.size();
  double s = 0.0;
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j)
      if (i != j) s += shadow_pair_kernel(snaps[i], snaps[j]);
  return s / (double(K) * double(K - 1));
}

struct ShadowOptions {
  bool median_of_means = false;
  int batches = 10;
  int bootstrap = 200;
};

/// Purity U-statistic from snapshots with a bootstrap standard error.
inline EstimateResult shadow_purity_estimate(const std::vector<ShadowSnapshot>& snaps, int m, std::uint64_t seed,
                                             const ShadowOptions& opt = {}) {
  const std::size_t K = snaps.size();
  if (K < 2) throw ValidationError("shadow purity needs at least two snapshots");
  const auto phi = detail::shadow_features(snaps);
  auto estimate = [&](const std::vector<double>& c) {
    if (!opt.median_of_means) return detail::weighted_u_statistic(phi, c, m);
    const int B = std::max(1, std::min<int>(opt.batches, int(K / 2)));
    std::vector<double> means;
    for (int b = 0; b < B; ++b) {
      std::vector<double> cb(K, 0.0);
      for (std::size_t i = std::size_t(b); i < K; i += std::size_t(B)) cb[i] = c[i];
      if (std::count_if(cb.begin(), cb.end(), [](double x) { return x > 0.0; }) >= 2)
        means.push_back(detail::weighted_u_statistic(phi, cb, m));
    }
    std::nth_element(means.begin(), means.begin() + long(means.size() / 2), means.end());
    return means[means.size() / 2];
  };
  const std::vector<double> ones(K, 1.0);
  const double value = estimate(ones);
  Philox rng(seed, 1);
  double s1 = 0.0, s2 = 0.0;
  for (int b = 0; b < opt.bootstrap; ++b) {
    std::vector<double> c(K, 0.0);
    for (std::size_t i = 0; i < K; ++i) c[rng.below(K)] += 1.0;
    const double v = estimate(c);
    s1 += v;
    s2 += v * v;
  }
  const double B = double(opt.bootstrap);
  const double var = opt.bootstrap > 1 ? std::max(0.0, (s2 - s1 * s1 / B) / (B - 1.0)) : 0.0;
  return {cplx(value, 0.0), std::sqrt(var), long(K), Mode::Sampled, seed};
}

/// Tr[rho_T^2] of a history state from K classical-shadow snapshots of the clock.
inline EstimateResult estimate_purity_shadows(const HistoryState& psi, long K, std::uint64_t seed,
                                              const ShadowOptions& opt = {}) {
  if (K < 2) throw ValidationError("shadow purity needs K >= 2");
  const DensityMatrix rho_T = partial_trace(psi.state, psi.m, psi.n, Keep::A);
  Philox rng(seed, 0);
  const auto snaps = draw_shadows(rho_T, K, rng);
  return shadow_purity_estimate(snaps, psi.m, seed, opt);
}

}  // namespace qtime
