#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qtime/core/circuit.hpp"
#include "qtime/core/types.hpp"

namespace qtime {

/// Trotterized gate-count model: l local terms, error exponent alpha_exp,
/// control overhead factor beta, prefactor gamma.
struct GateCountModel {
  double gamma = 1.0;
  double beta = 2.0;
  double l = 1.0;
  double alpha_exp = 1.0;
  double epsilon = 1.0;
  long long N = 2;

  void validate() const {
    if (!(gamma > 0 && beta > 0 && l > 0 && alpha_exp > 0 && epsilon > 0)) {
      throw ValidationError("gate-count model parameters must be positive");
    }
    if (N < 2 || !is_power_of_two(N)) throw ValidationError("N must be a power of two >= 2");
  }
};

struct DepthReport {
  double seq_total = 0.0;
  double par_total = 0.0;
  double ratio = 0.0;  // par / seq
  long long crossover_N = 0;
};

/// seq = gamma l sum_{t=1}^{N-1} (eps t)^a
inline double sequential_count(const GateCountModel& m) {
  double s = 0.0;
  for (long long t = 1; t < m.N; ++t) s += std::pow(m.epsilon * double(t), m.alpha_exp);
  return m.gamma * m.l * s;
}

/// par = gamma beta l^2 sum_{j=0}^{log N - 1} (eps 2^j)^a
inline double parallel_count(const GateCountModel& m) {
  double s = 0.0;
  const int logN = log2_exact(m.N);
  for (int j = 0; j < logN; ++j) s += std::pow(m.epsilon * std::ldexp(1.0, j), m.alpha_exp);
  return m.gamma * m.beta * m.l * m.l * s;
}

/// Smallest power-of-two N >= 2 with par <= seq (ties count as parallel winning).
inline long long crossover(GateCountModel m, long long max_N = 1LL << 40) {
  m.validate();
  for (long long N = 2; N <= max_N; N *= 2) {
    m.N = N;
    const double seq = sequential_count(m), par = parallel_count(m);
    if (par <= seq * (1.0 + 1e-12)) return N;
  }
  return 0;
}

inline DepthReport trotter_counts(const GateCountModel& m) {
  m.validate();
  DepthReport r;
  r.seq_total = sequential_count(m);
  r.par_total = parallel_count(m);
  r.ratio = r.par_total / r.seq_total;
  r.crossover_N = crossover(m);
  return r;
}

/// Gate budget of the diagonalized history-state circuit.
struct DiagonalizedCounts {
  long controlled_rotations = 0;
  long w_gates = 0;
  long hadamards = 0;
  long total() const { return controlled_rotations + w_gates + hadamards; }
};

/// m n controlled single-qubit rotations + 2 w ansatz gates + m Hadamards;
/// the closing W is dropped in entanglement-only runs.
inline DiagonalizedCounts diagonalized_counts(int n, int m_clock, long w_gate_count, bool entanglement_only = false) {
  if (n < 1 || m_clock < 0 || w_gate_count < 0) throw ValidationError("invalid diagonalized-count arguments");
  DiagonalizedCounts c;
  c.controlled_rotations = long(m_clock) * n;
  c.w_gates = (entanglement_only ? 1 : 2) * w_gate_count;
  c.hadamards = m_clock;
  return c;
}

// Expected gate-log tallies of the circuit families the simulator builds.

/// Clock Hadamards plus one controlled evolution per clock qubit.
inline GateCounts history_circuit_counts(int n, int m) {
  GateCounts c;
  c.one_qubit = m;
  (n == 1 ? c.controlled_one_qubit : c.controlled_multi) = m;
  return c;
}

inline GateCounts diagonalized_circuit_counts(int n, int m, long w_gate_count, bool entanglement_only = false) {
  const auto d = diagonalized_counts(n, m, w_gate_count, entanglement_only);
  GateCounts c;
  c.one_qubit = d.hadamards;
  c.two_qubit = d.w_gates;
  c.controlled_one_qubit = d.controlled_rotations;
  return c;
}

/// History skeleton plus 2 ancilla Hadamards (and S^dagger on the imaginary
/// branch), two controlled Paulis of the given weights, and m controlled phases.
inline GateCounts f_parallel_circuit_counts(int n, int m, int weight_O1, int weight_O2, bool imag_branch) {
  GateCounts c = history_circuit_counts(n, m);
  c.one_qubit += 2 + (imag_branch ? 1 : 0);
  for (int w : {weight_O1, weight_O2}) (w <= 1 ? c.controlled_one_qubit : c.controlled_multi) += 1;
  c.controlled_one_qubit += m;
  return c;
}

/// History skeleton plus a Bell measurement on n pairs (CNOT + H each).
inline GateCounts loschmidt_parallel_circuit_counts(int n, int m) {
  GateCounts c = history_circuit_counts(n, m);
  c.controlled_one_qubit += n;
  c.one_qubit += n;
  return c;
}

struct DepthRow {
  std::string model;
  int logN = 0;
  long long N = 0;
  double seq_total = 0.0;
  double par_total = 0.0;
  double ratio = 0.0;
  long long crossover_N = 0;
};

inline std::string format_depth_csv(const std::vector<DepthRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "model,logN,N,seq_total,par_total,ratio,crossover_N\n";
  for (const auto& r : rows)
    os << r.model << ',' << r.logN << ',' << r.N << ',' << r.seq_total << ',' << r.par_total << ',' << r.ratio << ','
       << r.crossover_N << '\n';
  return os.str();
}

inline std::string format_depth_markdown(const std::vector<DepthRow>& rows) {
  std::ostringstream os;
  os.precision(6);
  os << "| model | logN | N | seq | par | par/seq | N* |\n|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    os << "| " << r.model << " | " << r.logN << " | " << r.N << " | " << r.seq_total << " | " << r.par_total << " | "
       << r.ratio << " | " << r.crossover_N << " |\n";
  return os.str();
}

}  // namespace qtime
