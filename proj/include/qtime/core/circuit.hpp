#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qtime/core/linalg.hpp"
#include "qtime/core/pauli.hpp"

namespace qtime {

enum class GateClass { OneQubit, TwoQubit, MultiQubit, ControlledOneQubit, ControlledMulti };

inline const char* to_string(GateClass c) {
  switch (c) {
    case GateClass::OneQubit: return "1q";
    case GateClass::TwoQubit: return "2q";
    case GateClass::MultiQubit: return "multi";
    case GateClass::ControlledOneQubit: return "controlled-1q";
    default: return "controlled-multi";
  }
}

struct GateRecord {
  GateClass cls;
  std::string label;
  std::vector<int> wires;  // bit positions, control first
};

struct GateCounts {
  long one_qubit = 0;
  long two_qubit = 0;
  long multi_qubit = 0;
  long controlled_one_qubit = 0;
  long controlled_multi = 0;

  long total() const { return one_qubit + two_qubit + multi_qubit + controlled_one_qubit + controlled_multi; }
  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

class GateLog {
 public:
  void record(GateClass cls, std::string label, std::vector<int> wires) {
    records_.push_back({cls, std::move(label), std::move(wires)});
  }
  const std::vector<GateRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  long count_label(const std::string& label) const {
    long c = 0;
    for (const auto& r : records_) c += (r.label == label);
    return c;
  }

 private:
  std::vector<GateRecord> records_;
};

/// Tally a gate log by class.
inline GateCounts audit_gate_log(const GateLog& log) {
  GateCounts c;
  for (const auto& r : log.records()) {
    switch (r.cls) {
      case GateClass::OneQubit: ++c.one_qubit; break;
      case GateClass::TwoQubit: ++c.two_qubit; break;
      case GateClass::MultiQubit: ++c.multi_qubit; break;
      case GateClass::ControlledOneQubit: ++c.controlled_one_qubit; break;
      case GateClass::ControlledMulti: ++c.controlled_multi; break;
    }
  }
  return c;
}

namespace gates {

inline Matrix h() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m << s, s, s, -s;
  return m;
}
inline Matrix x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix s_dag() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -kI;
  return m;
}
inline Matrix phase(double phi) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = std::exp(kI * phi);
  return m;
}
/// e^{-i theta Z / 2}
inline Matrix rz(double theta) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(-kI * (theta / 2));
  m(1, 1) = std::exp(kI * (theta / 2));
  return m;
}

}  // namespace gates

/// Mutable state-vector register with a gate log. Wires are bit positions
/// (0 = least significant) of the computational index.
class Register {
 public:
  explicit Register(const StateVector& initial) : amps_(initial.amplitudes()), q_(initial.num_qubits()) {
    require_dense(q_, "Register");
  }

  int num_qubits() const { return q_; }
  const Vector& amplitudes() const { return amps_; }
  Vector& mutable_amplitudes() { return amps_; }
  const GateLog& log() const { return log_; }

  StateVector state() const { return StateVector::normalized(amps_); }

  void apply_1q(int wire, const Matrix& u, std::string label) {
    check_wire(wire);
    apply_block_raw(-1, wire, u);
    log_.record(GateClass::OneQubit, std::move(label), {wire});
  }

  void h(int wire) { apply_1q(wire, gates::h(), "H"); }
  void s_dag(int wire) { apply_1q(wire, gates::s_dag(), "Sdg"); }

  /// Uncontrolled unitary on the contiguous block [lo, lo+k).
  void apply_block(int lo, const Matrix& u, std::string label) {
    const int k = block_width(u);
    for (int w = lo; w < lo + k; ++w) check_wire(w);
    apply_block_raw(-1, lo, u);
    std::vector<int> wires;
    for (int w = lo; w < lo + k; ++w) wires.push_back(w);
    log_.record(uncontrolled_class(k), std::move(label), std::move(wires));
  }

  /// Controlled unitary on the contiguous block [lo, lo+k).
  void controlled_block(int control, int lo, const Matrix& u, std::string label) {
    const int k = block_width(u);
    check_wire(control);
    for (int w = lo; w < lo + k; ++w) check_wire(w);
    if (control >= lo && control < lo + k) throw WiringError("control overlaps the target block");
    apply_block_raw(control, lo, u);
    std::vector<int> wires{control};
    for (int w = lo; w < lo + k; ++w) wires.push_back(w);
    log_.record(k == 1 ? GateClass::ControlledOneQubit : GateClass::ControlledMulti, std::move(label),
                std::move(wires));
  }

  void controlled_1q(int control, int target, const Matrix& u, std::string label) {
    controlled_block(control, target, u, std::move(label));
  }

  /// e^{i theta P} for a Pauli string laid over bits [lo, lo+letters.size()),
  /// letter 0 on the most significant bit of the block.
  void pauli_rotation(int lo, const std::string& letters, double theta, std::string label) {
    const int k = int(letters.size());
    for (int w = lo; w < lo + k; ++w) check_wire(w);
    const auto act = shifted_action(lo, letters);
    const double c = std::cos(theta), s = std::sin(theta);
    Vector out = c * amps_;
    for (Eigen::Index i = 0; i < amps_.size(); ++i) {
      const std::uint64_t b = std::uint64_t(i);
      const double sign = (std::popcount(b & act.zbits) & 1) ? -1.0 : 1.0;
      out(Eigen::Index(b ^ act.xbits)) += kI * s * act.base_phase * sign * amps_(i);
    }
    amps_ = std::move(out);
    std::vector<int> wires;
    for (int q = 0; q < k; ++q)
      if (letters[std::size_t(q)] != 'I') wires.push_back(lo + k - 1 - q);
    const GateClass cls = uncontrolled_class(int(wires.size()));
    log_.record(cls, std::move(label), std::move(wires));
  }

  /// Controlled Pauli string over bits [lo, lo+letters.size()); the
  /// coefficient is ignored. Identity letters are not counted as targets.
  void controlled_pauli(int control, int lo, const std::string& letters, std::string label) {
    const int k = int(letters.size());
    check_wire(control);
    for (int w = lo; w < lo + k; ++w) check_wire(w);
    if (control >= lo && control < lo + k) throw WiringError("control overlaps the target block");
    const auto act = shifted_action(lo, letters);
    const std::uint64_t cbit = std::uint64_t{1} << control;
    Vector out = amps_;
    for (Eigen::Index i = 0; i < amps_.size(); ++i) {
      const std::uint64_t b = std::uint64_t(i);
      if (!(b & cbit)) continue;
      const double sign = (std::popcount(b & act.zbits) & 1) ? -1.0 : 1.0;
      out(Eigen::Index(b ^ act.xbits)) = act.base_phase * sign * amps_(i);
    }
    amps_ = std::move(out);
    std::vector<int> wires{control};
    for (int q = 0; q < k; ++q)
      if (letters[std::size_t(q)] != 'I') wires.push_back(lo + k - 1 - q);
    const GateClass cls = wires.size() <= 2 ? GateClass::ControlledOneQubit : GateClass::ControlledMulti;
    log_.record(cls, std::move(label), std::move(wires));
  }

  void cnot(int control, int target) { controlled_block(control, target, gates::x(), "CNOT"); }

  /// Outcome probabilities over the full computational basis.
  RealVector probabilities() const { return amps_.cwiseAbs2(); }

  /// Marginal probability that `wire` reads 1.
  double prob_one(int wire) const {
    check_wire(wire);
    double p = 0.0;
    const std::uint64_t bit = std::uint64_t{1} << wire;
    for (Eigen::Index i = 0; i < amps_.size(); ++i)
      if (std::uint64_t(i) & bit) p += std::norm(amps_(i));
    return p;
  }

 private:
  static GateClass uncontrolled_class(int k) {
    return k <= 1 ? GateClass::OneQubit : (k == 2 ? GateClass::TwoQubit : GateClass::MultiQubit);
  }

  static int block_width(const Matrix& u) {
    if (u.rows() != u.cols() || !is_power_of_two(u.rows())) throw DimensionError("gate must be 2^k square");
    return log2_exact(u.rows());
  }

  void check_wire(int w) const {
    if (w < 0 || w >= q_) throw WiringError("wire " + std::to_string(w) + " out of range");
  }

  detail::PauliAction shifted_action(int lo, const std::string& letters) const {
    auto act = detail::pauli_action(letters);
    act.xbits <<= lo;
    act.zbits <<= lo;
    return act;
  }

  void apply_block_raw(int control, int lo, const Matrix& u) {
    const Eigen::Index kd = u.rows();
    const int k = log2_exact(kd);
    const std::uint64_t block_mask = ((std::uint64_t{1} << k) - 1) << lo;
    const std::uint64_t cbit = control >= 0 ? (std::uint64_t{1} << control) : 0;
    Vector buf(kd);
    for (std::uint64_t base = 0; base < std::uint64_t(amps_.size()); ++base) {
      if ((base & block_mask) != 0 || (base & cbit) != cbit) continue;
      for (Eigen::Index j = 0; j < kd; ++j) buf(j) = amps_(Eigen::Index(base | (std::uint64_t(j) << lo)));
      const Vector res = u * buf;
      for (Eigen::Index j = 0; j < kd; ++j) amps_(Eigen::Index(base | (std::uint64_t(j) << lo))) = res(j);
    }
  }

  Vector amps_;
  int q_;
  GateLog log_;
};

}  // namespace qtime
