#pragma once

#include <atomic>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtime {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Error hierarchy. Every failure the library reports derives from Error so
// callers can catch one type; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class WiringError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline std::atomic<int>& dense_cap_storage() {
  static std::atomic<int> cap{14};
  return cap;
}
}  // namespace detail

/// Largest total qubit count any dense (2^q) object may have.
inline int dense_qubit_cap() { return detail::dense_cap_storage().load(); }

inline void set_dense_qubit_cap(int q) {
  if (q < 1 || q > 30) throw ValidationError("dense qubit cap must lie in [1, 30]");
  detail::dense_cap_storage().store(q);
}

inline void require_dense(int qubits, const char* what) {
  if (qubits > dense_qubit_cap()) {
    throw SizeError(std::string(what) + ": " + std::to_string(qubits) +
                    " qubits exceeds dense cap of " + std::to_string(dense_qubit_cap()));
  }
}

inline bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

inline int log2_exact(long long v) {
  if (!is_power_of_two(v)) throw ValidationError("expected a power of two, got " + std::to_string(v));
  int k = 0;
  while ((1LL << k) < v) ++k;
  return k;
}

}  // namespace qtime
