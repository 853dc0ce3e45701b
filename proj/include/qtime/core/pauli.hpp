#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtime/core/types.hpp"

namespace qtime {

// Qubit numbering: letter q (0-based) of an n-qubit string acts on the
// (q+1)-th tensor factor, i.e. on bit (n-1-q) of the computational index.
// This matches Kronecker-product order, leftmost factor most significant.

/// Symplectic bit-mask form of a Hermitian Pauli string (no phase).
/// Bit q of `x`/`z` refers to letter q. I=(0,0) X=(1,0) Z=(0,1) Y=(1,1).
struct PauliMask {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  friend bool operator==(const PauliMask&, const PauliMask&) = default;
  friend auto operator<=>(const PauliMask&, const PauliMask&) = default;

  bool is_identity() const { return x == 0 && z == 0; }
  int weight() const { return std::popcount(x | z); }
};

inline bool anticommute(const PauliMask& a, const PauliMask& b) {
  return ((std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1) != 0;
}

/// Product a*b = i^phase * (a xor b). Returns the phase exponent mod 4.
inline int product_phase(const PauliMask& a, const PauliMask& b) {
  // Per-qubit table for the Y = i X Z convention.
  int phase = 0;
  std::uint64_t support = (a.x | a.z) & (b.x | b.z);
  while (support) {
    int q = std::countr_zero(support);
    support &= support - 1;
    int la = int((a.x >> q) & 1) | (int((a.z >> q) & 1) << 1);  // 1=X 2=Z 3=Y
    int lb = int((b.x >> q) & 1) | (int((b.z >> q) & 1) << 1);
    if (la == lb) continue;
    // cyclic order X -> Y -> Z -> X gives +i
    static constexpr int kCyc[4] = {-1, 0, 2, 1};  // X=0, Y=1, Z=2
    int d = (kCyc[lb] - kCyc[la] + 3) % 3;
    phase += (d == 1) ? 1 : 3;
  }
  return phase & 3;
}

inline PauliMask multiply_masks(const PauliMask& a, const PauliMask& b) { return {a.x ^ b.x, a.z ^ b.z}; }

inline cplx i_power(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

/// A weighted tensor product of single-qubit Paulis.
class PauliString {
 public:
  PauliString() = default;

  PauliString(cplx coefficient, std::string letters) : coefficient_(coefficient), letters_(std::move(letters)) {
    for (char& c : letters_) {
      if (c >= 'a' && c <= 'z') c = char(c - 'a' + 'A');
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw ValidationError("invalid Pauli letter '" + std::string(1, c) + "'");
      }
    }
    if (!std::isfinite(coefficient_.real()) || !std::isfinite(coefficient_.imag())) {
      throw ValidationError("Pauli coefficient must be finite");
    }
  }

  /// Letters on 1-based sites, identity elsewhere: ({{1,'X'},{2,'Y'}}, 3) -> "XYI".
  static PauliString on_sites(cplx coefficient, int n, const std::vector<std::pair<int, char>>& sites) {
    std::string letters(std::size_t(n), 'I');
    for (auto [site, letter] : sites) {
      if (site < 1 || site > n) throw DimensionError("Pauli site out of range");
      if (letters[std::size_t(site - 1)] != 'I') throw ValidationError("duplicate Pauli site");
      letters[std::size_t(site - 1)] = letter;
    }
    return {coefficient, std::move(letters)};
  }

  static PauliString from_mask(cplx coefficient, int n, const PauliMask& m) {
    std::string letters(std::size_t(n), 'I');
    for (int q = 0; q < n; ++q) {
      bool x = (m.x >> q) & 1, z = (m.z >> q) & 1;
      letters[std::size_t(q)] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
    }
    return {coefficient, std::move(letters)};
  }

  int num_qubits() const { return int(letters_.size()); }
  cplx coefficient() const { return coefficient_; }
  void set_coefficient(cplx c) { coefficient_ = c; }
  const std::string& letters() const { return letters_; }
  char letter(int q) const { return letters_[std::size_t(q)]; }

  PauliMask mask() const {
    if (letters_.size() > 64) throw SizeError("Pauli mask supports at most 64 qubits");
    PauliMask m;
    for (std::size_t q = 0; q < letters_.size(); ++q) {
      char c = letters_[q];
      if (c == 'X' || c == 'Y') m.x |= (std::uint64_t{1} << q);
      if (c == 'Z' || c == 'Y') m.z |= (std::uint64_t{1} << q);
    }
    return m;
  }

  bool is_identity() const { return std::all_of(letters_.begin(), letters_.end(), [](char c) { return c == 'I'; }); }

  std::string to_string() const;

 private:
  cplx coefficient_{1.0, 0.0};
  std::string letters_;
};

namespace detail {

// Computational-basis action of an unweighted Pauli string on n qubits:
// P|c> = i^{nY} (-1)^{popcount(c & zbits)} |c ^ xbits>, bits in state order.
struct PauliAction {
  std::uint64_t xbits = 0;
  std::uint64_t zbits = 0;
  cplx base_phase{1.0, 0.0};
};

inline PauliAction pauli_action(const std::string& letters) {
  const int n = int(letters.size());
  PauliAction a;
  int ny = 0;
  for (int q = 0; q < n; ++q) {
    std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    switch (letters[std::size_t(q)]) {
      case 'X': a.xbits |= bit; break;
      case 'Y': a.xbits |= bit; a.zbits |= bit; ++ny; break;
      case 'Z': a.zbits |= bit; break;
      default: break;
    }
  }
  a.base_phase = i_power(ny);
  return a;
}

}  // namespace detail

inline std::string PauliString::to_string() const {
  std::string out;
  if (coefficient_.imag() == 0.0) {
    out = std::to_string(coefficient_.real());
  } else {
    out = "(" + std::to_string(coefficient_.real()) + (coefficient_.imag() < 0 ? "" : "+") +
          std::to_string(coefficient_.imag()) + "i)";
  }
  return out + "*" + letters_;
}

/// Hamiltonian or observable as a sum of weighted Pauli strings on n qubits.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(int n) : n_(n) {
    if (n < 1) throw ValidationError("PauliSum needs at least one qubit");
  }
  PauliSum(int n, std::vector<PauliString> terms) : PauliSum(n) {
    for (auto& t : terms) add(std::move(t));
  }

  int num_qubits() const { return n_; }
  const std::vector<PauliString>& terms() const& { return terms_; }
  std::vector<PauliString> terms() && { return std::move(terms_); }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  PauliSum& add(PauliString term) {
    if (term.num_qubits() != n_) throw DimensionError("Pauli term width does not match PauliSum");
    terms_.push_back(std::move(term));
    return *this;
  }

  PauliSum& add(cplx coefficient, const std::string& letters) { return add(PauliString(coefficient, letters)); }

  /// Merge equal strings and drop terms with |coefficient| <= tol.
  PauliSum simplified(double tol = 0.0) const {
    std::map<std::string, cplx> acc;
    std::vector<std::string> order;
    for (const auto& t : terms_) {
      auto [it, inserted] = acc.try_emplace(t.letters(), cplx{});
      if (inserted) order.push_back(t.letters());
      it->second += t.coefficient();
    }
    PauliSum out(n_);
    for (const auto& key : order) {
      if (std::abs(acc[key]) > tol) out.add(acc[key], key);
    }
    return out;
  }

  /// Hermitian iff, after merging duplicates, every coefficient is real.
  bool is_hermitian(double tol = 1e-12) const {
    for (const auto& t : simplified().terms()) {
      if (std::abs(t.coefficient().imag()) > tol) return false;
    }
    return true;
  }

  /// Sum of |c|^2 after merging; equals ||H||_HS^2 / 2^n.
  double hs_norm_sq() const {
    double s = 0.0;
    for (const auto& t : simplified().terms()) s += std::norm(t.coefficient());
    return s;
  }

  PauliSum operator+(const PauliSum& other) const {
    if (other.n_ != n_) throw DimensionError("PauliSum width mismatch");
    PauliSum out = *this;
    for (const auto& t : other.terms_) out.add(t);
    return out;
  }

  PauliSum scaled(cplx s) const {
    PauliSum out(n_);
    for (const auto& t : terms_) out.add(t.coefficient() * s, t.letters());
    return out;
  }

 private:
  int n_ = 1;
  std::vector<PauliString> terms_;
};

/// Dense matrix of a single Pauli string including its coefficient.
inline Matrix pauli_string_to_matrix(const PauliString& p) {
  const int n = p.num_qubits();
  require_dense(n, "pauli_string_to_matrix");
  const std::size_t dim = std::size_t{1} << n;
  const auto act = detail::pauli_action(p.letters());
  Matrix m = Matrix::Zero(Eigen::Index(dim), Eigen::Index(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    double sign = (std::popcount(c & act.zbits) & 1) ? -1.0 : 1.0;
    m(Eigen::Index(c ^ act.xbits), Eigen::Index(c)) = p.coefficient() * act.base_phase * sign;
  }
  return m;
}

/// Dense matrix of sum_k c_k P_k. Subject to the dense qubit cap.
inline Matrix pauli_sum_to_matrix(const PauliSum& h) {
  const int n = h.num_qubits();
  require_dense(n, "pauli_sum_to_matrix");
  const std::size_t dim = std::size_t{1} << n;
  Matrix m = Matrix::Zero(Eigen::Index(dim), Eigen::Index(dim));
  for (const auto& t : h.terms()) {
    const auto act = detail::pauli_action(t.letters());
    const cplx w = t.coefficient() * act.base_phase;
    for (std::size_t c = 0; c < dim; ++c) {
      double sign = (std::popcount(c & act.zbits) & 1) ? -1.0 : 1.0;
      m(Eigen::Index(c ^ act.xbits), Eigen::Index(c)) += w * sign;
    }
  }
  return m;
}

/// out = P psi for an unweighted Pauli string (coefficient ignored).
inline Vector apply_pauli_letters(const std::string& letters, const Vector& psi) {
  const auto act = detail::pauli_action(letters);
  Vector out(psi.size());
  for (Eigen::Index c = 0; c < psi.size(); ++c) {
    double sign = (std::popcount(std::uint64_t(c) & act.zbits) & 1) ? -1.0 : 1.0;
    out(Eigen::Index(std::uint64_t(c) ^ act.xbits)) = act.base_phase * sign * psi(c);
  }
  return out;
}

/// Matrix-free H psi for a Pauli sum.
inline Vector apply_pauli_sum(const PauliSum& h, const Vector& psi) {
  Vector out = Vector::Zero(psi.size());
  for (const auto& t : h.terms()) out += t.coefficient() * apply_pauli_letters(t.letters(), psi);
  return out;
}

}  // namespace qtime
