#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qtime/core/linalg.hpp"
#include "qtime/core/pauli.hpp"

namespace qtime {

enum class Boundary { Periodic, Open };

inline double golden_alpha() { return (std::sqrt(5.0) - 1.0) / 2.0; }

struct AubryAndreParams {
  int n = 2;
  double J = 2.0;
  double lambda = 0.0;
  double alpha_aa = golden_alpha();
  Boundary boundary = Boundary::Periodic;

  void validate() const {
    if (n < 2) throw ValidationError("Aubry-Andre chain needs n >= 2");
    if (!std::isfinite(J) || !std::isfinite(lambda)) throw ValidationError("J and lambda must be finite");
    if (!(alpha_aa > 0.0 && alpha_aa < 1.0)) throw ValidationError("alpha_aa must lie in (0, 1)");
    if (boundary == Boundary::Periodic && n == 2) {
      throw ValidationError("periodic boundary needs n >= 3 (n = 2 would double the single bond)");
    }
  }

  /// cos(2 pi alpha j) for 1-based site j.
  double field(int j) const { return std::cos(2.0 * kPi * alpha_aa * j); }
};

struct XYParams {
  int n = 2;
  std::vector<double> ax, ay;  // per bond, length n-1
  std::vector<double> az;      // per site, length n

  void validate() const {
    if (n < 2) throw ValidationError("XY chain needs n >= 2");
    if (int(ax.size()) != n - 1 || int(ay.size()) != n - 1 || int(az.size()) != n) {
      throw ValidationError("XY coupling arrays do not match n");
    }
  }
};

namespace detail {
inline std::vector<std::pair<int, int>> bonds(int n, Boundary b) {
  std::vector<std::pair<int, int>> out;
  for (int j = 1; j < n; ++j) out.emplace_back(j, j + 1);
  if (b == Boundary::Periodic) out.emplace_back(n, 1);
  return out;
}
}  // namespace detail

/// (J/4) sum_j (X_j X_{j+1} + Y_j Y_{j+1}) + (lambda/4) sum_j cos(2 pi alpha j)(Z_j + 2).
/// Identity contributions are merged into one term; zero terms are dropped.
inline PauliSum build_aubry_andre_spin(const AubryAndreParams& p) {
  p.validate();
  PauliSum h(p.n);
  for (auto [a, b] : detail::bonds(p.n, p.boundary)) {
    h.add(PauliString::on_sites(p.J / 4, p.n, {{a, 'X'}, {b, 'X'}}));
    h.add(PauliString::on_sites(p.J / 4, p.n, {{a, 'Y'}, {b, 'Y'}}));
  }
  double shift = 0.0;
  for (int j = 1; j <= p.n; ++j) {
    const double c = p.lambda / 4 * p.field(j);
    h.add(PauliString::on_sites(c, p.n, {{j, 'Z'}}));
    shift += 2 * c;
  }
  h.add(PauliString(shift, std::string(std::size_t(p.n), 'I')));
  return h.simplified(0.0);
}

/// sum_j ax_j X_j X_{j+1} + ay_j Y_j Y_{j+1} + sum_j az_j Z_j on an open chain.
inline PauliSum build_xy_spin(const XYParams& p) {
  p.validate();
  PauliSum h(p.n);
  for (int j = 1; j < p.n; ++j) {
    h.add(PauliString::on_sites(p.ax[std::size_t(j - 1)], p.n, {{j, 'X'}, {j + 1, 'X'}}));
    h.add(PauliString::on_sites(p.ay[std::size_t(j - 1)], p.n, {{j, 'Y'}, {j + 1, 'Y'}}));
  }
  for (int j = 1; j <= p.n; ++j) h.add(PauliString::on_sites(p.az[std::size_t(j - 1)], p.n, {{j, 'Z'}}));
  return h.simplified(0.0);
}

/// Open-chain, traceless XY form of the Aubry-Andre model (no constant shift,
/// no wrap-around bond). This is the form reachable by W D W^dagger with a
/// Z-only diagonal D.
inline XYParams aubry_andre_xy_params(const AubryAndreParams& p) {
  XYParams xy;
  xy.n = p.n;
  xy.ax.assign(std::size_t(p.n - 1), p.J / 4);
  xy.ay.assign(std::size_t(p.n - 1), p.J / 4);
  for (int j = 1; j <= p.n; ++j) xy.az.push_back(p.lambda / 4 * p.field(j));
  return xy;
}

/// Eigenvalue clusters of a Spectrum (eigenvalues descending).
struct EnergyClusters {
  Spectrum spectrum;
  std::vector<double> energies;                   // cluster means, descending
  std::vector<std::vector<Eigen::Index>> members;  // eigenvector column indices

  std::size_t size() const { return energies.size(); }

  /// P_k psi for every cluster k.
  std::vector<Vector> projections(const Vector& psi) const {
    std::vector<Vector> out;
    const Vector coeffs = spectrum.eigenvectors.adjoint() * psi;
    for (const auto& idx : members) {
      Vector v = Vector::Zero(psi.size());
      for (auto i : idx) v += coeffs(i) * spectrum.eigenvectors.col(i);
      out.push_back(std::move(v));
    }
    return out;
  }

  /// |c_k|^2 = ||P_k psi||^2 per cluster.
  RealVector weights(const Vector& psi) const {
    const Vector coeffs = spectrum.eigenvectors.adjoint() * psi;
    RealVector w = RealVector::Zero(Eigen::Index(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k)
      for (auto i : members[k]) w(Eigen::Index(k)) += std::norm(coeffs(i));
    return w;
  }
};

inline double default_cluster_tol(const Spectrum& s) {
  const double scale = s.size() ? std::max(std::abs(s.eigenvalues(0)), std::abs(s.eigenvalues(s.size() - 1))) : 0.0;
  return 1e-9 * std::max(scale, 1.0);
}

/// Group sorted eigenvalues whose consecutive gaps are <= tol.
inline EnergyClusters cluster_spectrum(Spectrum s, std::optional<double> tol = std::nullopt) {
  const double t = tol.value_or(default_cluster_tol(s));
  EnergyClusters c;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (i == 0 || s.eigenvalues(i - 1) - s.eigenvalues(i) > t) c.members.emplace_back();
    c.members.back().push_back(i);
  }
  for (const auto& idx : c.members) {
    double e = 0.0;
    for (auto i : idx) e += s.eigenvalues(i);
    c.energies.push_back(e / double(idx.size()));
  }
  c.spectrum = std::move(s);
  return c;
}

inline EnergyClusters cluster_spectrum(const PauliSum& h, std::optional<double> tol = std::nullopt) {
  return cluster_spectrum(hermitian_eig(h), tol);
}

/// rho_bar = sum_k P_k |psi0><psi0| P_k.
inline DensityMatrix dephased_state(const EnergyClusters& c, const StateVector& psi0) {
  Matrix rho = Matrix::Zero(psi0.dim(), psi0.dim());
  for (const auto& v : c.projections(psi0.amplitudes())) rho += v * v.adjoint();
  return {std::move(rho), DensityMatrix::Unchecked{}};
}

inline DensityMatrix dephased_state(const PauliSum& h, const StateVector& psi0) {
  return dephased_state(cluster_spectrum(h), psi0);
}

/// Infinite-time Loschmidt average sum_k |c_k|^4 (= Tr[rho_bar^2]).
inline double loschmidt_bar(const EnergyClusters& c, const StateVector& psi0) {
  return c.weights(psi0.amplitudes()).array().square().sum();
}

struct DistinctEigenvalues {
  int M = 0;
  std::optional<double> tau;  // smallest period with e^{-iH tau} proportional to identity
};

/// Number of distinct eigenvalues and, if all gaps are integer multiples of a
/// common frequency w0 = g_min / q (q <= max_q), the period tau = 2 pi / w0.
inline DistinctEigenvalues distinct_eigenvalue_count(const EnergyClusters& c, double tol, int max_q = 1000) {
  DistinctEigenvalues out;
  out.M = int(c.size());
  if (out.M < 2) return out;
  std::vector<double> gaps;
  for (std::size_t k = 1; k < c.size(); ++k) gaps.push_back(c.energies[0] - c.energies[k]);
  double g_min = gaps[0];
  for (std::size_t k = 1; k < gaps.size(); ++k) g_min = std::min(g_min, c.energies[k - 1] - c.energies[k]);
  for (int q = 1; q <= max_q; ++q) {
    const double w0 = g_min / q;
    bool ok = true;
    for (double g : gaps) {
      if (std::abs(g - std::round(g / w0) * w0) > tol) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.tau = 2.0 * kPi / w0;
      return out;
    }
  }
  return out;
}

inline DistinctEigenvalues distinct_eigenvalue_count(const PauliSum& h, double tol, int max_q = 1000) {
  return distinct_eigenvalue_count(cluster_spectrum(h, tol), tol, max_q);
}

}  // namespace qtime
