#pragma once

// Config fragments shared by several experiments: model Hamiltonians, initial
// states, Pauli observables and estimator settings.

#include <string>

#include "qtime/freefermion.hpp"
#include "qtime/hamiltonians.hpp"
#include "qtime/io/config.hpp"
#include "qtime/protocols.hpp"
#include "qtime/random_instances.hpp"

namespace qtime::io {

/// Runs `f`, turning library validation failures into config errors at `path`.
template <class F>
auto as_config(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline Boundary read_boundary(ObjectReader& r, const std::string& key, Boundary fallback) {
  const auto s = r.get_or<std::string>(key, fallback == Boundary::Periodic ? "periodic" : "open");
  if (s == "periodic") return Boundary::Periodic;
  if (s == "open") return Boundary::Open;
  ObjectReader::fail(r.child(key), "expected 'periodic' or 'open'");
}

inline AubryAndreParams read_aubry_andre(ObjectReader& r, Boundary fallback = Boundary::Periodic) {
  AubryAndreParams p;
  p.n = r.get<int>("n");
  p.J = r.get_or<double>("J", 2.0);
  p.lambda = r.get<double>("lambda");
  p.alpha_aa = r.get_or<double>("alpha", golden_alpha());
  p.boundary = read_boundary(r, "boundary", fallback);
  as_config(r.path(), [&] {
    p.validate();
    return 0;
  });
  return p;
}

inline PauliSum read_pauli_terms(const json& v, const std::string& path, int n) {
  if (!v.is_array() || v.empty()) ObjectReader::fail(path, "expected a non-empty array of {coeff, pauli}");
  PauliSum out(n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    ObjectReader t(v[i], path + "[" + std::to_string(i) + "]");
    const double c = t.get<double>("coeff");
    const auto s = t.get<std::string>("pauli");
    t.finish();
    if (int(s.size()) != n) ObjectReader::fail(t.child("pauli"), "length differs from n = " + std::to_string(n));
    as_config(t.child("pauli"), [&] {
      out.add(c, s);
      return 0;
    });
  }
  return out;
}

/// Hamiltonian from {"type": "aubry_andre" | "xy" | "pauli" | "random", ...}.
inline PauliSum read_model(ObjectReader r) {
  const auto type = r.get<std::string>("type");
  PauliSum h(1);
  if (type == "aubry_andre") {
    const auto p = read_aubry_andre(r);
    h = build_aubry_andre_spin(p);
  } else if (type == "aubry_andre_xy") {
    const auto p = read_aubry_andre(r, Boundary::Open);
    h = build_xy_spin(aubry_andre_xy_params(p));
  } else if (type == "xy") {
    XYParams p;
    p.az = r.get<std::vector<double>>("az");
    p.n = int(p.az.size());
    p.ax = r.get<std::vector<double>>("ax");
    p.ay = r.get<std::vector<double>>("ay");
    h = as_config(r.path(), [&] { return build_xy_spin(p); });
  } else if (type == "pauli") {
    const int n = r.get<int>("n");
    if (n < 1) ObjectReader::fail(r.child("n"), "must be >= 1");
    h = read_pauli_terms(r.node("terms"), r.child("terms"), n);
  } else if (type == "random") {
    const int n = r.get<int>("n");
    const int terms = r.get<int>("terms");
    const auto seed = r.get_or<std::uint64_t>("seed", 0);
    if (n < 1 || terms < 1) ObjectReader::fail(r.path(), "n and terms must be >= 1");
    Philox rng(seed, 0);
    h = random_pauli_sum(n, terms, rng);
  } else {
    ObjectReader::fail(r.child("type"), "unknown model type '" + type + "'");
  }
  r.finish();
  as_config(r.path(), [&] {
    require_dense(h.num_qubits(), "model");
    return 0;
  });
  return h;
}

/// Initial state on n qubits from {"type": "basis" | "plus" | "random" | "excitations", ...}.
inline StateVector read_state(ObjectReader r, int n) {
  const auto type = r.get<std::string>("type");
  StateVector psi = StateVector::basis(n, 0);
  if (type == "basis") {
    const auto idx = r.get<std::uint64_t>("index");
    if (idx >= (std::uint64_t(1) << n)) ObjectReader::fail(r.child("index"), "outside the register");
    psi = StateVector::basis(n, std::size_t(idx));
  } else if (type == "plus") {
    psi = StateVector::plus(n);
  } else if (type == "random") {
    Philox rng(r.get_or<std::uint64_t>("seed", 0), 0);
    psi = random_state(n, rng);
  } else if (type == "excitations") {
    // equal superposition of single spin flips at the listed 1-based sites
    const auto sites = r.get<std::vector<int>>("sites");
    psi = as_config(r.child("sites"), [&] { return embed_single_particle(site_superposition(n, sites)); });
  } else {
    ObjectReader::fail(r.child("type"), "unknown state type '" + type + "'");
  }
  r.finish();
  return psi;
}

inline Mode read_mode(ObjectReader& r, const std::string& key) {
  const auto s = r.get_or<std::string>(key, "exact");
  if (s == "exact") return Mode::Exact;
  if (s == "sampled") return Mode::Sampled;
  ObjectReader::fail(r.child(key), "expected 'exact' or 'sampled'");
}

inline EstimatorConfig read_estimator(ObjectReader r, std::uint64_t seed) {
  EstimatorConfig cfg;
  cfg.mode = read_mode(r, "mode");
  cfg.shots = r.get_or<long>("shots", cfg.shots);
  cfg.seed = seed;
  r.finish();
  as_config(r.path(), [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

inline int read_positive(ObjectReader& r, const std::string& key) {
  const int v = r.get<int>(key);
  if (v < 1) ObjectReader::fail(r.child(key), "must be >= 1");
  return v;
}

inline double read_positive_double(ObjectReader& r, const std::string& key) {
  const double v = r.get<double>(key);
  if (!(v > 0) || !std::isfinite(v)) ObjectReader::fail(r.child(key), "must be positive and finite");
  return v;
}

}  // namespace qtime::io
