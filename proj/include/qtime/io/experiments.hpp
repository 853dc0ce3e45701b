#pragma once

// Batch experiments behind the command-line subcommands. Each experiment has a
// parse step (config errors) and a run step (numeric checks), and writes its
// results under the output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qtime/depth.hpp"
#include "qtime/freefermion.hpp"
#include "qtime/histstate.hpp"
#include "qtime/io/config.hpp"
#include "qtime/io/output.hpp"
#include "qtime/io/specs.hpp"
#include "qtime/protocols.hpp"
#include "qtime/vhd.hpp"

namespace qtime::io {

/// A computed quantity failed one of its consistency checks.
class NumericCheckError : public Error {
 public:
  using Error::Error;
};

struct RunOptions {
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
};

inline Common read_common(ObjectReader& root, const std::string& kind, const RunOptions& opt) {
  check_header(root, kind);
  Common c;
  c.seed = root.get_or<std::uint64_t>("seed", 0);
  c.threads = root.get_or<int>("threads", 1);
  if (opt.seed) c.seed = *opt.seed;
  if (opt.threads) c.threads = *opt.threads;
  if (c.threads < 1) ObjectReader::fail("threads", "must be >= 1");
  return c;
}

/// Collects failed checks and raises them together.
class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failed_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    require(std::isfinite(got) && std::abs(got - want) <= tol,
            what + ": " + fmt17(got) + " vs " + fmt17(want) + " (tol " + fmt17(tol) + ")");
  }
  json to_json() const { return json{{"passed", failed_.empty()}, {"failures", failed_}}; }
  void raise() const {
    if (failed_.empty()) return;
    std::string msg = "numeric checks failed:";
    for (const auto& f : failed_) msg += "\n  " + f;
    throw NumericCheckError(msg);
  }

 private:
  std::vector<std::string> failed_;
};

inline json estimate_record(const std::string& protocol, const json& params, const EstimateResult& r) {
  return json{{"protocol", protocol}, {"params", params},           {"mode", to_string(r.mode)},
              {"value_re", r.value.real()}, {"value_im", r.value.imag()}, {"stderr", r.std_error},
              {"shots", r.shots_used}, {"seed", r.seed}};
}

inline json gate_counts_json(const GateCounts& c) {
  return json{{"one_qubit", c.one_qubit},
              {"two_qubit", c.two_qubit},
              {"multi_qubit", c.multi_qubit},
              {"controlled_one_qubit", c.controlled_one_qubit},
              {"controlled_multi", c.controlled_multi},
              {"total", c.total()}};
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------- history

struct HistoryConfig {
  Common common;
  PauliSum h{1};
  StateVector psi0 = StateVector::basis(1, 0);
  int m = 1;
  double epsilon = 0.1;
  std::optional<PauliSum> observable;
};

inline HistoryConfig parse_history(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  HistoryConfig c;
  c.common = read_common(root, "history", opt);
  c.h = read_model(root.object("model"));
  c.psi0 = read_state(root.object("initial_state"), c.h.num_qubits());
  c.m = root.get<int>("m");
  if (c.m < 0) ObjectReader::fail("m", "must be >= 0");
  c.epsilon = read_positive_double(root, "epsilon");
  if (root.has("observable")) c.observable = read_pauli_terms(root.node("observable"), "observable", c.h.num_qubits());
  root.finish();
  as_config("m", [&] {
    require_dense(c.h.num_qubits() + c.m, "history state");
    return 0;
  });
  return c;
}

inline json run_history(const HistoryConfig& c, const RunOptions& opt) {
  const int n = c.h.num_qubits();
  const auto clusters = cluster_spectrum(c.h);
  const HistoryState hs = build_history_state(clusters.spectrum, c.psi0, c.m, c.epsilon);
  GateLog log;
  const HistoryState hc = build_history_state_circuit(clusters.spectrum, c.psi0, c.m, c.epsilon, &log);
  const auto red = reduced_states(hs);
  const double pT = purity(red.rho_T), pS = purity(red.rho_S);
  const auto bound = entanglement_loschmidt_bound(hs, clusters, c.psi0);
  const auto maj = check_majorization(hs, clusters);
  double lt = 0.0;
  for (long long t = 0; t < hs.N(); ++t) lt += std::norm(c.psi0.amplitudes().dot(condition_on_time(hs, t).amplitudes()));
  lt /= double(hs.N());
  const double diff = (hs.state.amplitudes() - hc.state.amplitudes()).cwiseAbs().maxCoeff();
  const GateCounts counts = audit_gate_log(log);

  Checks chk;
  chk.near(pT, pS, 1e-12, "purity(rho_T) = purity(rho_S)");
  chk.require(maj.max_violation < 1e-12, "majorization violation " + fmt17(maj.max_violation));
  chk.require(bound.slack >= -1e-12, "E2 <= 1 - L_bar slack " + fmt17(bound.slack));
  chk.require(diff <= 1e-10, "circuit vs formula amplitude difference " + fmt17(diff));
  chk.require(counts == history_circuit_counts(n, c.m), "gate log differs from the counting model");

  json out{{"kind", "history"},
           {"n", n},
           {"m", c.m},
           {"N", hs.N()},
           {"epsilon", c.epsilon},
           {"T", hs.T},
           {"purity_T", pT},
           {"purity_S", pS},
           {"E2", bound.E2},
           {"L_bar", bound.Lbar},
           {"L_tilde", lt},
           {"entanglement_slack", bound.slack},
           {"majorization", {{"holds", maj.holds}, {"max_violation", maj.max_violation}}},
           {"circuit_formula_max_diff", diff},
           {"gate_counts", gate_counts_json(counts)}};
  if (c.observable) {
    const auto f = fluctuation_bound(hs, clusters, c.psi0, pauli_sum_to_matrix(*c.observable));
    chk.require(f.sigma2 <= f.delta2 * f.Lbar + 1e-12, "sigma2 <= Delta2 L_bar");
    chk.require(f.delta2 * f.Lbar <= f.delta2 * f.purity_S + 1e-12, "Delta2 L_bar <= Delta2 purity_S");
    out["fluctuations"] = {{"sigma2", f.sigma2}, {"delta2", f.delta2}, {"L_bar", f.Lbar},
                           {"purity_S", f.purity_S}, {"bound", f.bound}};
  }
  out["checks"] = chk.to_json();

  std::string csv = "t,s,re,im\n";
  const Eigen::Index dS = hs.system_dim();
  for (Eigen::Index i = 0; i < hs.state.amplitudes().size(); ++i) {
    const cplx a = hs.state.amplitudes()(i);
    csv += std::to_string(i / dS) + "," + std::to_string(i % dS) + "," + fmt17(a.real()) + "," + fmt17(a.imag()) + "\n";
  }
  write_file_atomic(opt.out / "history_amplitudes.csv", csv);
  write_json(opt.out / "history.json", out);
  chk.raise();
  return out;
}

// ---------------------------------------------------------------- estimate-f

struct EstimateFConfig {
  Common common;
  PauliSum h{1};
  StateVector psi0 = StateVector::basis(1, 0);
  PauliSum O1{1}, O2{1};
  double omega = 0.0;
  int m = 1;
  double epsilon = 0.1;
  EstimatorConfig est;
  std::vector<std::string> protocols{"sequential", "parallel"};
  std::vector<long> shot_grid;
};

inline std::vector<std::string> read_protocols(ObjectReader& root, const std::vector<std::string>& allowed) {
  auto v = root.get_or<std::vector<std::string>>("protocols", allowed);
  if (v.empty()) ObjectReader::fail("protocols", "must not be empty");
  for (const auto& p : v)
    if (std::find(allowed.begin(), allowed.end(), p) == allowed.end())
      ObjectReader::fail("protocols", "unknown protocol '" + p + "'");
  return v;
}

inline std::vector<long> read_shot_grid(ObjectReader& root) {
  std::vector<long> out;
  if (!root.has("shot_grid")) return out;
  for (int s : root.get<std::vector<int>>("shot_grid")) {
    if (s < 1) ObjectReader::fail("shot_grid", "shot counts must be >= 1");
    out.push_back(s);
  }
  if (out.size() < 2) ObjectReader::fail("shot_grid", "needs at least two entries for a slope");
  return out;
}

inline EstimateFConfig parse_estimate_f(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  EstimateFConfig c;
  c.common = read_common(root, "estimate-f", opt);
  c.h = read_model(root.object("model"));
  const int n = c.h.num_qubits();
  c.psi0 = read_state(root.object("initial_state"), n);
  c.O1 = read_pauli_terms(root.node("O1"), "O1", n);
  c.O2 = read_pauli_terms(root.node("O2"), "O2", n);
  c.omega = root.get_or<double>("omega", 0.0);
  c.m = read_positive(root, "m");
  c.epsilon = read_positive_double(root, "epsilon");
  c.est = root.has("estimator") ? read_estimator(root.object("estimator"), c.common.seed) : EstimatorConfig{};
  c.est.seed = c.common.seed;
  c.protocols = read_protocols(root, {"sequential", "parallel"});
  c.shot_grid = read_shot_grid(root);
  root.finish();
  as_config("m", [&] {
    require_dense(n + c.m + 1, "parallel F estimator");
    return 0;
  });
  return c;
}

inline json run_estimate_f(const EstimateFConfig& c, const RunOptions& opt) {
  const int n = c.h.num_qubits();
  const long long N = 1LL << c.m;
  const auto spec = hermitian_eig(c.h);
  const auto rho0 = DensityMatrix::from_pure(c.psi0);
  const cplx exact =
      F_tilde_direct(spec, rho0, pauli_sum_to_matrix(c.O1), pauli_sum_to_matrix(c.O2), c.omega, N, c.epsilon);
  const json params{{"n", n}, {"m", c.m}, {"N", N}, {"epsilon", c.epsilon}, {"omega", c.omega}};
  json records = json::array();
  Checks chk;
  for (std::size_t i = 0; i < c.protocols.size(); ++i) {
    EstimatorConfig e = c.est;
    e.seed = derive_seed(c.common.seed, i);
    const auto r = c.protocols[i] == "sequential"
                       ? estimate_F_sequential(spec, rho0, c.O1, c.O2, c.omega, N, c.epsilon, e)
                       : estimate_F_parallel(spec, rho0, c.O1, c.O2, c.omega, c.m, c.epsilon, e);
    if (e.mode == Mode::Exact) {
      chk.near(r.value.real(), exact.real(), 1e-10, c.protocols[i] + " Re");
      chk.near(r.value.imag(), exact.imag(), 1e-10, c.protocols[i] + " Im");
    }
    chk.require(std::isfinite(r.value.real()) && std::isfinite(r.value.imag()), c.protocols[i] + " is finite");
    records.push_back(estimate_record(c.protocols[i], params, r));
  }
  json out{{"kind", "estimate-f"}, {"exact", {{"value_re", exact.real()}, {"value_im", exact.imag()}}},
           {"records", records}};
  if (!c.shot_grid.empty()) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < c.shot_grid.size(); ++i) {
      EstimatorConfig e = c.est;
      e.mode = Mode::Sampled;
      e.shots = c.shot_grid[i];
      e.seed = derive_seed(c.common.seed, 1000 + i);
      const auto r = estimate_F_parallel(spec, rho0, c.O1, c.O2, c.omega, c.m, c.epsilon, e);
      xs.push_back(double(e.shots));
      ys.push_back(r.std_error);
    }
    out["shot_scaling"] = {{"protocol", "parallel"}, {"shots", xs}, {"stderr", ys}, {"slope", loglog_slope(xs, ys)}};
  }
  out["checks"] = chk.to_json();
  write_json(opt.out / "estimate_f.json", out);
  chk.raise();
  return out;
}

// ---------------------------------------------------------------- loschmidt

struct LoschmidtConfig {
  Common common;
  PauliSum h{1};
  StateVector psi0 = StateVector::basis(1, 0);
  int m = 1;
  double epsilon = 0.1;
  EstimatorConfig est;
  std::vector<std::string> protocols{"sequential", "parallel"};
};

inline LoschmidtConfig parse_loschmidt(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  LoschmidtConfig c;
  c.common = read_common(root, "loschmidt", opt);
  c.h = read_model(root.object("model"));
  c.psi0 = read_state(root.object("initial_state"), c.h.num_qubits());
  c.m = read_positive(root, "m");
  c.epsilon = read_positive_double(root, "epsilon");
  c.est = root.has("estimator") ? read_estimator(root.object("estimator"), c.common.seed) : EstimatorConfig{};
  c.protocols = read_protocols(root, {"sequential", "parallel"});
  root.finish();
  as_config("m", [&] {
    require_dense(2 * c.h.num_qubits() + c.m, "parallel Loschmidt estimator");
    return 0;
  });
  return c;
}

inline json run_loschmidt(const LoschmidtConfig& c, const RunOptions& opt) {
  const int n = c.h.num_qubits();
  const long long N = 1LL << c.m;
  const auto clusters = cluster_spectrum(c.h);
  const auto& spec = clusters.spectrum;
  double exact = 0.0;
  for (long long t = 0; t < N; ++t) {
    const Vector u = propagator(spec, c.epsilon * double(t)) * c.psi0.amplitudes();
    exact += std::norm(c.psi0.amplitudes().dot(u));
  }
  exact /= double(N);
  const json params{{"n", n}, {"m", c.m}, {"N", N}, {"epsilon", c.epsilon}};
  json records = json::array();
  Checks chk;
  for (std::size_t i = 0; i < c.protocols.size(); ++i) {
    EstimatorConfig e = c.est;
    e.seed = derive_seed(c.common.seed, i);
    const auto r = c.protocols[i] == "sequential" ? estimate_loschmidt_sequential(spec, c.psi0, N, c.epsilon, e)
                                                  : estimate_loschmidt_parallel(spec, c.psi0, c.m, c.epsilon, e);
    if (e.mode == Mode::Exact) chk.near(r.value.real(), exact, 1e-10, c.protocols[i]);
    chk.require(std::isfinite(r.value.real()), c.protocols[i] + " is finite");
    records.push_back(estimate_record(c.protocols[i], params, r));
  }
  json out{{"kind", "loschmidt"},
           {"exact", {{"L_tilde", exact}, {"L_bar", loschmidt_bar(clusters, c.psi0)}}},
           {"records", records},
           {"checks", chk.to_json()}};
  write_json(opt.out / "loschmidt.json", out);
  chk.raise();
  return out;
}

// ---------------------------------------------------------------- entanglement

struct EntanglementConfig {
  Common common;
  PauliSum h{1};
  StateVector psi0 = StateVector::basis(1, 0);
  int m = 1;
  double epsilon = 0.1;
  EstimatorConfig est;
  std::vector<std::string> methods{"overlap", "shadows"};
  long snapshots = 2000;
  ShadowOptions shadow;
};

inline EntanglementConfig parse_entanglement(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  EntanglementConfig c;
  c.common = read_common(root, "entanglement", opt);
  c.h = read_model(root.object("model"));
  c.psi0 = read_state(root.object("initial_state"), c.h.num_qubits());
  c.m = read_positive(root, "m");
  c.epsilon = read_positive_double(root, "epsilon");
  c.est = root.has("estimator") ? read_estimator(root.object("estimator"), c.common.seed) : EstimatorConfig{};
  auto methods = root.get_or<std::vector<std::string>>("methods", c.methods);
  if (methods.empty()) ObjectReader::fail("methods", "must not be empty");
  for (const auto& m : methods)
    if (m != "overlap" && m != "shadows") ObjectReader::fail("methods", "unknown method '" + m + "'");
  c.methods = methods;
  if (root.has("shadows")) {
    auto s = root.object("shadows");
    c.snapshots = s.get_or<long>("snapshots", c.snapshots);
    c.shadow.median_of_means = s.get_or<bool>("median_of_means", false);
    c.shadow.batches = s.get_or<int>("batches", c.shadow.batches);
    c.shadow.bootstrap = s.get_or<int>("bootstrap", c.shadow.bootstrap);
    s.finish();
    if (c.snapshots < 2) ObjectReader::fail("shadows.snapshots", "must be >= 2");
    if (c.shadow.batches < 1 || c.shadow.bootstrap < 0) ObjectReader::fail("shadows", "invalid batch settings");
  }
  root.finish();
  const bool overlap = std::find(c.methods.begin(), c.methods.end(), "overlap") != c.methods.end();
  as_config("m", [&] {
    require_dense((overlap ? 2 : 1) * (c.h.num_qubits() + c.m), "entanglement estimator");
    return 0;
  });
  return c;
}

inline json run_entanglement(const EntanglementConfig& c, const RunOptions& opt) {
  const int n = c.h.num_qubits();
  const auto clusters = cluster_spectrum(c.h);
  const HistoryState hs = build_history_state(clusters.spectrum, c.psi0, c.m, c.epsilon);
  const double exact = purity(reduced_states(hs).rho_T);
  const auto bound = entanglement_loschmidt_bound(hs, clusters, c.psi0);
  const json params{{"n", n}, {"m", c.m}, {"N", hs.N()}, {"epsilon", c.epsilon}};
  json records = json::array();
  Checks chk;
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    const std::uint64_t seed = derive_seed(c.common.seed, i);
    EstimateResult r;
    if (c.methods[i] == "overlap") {
      EstimatorConfig e = c.est;
      e.seed = seed;
      r = estimate_purity_overlap(hs, e);
      if (e.mode == Mode::Exact) chk.near(r.value.real(), exact, 1e-10, "overlap purity");
    } else {
      r = estimate_purity_shadows(hs, c.snapshots, seed, c.shadow);
    }
    chk.require(std::isfinite(r.value.real()), c.methods[i] + " is finite");
    records.push_back(estimate_record(c.methods[i], params, r));
  }
  chk.require(bound.slack >= -1e-12, "E2 <= 1 - L_bar");
  json out{{"kind", "entanglement"},
           {"exact", {{"purity_T", exact}, {"E2", bound.E2}, {"L_bar", bound.Lbar}, {"slack", bound.slack}}},
           {"records", records},
           {"checks", chk.to_json()}};
  write_json(opt.out / "entanglement.json", out);
  chk.raise();
  return out;
}

// ---------------------------------------------------------------- ff-sweep

struct FfSweepConfig {
  Common common;
  int n = 200;
  double J = 2.0;
  double alpha = golden_alpha();
  Boundary boundary = Boundary::Periodic;
  std::vector<int> initial_sites;
  std::vector<int> observable_sites;
  std::vector<double> lambdas;
  std::vector<int> logNs;
  std::vector<double> epsilons;
  bool dense_check = false;
  int checkpoint_every = 8;  // lambda values per checkpoint
};

inline constexpr const char* kFfHeader = "lambda,logN,epsilon,L_tilde,L_bar,purity_S,E2,sigma2,bound";

inline FfSweepConfig parse_ff_sweep(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  FfSweepConfig c;
  c.common = read_common(root, "ff-sweep", opt);
  c.n = root.get_or<int>("n", 200);
  if (c.n < 3) ObjectReader::fail("n", "must be >= 3");
  c.J = root.get_or<double>("J", 2.0);
  c.alpha = root.get_or<double>("alpha", golden_alpha());
  c.boundary = read_boundary(root, "boundary", Boundary::Periodic);
  c.initial_sites = root.get_or<std::vector<int>>("initial_sites", {c.n / 2, c.n / 2 + 1});
  c.observable_sites = root.get_or<std::vector<int>>("observable_sites", {c.n / 2, c.n / 2 + 1});
  if (c.observable_sites.size() != 2) ObjectReader::fail("observable_sites", "expected two sites");
  for (int s : c.observable_sites)
    if (s < 1 || s > c.n) ObjectReader::fail("observable_sites", "site outside 1..n");
  as_config("initial_sites", [&] { return site_superposition(c.n, c.initial_sites); });
  c.lambdas = read_grid(root, "lambda");
  c.logNs = read_int_grid(root, "logN");
  for (int l : c.logNs)
    if (l < 0 || l > 30) ObjectReader::fail("logN", "entries must lie in 0..30");
  c.epsilons = read_grid(root, "epsilon");
  for (double e : c.epsilons)
    if (!(e > 0)) ObjectReader::fail("epsilon", "entries must be positive");
  c.dense_check = root.get_or<bool>("dense_check", false);
  c.checkpoint_every = root.get_or<int>("checkpoint_every", c.checkpoint_every);
  if (c.checkpoint_every < 1) ObjectReader::fail("checkpoint_every", "must be >= 1");
  root.finish();
  as_config("", [&] {
    AubryAndreParams{c.n, c.J, 0.0, c.alpha, c.boundary}.validate();
    return 0;
  });
  if (c.dense_check && c.n > dense_qubit_cap()) ObjectReader::fail("dense_check", "n exceeds the dense cap");
  return c;
}

struct FfPoint {
  double L_tilde, L_bar, purity_S, E2, sigma2, delta2, bound;
};

inline std::string ff_key(double lambda, int logN, double eps) {
  return fmt17(lambda) + "," + std::to_string(logN) + "," + fmt17(eps);
}

/// Evaluates every (logN, epsilon) point for one lambda.
inline std::vector<FfPoint> ff_points_for_lambda(const FfSweepConfig& c, double lambda) {
  const FreeFermionSystem sys(build_hopping_matrix(AubryAndreParams{c.n, c.J, lambda, c.alpha, c.boundary}));
  const Vector psi = site_superposition(c.n, c.initial_sites);
  const auto fl = sys.observable_fluctuations(psi, hopping_observable(c.n, c.observable_sites[0], c.observable_sites[1]));
  std::vector<FfPoint> out;
  for (int logN : c.logNs) {
    for (double eps : c.epsilons) {
      const auto [lt, pur] = sys.tilde_and_purity(psi, 1LL << logN, eps);
      out.push_back({lt, fl.Lbar, pur, 1.0 - pur, fl.sigma2, fl.delta2, fl.delta2 * pur});
    }
  }
  return out;
}

inline json run_ff_sweep(const FfSweepConfig& c, const RunOptions& opt) {
  KeyedCsv table(opt.out / "ff_sweep.csv", kFfHeader, 3);
  const std::size_t resumed = table.load();
  std::vector<std::string> order;
  for (double lam : c.lambdas)
    for (int logN : c.logNs)
      for (double eps : c.epsilons) order.push_back(ff_key(lam, logN, eps));
  std::vector<std::size_t> todo;
  const std::size_t per = c.logNs.size() * c.epsilons.size();
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    bool done = true;
    for (std::size_t k = 0; k < per && done; ++k) done = table.has(order[i * per + k]);
    if (!done) todo.push_back(i);
  }

  Checks chk;
  std::size_t violations = 0;
  const std::size_t chunk = std::size_t(c.checkpoint_every);
  for (std::size_t start = 0; start < todo.size(); start += chunk) {
    const std::size_t stop = std::min(todo.size(), start + chunk);
    std::vector<std::vector<FfPoint>> results(stop - start);
    parallel_for(stop - start, c.common.threads,
                 [&](std::size_t j) { results[j] = ff_points_for_lambda(c, c.lambdas[todo[start + j]]); });
    for (std::size_t j = 0; j < results.size(); ++j) {
      const std::size_t li = todo[start + j];
      for (std::size_t k = 0; k < per; ++k) {
        const FfPoint& p = results[j][k];
        const std::string& key = order[li * per + k];
        if (!(p.sigma2 <= p.delta2 * p.L_bar + 1e-12 && p.delta2 * p.L_bar <= p.bound + 1e-12)) ++violations;
        table.put(key, key + "," + fmt17(p.L_tilde) + "," + fmt17(p.L_bar) + "," + fmt17(p.purity_S) + "," +
                           fmt17(p.E2) + "," + fmt17(p.sigma2) + "," + fmt17(p.bound));
      }
    }
    table.save(order);
  }
  if (todo.empty()) table.save(order);
  chk.require(violations == 0, std::to_string(violations) + " grid points violate the fluctuation bound chain");

  json out{{"kind", "ff-sweep"},
           {"points", order.size()},
           {"resumed_points", resumed},
           {"computed_lambdas", todo.size()},
           {"n", c.n}};
  if (c.dense_check) {
    // one-excitation block of the spin chain with field 2 lambda equals the hopping matrix
    double worst = 0.0;
    const Vector psi = site_superposition(c.n, c.initial_sites);
    const StateVector spin_psi = embed_single_particle(psi);
    for (double lam : c.lambdas) {
      const FreeFermionSystem sys(build_hopping_matrix(AubryAndreParams{c.n, c.J, lam, c.alpha, c.boundary}));
      const auto spec = hermitian_eig(build_aubry_andre_spin(AubryAndreParams{c.n, c.J, 2 * lam, c.alpha, c.boundary}));
      for (int logN : c.logNs) {
        if (c.n + logN > dense_qubit_cap()) continue;
        for (double eps : c.epsilons) {
          const HistoryState hs = build_history_state(spec, spin_psi, logN, eps);
          worst = std::max(worst, std::abs(sys.purity_single_sum(psi, 1LL << logN, eps) - (1.0 - linear_entropy(hs))));
        }
      }
      for (int k = 0; k < 20; ++k) {
        const double t = 0.37 * k;
        const double dense = std::norm(spin_psi.amplitudes().dot(propagator(spec, t) * spin_psi.amplitudes()));
        worst = std::max(worst, std::abs(dense - sys.loschmidt_t(psi, t)));
      }
    }
    chk.require(worst <= 1e-10, "free-fermion vs dense deviation " + fmt17(worst));
    out["dense_check"] = {{"max_deviation", worst}};
  }
  out["checks"] = chk.to_json();
  write_json(opt.out / "ff_sweep_summary.json", out);
  chk.raise();
  return out;
}

// ---------------------------------------------------------------- vhd-train

struct VhdLSweep {
  std::vector<int> layers;
  double lambda = 2.0;
  int restarts = 10;
};

struct VhdConfig {
  Common common;
  int n = 6;
  double J = 2.0;
  double alpha = golden_alpha();
  std::vector<double> lambdas{1.0, 2.0, 3.0};
  int L = 18;
  TrainConfig train;
  std::optional<VhdLSweep> sweep;
};

inline VhdConfig parse_vhd(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  VhdConfig c;
  c.common = read_common(root, "vhd-train", opt);
  c.n = root.get_or<int>("n", 6);
  if (c.n < 2) ObjectReader::fail("n", "must be >= 2");
  c.J = root.get_or<double>("J", 2.0);
  c.alpha = root.get_or<double>("alpha", golden_alpha());
  if (root.has("lambdas")) c.lambdas = read_grid(root, "lambdas");
  c.L = root.get_or<int>("L", 18);
  if (c.L < 0) ObjectReader::fail("L", "must be >= 0");
  TrainConfig& t = c.train;
  t.lr_alpha = root.get_or<double>("lr_alpha", t.lr_alpha);
  t.lr_beta = root.get_or<double>("lr_beta", t.lr_beta);
  t.lr_decay = root.get_or<double>("lr_decay", t.lr_decay);
  t.max_iters = root.get_or<long>("max_iters", t.max_iters);
  t.stop_loss = root.get_or<double>("stop_loss", t.stop_loss);
  t.restarts = root.get_or<int>("restarts", t.restarts);
  t.tied = root.get_or<bool>("tied", false);
  t.record_every = root.get_or<long>("record_every", 100);
  t.seed = c.common.seed;
  if (root.has("L_sweep")) {
    auto s = root.object("L_sweep");
    VhdLSweep sw;
    sw.layers = read_int_grid(s, "layers");
    for (int l : sw.layers)
      if (l < 0) ObjectReader::fail("L_sweep.layers", "entries must be >= 0");
    sw.lambda = s.get_or<double>("lambda", 2.0);
    sw.restarts = s.get_or<int>("restarts", t.restarts);
    if (sw.restarts < 1) ObjectReader::fail("L_sweep.restarts", "must be >= 1");
    s.finish();
    c.sweep = sw;
  }
  root.finish();
  as_config("", [&] {
    t.validate();
    require_dense(c.n, "vhd-train");
    return 0;
  });
  return c;
}

inline PauliSum vhd_target(const VhdConfig& c, double lambda) {
  return build_xy_spin(aubry_andre_xy_params(AubryAndreParams{c.n, c.J, lambda, c.alpha, Boundary::Open}));
}

/// Restarts spread over the worker pool; results merge by run id.
inline TrainReport vhd_train_parallel(const PauliSum& h, int n, int L, const TrainConfig& cfg, int threads) {
  cfg.validate();
  const VhdEngine eng(h, n, L, cfg.tied);
  const double scale = max_abs_entry(h);
  TrainReport rep;
  rep.seed = cfg.seed;
  rep.runs.resize(std::size_t(cfg.restarts));
  parallel_for(rep.runs.size(), threads, [&](std::size_t r) { rep.runs[r] = vhd_train_run(eng, cfg, scale, int(r)); });
  for (std::size_t r = 0; r < rep.runs.size(); ++r) {
    rep.converged_runs += rep.runs[r].converged;
    if (r == 0 || rep.runs[r].final_loss < rep.best_loss) {
      rep.best_loss = rep.runs[r].final_loss;
      rep.best_params = rep.runs[r].params;
    }
  }
  return rep;
}

inline std::string lambda_tag(double lambda) {
  std::ostringstream os;
  os << lambda;
  return os.str();
}

inline json run_vhd(const VhdConfig& c, const RunOptions& opt) {
  Checks chk;
  json audits = json::array();
  for (double lam : c.lambdas) {
    const PauliSum h = vhd_target(c, lam);
    const auto rep = vhd_train_parallel(h, c.n, c.L, c.train, c.common.threads);
    std::string csv = "run_id,iter,loss\n";
    for (std::size_t r = 0; r < rep.runs.size(); ++r)
      for (const auto& [it, loss] : rep.runs[r].loss_history)
        csv += std::to_string(r) + "," + std::to_string(it) + "," + fmt17(loss) + "\n";
    const std::string tag = lambda_tag(lam);
    write_file_atomic(opt.out / ("vhd_loss_lambda" + tag + ".csv"), csv);
    const auto& a = rep.best_params;
    write_json(opt.out / ("vhd_params_lambda" + tag + ".json"),
               json{{"n", a.n}, {"L", a.L}, {"tied", a.tied}, {"lambda", lam}, {"alpha", a.alpha}, {"beta", a.beta},
                    {"final_loss", rep.best_loss}, {"seed", rep.seed}});
    const double off = offdiagonal_residual(h, a);
    const double bound = std::sqrt(std::ldexp(std::max(rep.best_loss, 0.0), c.n));
    const RealVector ev = hermitian_eig(h).eigenvalues;
    const double eig_err = (diagonal_spectrum(a) - ev).cwiseAbs().maxCoeff();
    chk.require(off <= bound + 1e-12, "off-diagonal residual exceeds sqrt(2^n loss) at lambda " + tag);
    audits.push_back({{"lambda", lam},
                      {"best_loss", rep.best_loss},
                      {"converged_runs", rep.converged_runs},
                      {"offdiag_max", off},
                      {"offdiag_bound", bound},
                      {"eigenvalue_max_error", eig_err}});
  }
  write_json(opt.out / "vhd_offdiag.json", audits);
  json out{{"kind", "vhd-train"}, {"n", c.n}, {"L", c.L}, {"audit", audits}};
  if (c.sweep) {
    std::string csv = "lambda,L,min_loss,converged_runs\n";
    json rows = json::array();
    TrainConfig t = c.train;
    t.restarts = c.sweep->restarts;
    const PauliSum h = vhd_target(c, c.sweep->lambda);
    for (int L : c.sweep->layers) {
      const auto rep = vhd_train_parallel(h, c.n, L, t, c.common.threads);
      csv += fmt17(c.sweep->lambda) + "," + std::to_string(L) + "," + fmt17(rep.best_loss) + "," +
             std::to_string(rep.converged_runs) + "\n";
      rows.push_back({{"L", L}, {"min_loss", rep.best_loss}, {"converged_runs", rep.converged_runs}});
    }
    write_file_atomic(opt.out / "vhd_lsweep.csv", csv);
    out["L_sweep"] = rows;
  }
  out["checks"] = chk.to_json();
  write_json(opt.out / "vhd_summary.json", out);
  chk.raise();
  return out;
}

// ---------------------------------------------------------------- depth-report

struct DepthModelSpec {
  std::string name;
  GateCountModel model;
  std::vector<int> logNs;
};

struct DiagonalizedSpec {
  int n = 6, m = 4, L = 3;
};

struct DepthConfig {
  Common common;
  std::vector<DepthModelSpec> models;
  std::vector<DiagonalizedSpec> diagonalized;
  bool audit = true;
};

inline DepthConfig parse_depth(const json& doc, const RunOptions& opt) {
  ObjectReader root(doc, "");
  DepthConfig c;
  c.common = read_common(root, "depth-report", opt);
  const json& models = root.node("models");
  if (!models.is_array() || models.empty()) ObjectReader::fail("models", "expected a non-empty array");
  for (std::size_t i = 0; i < models.size(); ++i) {
    ObjectReader r(models[i], "models[" + std::to_string(i) + "]");
    DepthModelSpec s;
    s.name = r.get<std::string>("name");
    s.model.gamma = r.get_or<double>("gamma", 1.0);
    s.model.beta = r.get_or<double>("beta", 2.0);
    s.model.l = r.get<double>("l");
    s.model.alpha_exp = r.get_or<double>("alpha", 1.0);
    s.model.epsilon = r.get_or<double>("epsilon", 1.0);
    s.logNs = read_int_grid(r, "logN");
    for (int l : s.logNs)
      if (l < 1 || l > 40) ObjectReader::fail(r.child("logN"), "entries must lie in 1..40");
    r.finish();
    as_config(r.path(), [&] {
      s.model.validate();
      return 0;
    });
    c.models.push_back(s);
  }
  if (root.has("diagonalized")) {
    const json& d = root.node("diagonalized");
    if (!d.is_array()) ObjectReader::fail("diagonalized", "expected an array");
    for (std::size_t i = 0; i < d.size(); ++i) {
      ObjectReader r(d[i], "diagonalized[" + std::to_string(i) + "]");
      DiagonalizedSpec s{r.get<int>("n"), r.get<int>("m"), r.get<int>("L")};
      r.finish();
      if (s.n < 2 || s.m < 0 || s.L < 0) ObjectReader::fail(r.path(), "need n >= 2, m >= 0, L >= 0");
      c.diagonalized.push_back(s);
    }
  }
  c.audit = root.get_or<bool>("audit", true);
  root.finish();
  return c;
}

/// Builds one instance of every circuit family and compares its log to the model.
inline json audit_circuit_families(std::uint64_t seed, const std::vector<DiagonalizedSpec>& diag, Checks& chk) {
  json rows = json::array();
  auto add = [&](const std::string& family, const json& params, const GateCounts& want, const GateCounts& got) {
    const bool eq = want == got;
    chk.require(eq, family + " gate log differs from the counting model");
    rows.push_back({{"family", family}, {"params", params}, {"expected", gate_counts_json(want)},
                    {"logged", gate_counts_json(got)}, {"equal", eq}});
  };
  Philox rng(seed, 7);
  const PauliSum h = random_pauli_sum(2, 4, rng);
  const auto spec = hermitian_eig(h);
  const StateVector psi = random_state(2, rng);
  for (int m : {1, 3}) {
    GateLog log;
    build_history_state_circuit(spec, psi, m, 0.3, &log);
    add("history", {{"n", 2}, {"m", m}}, history_circuit_counts(2, m), audit_gate_log(log));
  }
  for (bool im : {false, true}) {
    const Register reg = build_F_parallel_circuit(spec, psi.amplitudes(), "XY", "ZI", 0.5, 2, 0.3, im);
    add(im ? "f_parallel_im" : "f_parallel_re", {{"n", 2}, {"m", 2}}, f_parallel_circuit_counts(2, 2, 2, 1, im),
        audit_gate_log(reg.log()));
  }
  {
    GateLog log;
    estimate_loschmidt_parallel(spec, psi, 2, 0.3, EstimatorConfig{}, &log);
    add("loschmidt_parallel", {{"n", 2}, {"m", 2}}, loschmidt_parallel_circuit_counts(2, 2), audit_gate_log(log));
  }
  for (const auto& d : diag) {
    if (d.n + d.m > dense_qubit_cap()) continue;
    CartanAnsatz a(d.n, d.L);
    for (auto& x : a.alpha) x = rng.normal();
    for (auto& x : a.beta) x = rng.normal();
    const auto b = DiagonalizedHistoryBuilder::create(a, 0.0, 1.0, d.m, 0.2);
    for (bool ent : {false, true}) {
      const Register reg = b.build_register(StateVector::basis(d.n, 0), ent);
      add(ent ? "diagonalized_entanglement" : "diagonalized", {{"n", d.n}, {"m", d.m}, {"L", d.L}},
          diagonalized_circuit_counts(d.n, d.m, a.gate_count(), ent), audit_gate_log(reg.log()));
    }
  }
  return rows;
}

inline json run_depth(const DepthConfig& c, const RunOptions& opt) {
  std::vector<DepthRow> rows;
  for (const auto& s : c.models) {
    for (int logN : s.logNs) {
      GateCountModel m = s.model;
      m.N = 1LL << logN;
      const auto r = trotter_counts(m);
      rows.push_back({s.name, logN, m.N, r.seq_total, r.par_total, r.ratio, r.crossover_N});
    }
  }
  write_file_atomic(opt.out / "depth.csv", format_depth_csv(rows));
  write_file_atomic(opt.out / "depth.md", format_depth_markdown(rows));
  std::string dcsv = "n,m,L,controlled_rotations,w_gates,hadamards,total,total_entanglement_only\n";
  for (const auto& d : c.diagonalized) {
    const long w = long(2 * (d.n - 1) * d.L);
    const auto full = diagonalized_counts(d.n, d.m, w), ent = diagonalized_counts(d.n, d.m, w, true);
    dcsv += std::to_string(d.n) + "," + std::to_string(d.m) + "," + std::to_string(d.L) + "," +
            std::to_string(full.controlled_rotations) + "," + std::to_string(full.w_gates) + "," +
            std::to_string(full.hadamards) + "," + std::to_string(full.total()) + "," + std::to_string(ent.total()) +
            "\n";
  }
  if (!c.diagonalized.empty()) write_file_atomic(opt.out / "depth_diagonalized.csv", dcsv);
  Checks chk;
  json out{{"kind", "depth-report"}, {"rows", rows.size()}};
  if (c.audit) {
    const json audit = audit_circuit_families(c.common.seed, c.diagonalized, chk);
    write_json(opt.out / "depth_audit.json", audit);
    out["audited_circuits"] = audit.size();
  }
  out["checks"] = chk.to_json();
  write_json(opt.out / "depth_summary.json", out);
  chk.raise();
  return out;
}

}  // namespace qtime::io
