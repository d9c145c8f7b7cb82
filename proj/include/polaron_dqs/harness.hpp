// Copyright 2026 The polaron-dqs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "polaron_dqs/builders.hpp"
#include "polaron_dqs/chebyshev.hpp"
#include "polaron_dqs/circuit.hpp"
#include "polaron_dqs/fock.hpp"
#include "polaron_dqs/grid_reference.hpp"
#include "polaron_dqs/lanczos.hpp"
#include "polaron_dqs/layout.hpp"
#include "polaron_dqs/model.hpp"
#include "polaron_dqs/statevector.hpp"

namespace pdqs {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  // model; couplings are stored resolved
  double t_e = 1.0;
  double omega_b = 1.0;
  int n_sites = 5;
  double g_P = 0.0;
  double g_B = 0.0;
  // encoding
  int n_q = 2;
  int M = 4;
  int M_max = 16;
  bool converge_truncation = true;
  // dynamics
  double t_max = 5.0;
  double dt_out = 0.25;
  std::vector<int> n_s = {8, 16, 32, 64};
  bool symmetric = false;
  std::vector<TrotterTerm> term_order = default_term_order();
  bool encoded_reference = true;
  // phase estimation
  int n_phase_qubits = 6;
  double qpe_dt = 0.5;
  int qpe_trotter_steps = 1;
  std::size_t shots = 0;
  // ground state
  std::vector<double> sweep_lambda;
  double sweep_zeta = 0.0;
  double lanczos_tol = 1e-10;
  // W state
  double w_tolerance = 1e-10;
  // run
  std::uint64_t seed = 1;
  int max_qubits = 24;
  int threads = 1;
  std::string out = "out";

  ModelParams params() const {
    ModelParams p;
    p.t_e = t_e;
    p.omega_b = omega_b;
    p.n_sites = n_sites;
    p.g_P = g_P;
    p.g_B = g_B;
    return p;
  }

  void validate() const {
    if (n_sites < 1) throw std::invalid_argument("config: model.n_sites must be >= 1");
    if (!(t_e > 0.0) || !(omega_b > 0.0)) throw std::invalid_argument("config: t_e and omega_b must be > 0");
    if (g_P < 0.0 || g_B < 0.0) throw std::invalid_argument("config: couplings must be >= 0");
    if (n_q < 1) throw std::invalid_argument("config: encoding.n_q must be >= 1");
    if (M < 0 || M_max < M) throw std::invalid_argument("config: need 0 <= encoding.M <= encoding.M_max");
    if (!(t_max >= 0.0) || !(dt_out > 0.0)) throw std::invalid_argument("config: need t_max >= 0 and dt_out > 0");
    for (int s : n_s)
      if (s < 1) throw std::invalid_argument("config: dynamics.n_s entries must be >= 1");
    TrotterPlan plan;
    plan.order = term_order;
    plan.validate();
    if (n_phase_qubits < 1) throw std::invalid_argument("config: qpe.n_phase_qubits must be >= 1");
    if (!(qpe_dt > 0.0) || qpe_trotter_steps < 1) throw std::invalid_argument("config: invalid qpe settings");
    if (!(lanczos_tol > 0.0)) throw std::invalid_argument("config: lanczos_tol must be > 0");
    if (!(w_tolerance > 0.0)) throw std::invalid_argument("config: wstate.tolerance must be > 0");
    if (max_qubits < 1) throw std::invalid_argument("config: run.max_qubits must be >= 1");
    if (threads < 0) throw std::invalid_argument("config: run.threads must be >= 0");
  }

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline void reject_unknown(const json& j, const char* section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw std::invalid_argument(std::string("config: '") + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument(std::string("config: unknown key '") + section + "." + it.key() + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

/// Parses the JSON config. The coupling is given either as (g_P, g_B) or as
/// (lambda_P, zeta), never mixed; it is stored as (g_P, g_B).
inline ExperimentConfig config_from_json(const json& j) {
  using detail::read_opt;
  detail::reject_unknown(j, "", {"model", "encoding", "dynamics", "qpe", "ground_state", "wstate", "run"});
  ExperimentConfig c;
  if (j.contains("model")) {
    const json& m = j.at("model");
    detail::reject_unknown(m, "model", {"t_e", "omega_b", "n_sites", "g_P", "g_B", "lambda_P", "zeta"});
    read_opt(m, "t_e", c.t_e);
    read_opt(m, "omega_b", c.omega_b);
    read_opt(m, "n_sites", c.n_sites);
    const bool direct = m.contains("g_P") || m.contains("g_B");
    const bool dimensionless = m.contains("lambda_P") || m.contains("zeta");
    if (direct && dimensionless)
      throw std::invalid_argument("config: give either g_P/g_B or lambda_P/zeta, not both");
    if (direct) {
      read_opt(m, "g_P", c.g_P);
      read_opt(m, "g_B", c.g_B);
    } else if (dimensionless) {
      double lambda = 0.0, zeta = 0.0;
      read_opt(m, "lambda_P", lambda);
      read_opt(m, "zeta", zeta);
      if (lambda < 0.0 || zeta < 0.0) throw std::invalid_argument("config: lambda_P and zeta must be >= 0");
      if (!(c.t_e > 0.0) || !(c.omega_b > 0.0)) throw std::invalid_argument("config: t_e and omega_b must be > 0");
      c.g_P = std::sqrt(lambda * c.t_e / (2.0 * c.omega_b));
      c.g_B = zeta * c.g_P;
    }
  }
  if (j.contains("encoding")) {
    const json& e = j.at("encoding");
    detail::reject_unknown(e, "encoding", {"n_q", "M", "M_max", "converge"});
    read_opt(e, "n_q", c.n_q);
    read_opt(e, "M", c.M);
    c.M_max = std::max(c.M_max, c.M);
    read_opt(e, "M_max", c.M_max);
    read_opt(e, "converge", c.converge_truncation);
  }
  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    detail::reject_unknown(d, "dynamics", {"t_max", "dt_out", "n_s", "symmetric", "term_order", "encoded_reference"});
    read_opt(d, "t_max", c.t_max);
    read_opt(d, "dt_out", c.dt_out);
    read_opt(d, "n_s", c.n_s);
    read_opt(d, "symmetric", c.symmetric);
    read_opt(d, "encoded_reference", c.encoded_reference);
    if (d.contains("term_order")) {
      c.term_order.clear();
      for (const auto& s : d.at("term_order")) c.term_order.push_back(term_from_name(s.get<std::string>()));
    }
  }
  if (j.contains("qpe")) {
    const json& q = j.at("qpe");
    detail::reject_unknown(q, "qpe", {"n_phase_qubits", "dt", "trotter_steps", "shots"});
    read_opt(q, "n_phase_qubits", c.n_phase_qubits);
    read_opt(q, "dt", c.qpe_dt);
    read_opt(q, "trotter_steps", c.qpe_trotter_steps);
    read_opt(q, "shots", c.shots);
  }
  if (j.contains("ground_state")) {
    const json& g = j.at("ground_state");
    detail::reject_unknown(g, "ground_state", {"sweep_lambda", "sweep_zeta", "lanczos_tol"});
    read_opt(g, "sweep_lambda", c.sweep_lambda);
    read_opt(g, "sweep_zeta", c.sweep_zeta);
    read_opt(g, "lanczos_tol", c.lanczos_tol);
  }
  if (j.contains("wstate")) {
    const json& w = j.at("wstate");
    detail::reject_unknown(w, "wstate", {"tolerance"});
    read_opt(w, "tolerance", c.w_tolerance);
  }
  if (j.contains("run")) {
    const json& r = j.at("run");
    detail::reject_unknown(r, "run", {"seed", "max_qubits", "threads", "out"});
    read_opt(r, "seed", c.seed);
    read_opt(r, "max_qubits", c.max_qubits);
    read_opt(r, "threads", c.threads);
    read_opt(r, "out", c.out);
  }
  c.validate();
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json order = json::array();
  for (auto t : c.term_order) order.push_back(term_name(t));
  return json{
      {"model", {{"t_e", c.t_e}, {"omega_b", c.omega_b}, {"n_sites", c.n_sites}, {"g_P", c.g_P}, {"g_B", c.g_B}}},
      {"encoding", {{"n_q", c.n_q}, {"M", c.M}, {"M_max", c.M_max}, {"converge", c.converge_truncation}}},
      {"dynamics",
       {{"t_max", c.t_max},
        {"dt_out", c.dt_out},
        {"n_s", c.n_s},
        {"symmetric", c.symmetric},
        {"term_order", order},
        {"encoded_reference", c.encoded_reference}}},
      {"qpe",
       {{"n_phase_qubits", c.n_phase_qubits},
        {"dt", c.qpe_dt},
        {"trotter_steps", c.qpe_trotter_steps},
        {"shots", c.shots}}},
      {"ground_state",
       {{"sweep_lambda", c.sweep_lambda}, {"sweep_zeta", c.sweep_zeta}, {"lanczos_tol", c.lanczos_tol}}},
      {"wstate", {{"tolerance", c.w_tolerance}}},
      {"run", {{"seed", c.seed}, {"max_qubits", c.max_qubits}, {"threads", c.threads}, {"out", c.out}}},
  };
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

/// Header object written as the first `#` line of every CSV.
inline json provenance_header(const ExperimentConfig& c, const std::string& command) {
  const ModelParams p = c.params();
  json derived = {{"lambda_P", effective_lambda_P(p)}};
  if (p.g_P > 0.0) derived["zeta"] = p.g_B / p.g_P;
  return json{{"command", command}, {"config", config_to_json(c)}, {"derived", derived}};
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// One row of a quench time series.
struct QuenchRecord {
  double time = 0.0;
  double L = 0.0;
  double re_G = 0.0;
  double im_G = 0.0;
  double total_bosons = 0.0;
  std::vector<double> chi;
  std::string source;  // "reference", "encoded" or "circuit"
  int n_s = 0;         // Trotter steps, circuit rows only
};

inline QuenchRecord make_record(double t, cplx G, double bosons, std::vector<double> chi, std::string source,
                                int n_s = 0) {
  QuenchRecord r;
  r.time = t;
  r.re_G = G.real();
  r.im_G = G.imag();
  r.L = r.re_G * r.re_G + r.im_G * r.im_G;
  r.total_bosons = bosons;
  r.chi = std::move(chi);
  r.source = std::move(source);
  r.n_s = n_s;
  return r;
}

/// Boson numbers and chi(d) of a register-encoded state; ancillas are ignored.
struct GridObservables {
  std::vector<double> boson_number;
  std::vector<double> chi;
  double total_bosons() const {
    double s = 0.0;
    for (double v : boson_number) s += v;
    return s;
  }
};

/// <b^dag b> = <(x^2 + p^2 - 2)/4> per site with x, p on the grid, and
/// chi(d) = (1/N) sum_n <n_n x_{n+d}>.
inline GridObservables grid_observables(const StateVector& s, const RegisterLayout& layout, const BosonGrid& grid) {
  const int n_sites = layout.n_sites();
  const std::size_t g = grid.n_points();
  const auto p2 = grid_p2_matrix(grid);
  const auto amps = s.amplitudes();
  GridObservables o;
  o.boson_number.assign(static_cast<std::size_t>(n_sites), 0.0);
  const auto offsets = correlation_offsets(n_sites);
  o.chi.assign(offsets.size(), 0.0);
  std::vector<std::vector<int>> regs;
  std::vector<std::size_t> masks;
  for (int n = 1; n <= n_sites; ++n) {
    regs.push_back(layout.boson_register(n));
    masks.push_back(detail::mask_of(regs.back()));
  }
  std::vector<std::vector<std::size_t>> scatter(static_cast<std::size_t>(n_sites), std::vector<std::size_t>(g));
  for (int n = 0; n < n_sites; ++n)
    for (std::size_t j = 0; j < g; ++j) scatter[n][j] = detail::scatter_bits(j, regs[n]);

  for (std::size_t i = 0; i < amps.size(); ++i) {
    const cplx a = amps[i];
    if (a == cplx{}) continue;
    const double w = std::norm(a);
    for (int n = 0; n < n_sites; ++n) {
      const std::size_t j = detail::gather_bits(i, regs[n]);
      const double x = grid.x_value(j);
      double acc = 0.25 * x * x - 0.5;
      cplx pp{};
      const std::size_t base = i & ~masks[n];
      for (std::size_t jp = 0; jp < g; ++jp) pp += std::conj(amps[base | scatter[n][jp]]) * p2[jp * g + j];
      o.boson_number[n] += w * acc + 0.25 * (pp * a).real();
    }
    for (int n = 0; n < n_sites; ++n) {
      if (!((i >> layout.excitation_qubit(n + 1)) & 1U)) continue;
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const int m = ((n + offsets[k]) % n_sites + n_sites) % n_sites;
        o.chi[k] += w * grid.x_value(detail::gather_bits(i, regs[m]));
      }
    }
  }
  for (auto& v : o.chi) v /= n_sites;
  return o;
}

/// W state on the excitation qubits and the grid vacuum on every oscillator.
inline StateVector prepare_initial_state(const RegisterLayout& layout, const BosonGrid& grid) {
  StateVector s(layout.total_qubits());
  apply_circuit(s, build_w_state_circuit(layout));
  const auto vac = vacuum_amplitudes(grid);
  std::vector<cplx> amps(vac.begin(), vac.end());
  for (int n = 1; n <= layout.n_sites(); ++n) inject_register(s, RegisterState{layout.boson_register(n), amps});
  return s;
}

/// Scatters a GridBasis vector into the system qubits of `layout`.
inline StateVector grid_vector_to_state(const GridBasis& b, std::span<const cplx> v, const RegisterLayout& layout) {
  StateVector s(layout.total_qubits());
  auto amps = s.amplitudes();
  amps[0] = 0.0;
  if (layout.w_ancilla()) {
    const std::size_t anc = std::size_t{1} << *layout.w_ancilla();
    for (std::size_t i = 0; i < b.dim(); ++i) amps[b.qubit_index(i) | anc] = v[i];
  } else {
    for (std::size_t i = 0; i < b.dim(); ++i) amps[b.qubit_index(i)] = v[i];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

/// Runs task(i) for i in [0, n) on `threads` workers; results are written by
/// index, so output order never depends on scheduling.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task) {
  int w = threads > 0 ? threads : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  w = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), std::max<std::size_t>(n, 1)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> pool;
  for (int k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = next++; i < n; i = next++) task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
        next = n;
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Exact reference with truncation control
// ---------------------------------------------------------------------------

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ground energy of each quasimomentum sector, index m <-> K = 2 pi m / N.
struct SectorEnergies {
  int M = 0;
  std::vector<double> K;
  std::vector<double> energy;
  int argmin() const {
    return static_cast<int>(std::min_element(energy.begin(), energy.end()) - energy.begin());
  }
  double ground() const { return *std::min_element(energy.begin(), energy.end()); }
};

inline SectorEnergies sector_ground_energies(const ModelParams& p, int M, const LanczosOptions& opt) {
  const FockBasis b = enumerate_basis(p.n_sites, M);
  const auto h = build_hamiltonian(p, b);
  SectorEnergies s;
  s.M = M;
  s.K = allowed_quasimomenta(p.n_sites);
  for (int m = 0; m < p.n_sites; ++m) {
    const auto sec = momentum_sector_index(b, m);
    s.energy.push_back(lanczos_ground_state(project_H(h, sec), opt).energy);
  }
  return s;
}

struct ReferenceSeries {
  int M = 0;
  bool converged = false;
  double E0_K0 = 0.0;
  std::vector<QuenchRecord> rows;
  std::vector<std::string> log;
};

/// Quench series of W x vacuum in the truncated Fock space, propagated in the
/// K = 0 sector and restarted from psi(t) at every output time.
inline std::vector<QuenchRecord> fock_quench_series(const ModelParams& p, int M, const std::vector<double>& times,
                                                    double* e0_out = nullptr, const LanczosOptions& opt = {}) {
  const FockBasis b = enumerate_basis(p.n_sites, M);
  const auto h = build_hamiltonian(p, b);
  const auto sec = momentum_sector_index(b, 0);
  const auto hk = project_H(h, sec);
  if (e0_out) *e0_out = lanczos_ground_state(hk, opt).energy;
  const auto psi0_full = w_vacuum_state(b);
  auto psi = extract(sec, psi0_full);
  const auto psi0 = psi;
  ChebyshevPropagator prop(hk);
  std::vector<QuenchRecord> rows;
  double t_prev = 0.0;
  for (double t : times) {
    psi = prop.propagate_checked(psi, t - t_prev);
    t_prev = t;
    const auto full = embed(sec, psi);
    const auto corr = correlations(full, b);
    rows.push_back(make_record(t, dotc<cplx>(psi0, psi), corr.total_bosons(), corr.chi, "reference"));
  }
  return rows;
}

/// Raises M from `cfg.M` until the K = 0 ground energy moves by < 1e-8 t_e and
/// L and the boson number move by < 1e-4; aborts past M_max.
inline ReferenceSeries converged_reference(const ExperimentConfig& cfg, const std::vector<double>& times) {
  const ModelParams p = cfg.params();
  LanczosOptions opt;
  opt.tol = cfg.lanczos_tol;
  opt.seed = cfg.seed;
  ReferenceSeries out;
  double e_prev = 0.0;
  std::vector<QuenchRecord> prev;
  for (int M = cfg.M; M <= cfg.M_max; ++M) {
    double e0 = 0.0;
    auto rows = fock_quench_series(p, M, times, &e0, opt);
    if (!cfg.converge_truncation) {
      out = ReferenceSeries{M, true, e0, std::move(rows), {"truncation fixed at M=" + std::to_string(M)}};
      return out;
    }
    if (!prev.empty()) {
      double dobs = 0.0;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        dobs = std::max(dobs, std::abs(rows[k].L - prev[k].L));
        dobs = std::max(dobs, std::abs(rows[k].total_bosons - prev[k].total_bosons));
      }
      const double de = std::abs(e0 - e_prev);
      std::ostringstream os;
      os << "M=" << M << " |dE0|=" << de << " max|dObs|=" << dobs;
      out.log.push_back(os.str());
      if (de < 1e-8 * p.t_e && dobs < 1e-4) {
        out.M = M;
        out.converged = true;
        out.E0_K0 = e0;
        out.rows = std::move(rows);
        return out;
      }
    }
    e_prev = e0;
    prev = std::move(rows);
  }
  std::ostringstream os;
  os << "truncation did not converge up to M_max=" << cfg.M_max;
  for (const auto& l : out.log) os << "; " << l;
  throw TruncationError(os.str());
}

/// Quench series of the grid-encoded Hamiltonian (same encoding as the circuit).
inline std::vector<QuenchRecord> encoded_quench_series(const ModelParams& p, const BosonGrid& grid,
                                                       const std::vector<double>& times) {
  const GridBasis b(p.n_sites, grid);
  const auto h = build_grid_hamiltonian(p, b);
  const RegisterLayout layout(p.n_sites, grid.n_q, RegisterLayout::Ancillas{false, false, 0});
  const auto psi0 = grid_w_vacuum_state(b);
  auto psi = psi0;
  ChebyshevPropagator prop(h);
  std::vector<QuenchRecord> rows;
  double t_prev = 0.0;
  for (double t : times) {
    psi = prop.propagate_checked(psi, t - t_prev);
    t_prev = t;
    const auto obs = grid_observables(grid_vector_to_state(b, psi, layout), layout, grid);
    rows.push_back(make_record(t, dotc<cplx>(psi0, psi), obs.total_bosons(), obs.chi, "encoded"));
  }
  return rows;
}

/// Circuit series: each output time t runs n_s Trotter steps of length t / n_s.
inline std::vector<QuenchRecord> circuit_quench_series(const ModelParams& p, const BosonGrid& grid, int n_s,
                                                       const std::vector<double>& times, bool symmetric,
                                                       const std::vector<TrotterTerm>& order, int threads = 1) {
  const RegisterLayout layout(p.n_sites, grid.n_q);
  const StateVector psi0 = prepare_initial_state(layout, grid);
  std::vector<QuenchRecord> rows(times.size());
  parallel_for(times.size(), threads, [&](std::size_t k) {
    TrotterPlan plan;
    plan.total_time = times[k];
    plan.n_steps = n_s;
    plan.symmetric = symmetric;
    plan.order = order;
    StateVector s = psi0;
    if (times[k] != 0.0) {
      const Circuit step = build_trotter_step(p, layout, grid, plan.step(), plan);
      for (int i = 0; i < n_s; ++i) apply_circuit(s, step);
    }
    const auto obs = grid_observables(s, layout, grid);
    rows[k] = make_record(times[k], overlap(psi0, s), obs.total_bosons(), obs.chi, "circuit", n_s);
  });
  return rows;
}

inline std::vector<double> output_times(double t_max, double dt_out) {
  const int n = static_cast<int>(std::floor(t_max / dt_out + 1e-9));
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(k * dt_out);
  return t;
}

inline double max_deviation_L(const std::vector<QuenchRecord>& a, const std::vector<QuenchRecord>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_deviation_L: series length mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k].L - b[k].L));
  return d;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string quench_csv(const json& header, const std::vector<QuenchRecord>& rows, int n_sites) {
  std::ostringstream os;
  os << "# " << header.dump() << "\n";
  os << "time,L,re_G,im_G,total_bosons";
  for (int d : correlation_offsets(n_sites)) os << ",chi_" << d;
  os << ",source,n_s\n";
  for (const auto& r : rows) {
    os << fmt(r.time) << ',' << fmt(r.L) << ',' << fmt(r.re_G) << ',' << fmt(r.im_G) << ','
       << fmt(r.total_bosons);
    for (double c : r.chi) os << ',' << fmt(c);
    os << ',' << r.source << ',' << r.n_s << "\n";
  }
  return os.str();
}

struct CommandResult {
  int exit_code = 0;
  json report;
};

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Builds and simulates the W circuit on N qubits plus one auxiliary.
inline CommandResult cmd_wstate(int n_sites, double tolerance) {
  const Circuit c = build_w_state_circuit(n_sites);
  StateVector s(c.n_qubits());
  apply_circuit(s, c);
  const double a = 1.0 / std::sqrt(static_cast<double>(n_sites));
  cplx ov{};
  for (int n = 0; n < n_sites; ++n) ov += a * s[(std::size_t{1} << n) | (std::size_t{1} << n_sites)];
  const double fidelity = std::norm(ov);
  const auto res = count_resources(c);
  const auto lowered = count_resources(lower_to_cnot(c));
  CommandResult r;
  r.report = {{"command", "wstate"},
              {"n_sites", n_sites},
              {"fidelity", fidelity},
              {"tolerance", tolerance},
              {"gates", res.total_gates},
              {"two_qubit_gates", res.two_qubit_gates},
              {"depth", res.depth},
              {"cnot_gates_lowered", lowered.histogram.count("CNOT") ? lowered.histogram.at("CNOT") : 0},
              {"pass", fidelity >= 1.0 - tolerance}};
  r.exit_code = fidelity >= 1.0 - tolerance ? 0 : 1;
  return r;
}

inline CommandResult cmd_wstate(const ExperimentConfig& cfg) {
  auto r = cmd_wstate(cfg.n_sites, cfg.w_tolerance);
  write_text(std::filesystem::path(cfg.out) / "wstate.json", r.report.dump(2) + "\n");
  return r;
}

struct QpeOutcome {
  int n_qubits = 0;
  std::vector<double> distribution;  // over readout k
  int modal_bin = 0;
  double modal_phase = 0.0;   // k / 2^m
  double modal_energy = 0.0;  // -2 pi phase / dt folded into (-pi/dt, pi/dt]
  double bin_width_energy = 0.0;
  double prep_norm_check = 0.0;
};

/// Phase in [0, 1) of exp(-i E dt).
inline double energy_to_phase(double energy, double dt) {
  double ph = -energy * dt / (2.0 * std::numbers::pi);
  ph -= std::floor(ph);
  return ph;
}

inline double phase_to_energy(double phase, double dt) {
  double ph = phase - std::round(phase);
  return -2.0 * std::numbers::pi * ph / dt;
}

/// Circular distance between two phases in units of turns.
inline double phase_distance(double a, double b) {
  const double d = a - b;
  return std::abs(d - std::round(d));
}

/// QPE of u = Trotter evolution over dt on the prepared W x vacuum state.
inline QpeOutcome run_qpe(const ModelParams& p, const BosonGrid& grid, int n_phase, double dt, int trotter_steps,
                          bool symmetric, const std::vector<TrotterTerm>& order) {
  const RegisterLayout layout(p.n_sites, grid.n_q, RegisterLayout::Ancillas{true, false, n_phase});
  TrotterPlan plan;
  plan.total_time = dt;
  plan.n_steps = trotter_steps;
  plan.symmetric = symmetric;
  plan.order = order;
  const Circuit u = build_trotter_evolution(p, layout, grid, plan);
  StateVector s = prepare_initial_state(layout, grid);
  const auto phase = layout.phase_register();
  for (int q : phase) apply_gate(s, gate::h(q));
  const std::size_t bins = std::size_t{1} << n_phase;
  for (std::size_t j = 0; j < phase.size(); ++j) {
    const Circuit cu = controlled(u, phase[j]);
    for (std::size_t r = 0; r < (std::size_t{1} << j); ++r) apply_circuit(s, cu);
  }
  apply_circuit(s, inverse(build_qft(phase, layout.total_qubits())));
  QpeOutcome o;
  o.n_qubits = layout.total_qubits();
  o.distribution = measure_register(s, phase);
  o.modal_bin = static_cast<int>(std::max_element(o.distribution.begin(), o.distribution.end()) -
                                 o.distribution.begin());
  o.modal_phase = static_cast<double>(o.modal_bin) / static_cast<double>(bins);
  o.modal_energy = phase_to_energy(o.modal_phase, dt);
  o.bin_width_energy = 2.0 * std::numbers::pi / (static_cast<double>(bins) * dt);
  o.prep_norm_check = s.norm();
  return o;
}

/// Qubits needed by the circuit path of a config (system + W ancilla + extra).
inline int circuit_qubits(const ExperimentConfig& cfg, int extra = 0) {
  return cfg.n_sites * (1 + cfg.n_q) + 1 + extra;
}

/// Threshold where the global ground state leaves K = 0, by linear
/// interpolation of E(K=0) - min_{K != 0} E(K) between sweep points.
inline std::optional<double> locate_crossing(const std::vector<double>& lambdas,
                                             const std::vector<SectorEnergies>& e) {
  auto gap = [&](std::size_t i) {
    double other = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < e[i].energy.size(); ++k) other = std::min(other, e[i].energy[k]);
    return e[i].energy[0] - other;
  };
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    const double g0 = gap(i), g1 = gap(i + 1);
    if (g0 < 0.0 && g1 >= 0.0) {
      if (g1 == g0) return lambdas[i + 1];
      return lambdas[i] + (lambdas[i + 1] - lambdas[i]) * (-g0) / (g1 - g0);
    }
  }
  return std::nullopt;
}

/// Overlap |<W x vac | ground state of the K = 0 block>|^2 in the Fock basis.
inline double prep_ground_overlap(const ModelParams& p, int M, const LanczosOptions& opt) {
  const FockBasis b = enumerate_basis(p.n_sites, M);
  const auto sec = momentum_sector_index(b, 0);
  const auto hk = project_H(build_hamiltonian(p, b), sec);
  const auto gs = lanczos_ground_state(hk, opt);
  const auto prep = extract(sec, w_vacuum_state(b));
  return std::norm(dotc<cplx>(prep, gs.vector));
}

inline CommandResult cmd_ground_state(const ExperimentConfig& cfg) {
  const ModelParams p = cfg.params();
  p.validate();
  LanczosOptions opt;
  opt.tol = cfg.lanczos_tol;
  opt.seed = cfg.seed;
  CommandResult r;
  json rep = {{"command", "ground-state"}};

  // Truncation protocol on the global ground energy.
  SectorEnergies se = sector_ground_energies(p, cfg.M, opt);
  bool converged = !cfg.converge_truncation;
  json trunc = json::array();
  for (int M = cfg.M + 1; cfg.converge_truncation && M <= cfg.M_max; ++M) {
    SectorEnergies next = sector_ground_energies(p, M, opt);
    const double de = std::abs(next.ground() - se.ground());
    trunc.push_back({{"M", M}, {"dE0", de}});
    se = std::move(next);
    if (de < 1e-8 * p.t_e) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    rep["error"] = "truncation did not converge up to M_max";
    rep["truncation"] = trunc;
    r.report = rep;
    r.exit_code = 2;
    return r;
  }
  rep["lanczos"] = {{"M", se.M},        {"K", se.K},       {"E_K", se.energy},
                    {"E0", se.ground()}, {"K_ground", se.K[static_cast<std::size_t>(se.argmin())]},
                    {"tol", cfg.lanczos_tol}, {"truncation", trunc}};

  const double overlap0 = prep_ground_overlap(p, se.M, opt);
  const int nq = circuit_qubits(cfg, cfg.n_phase_qubits);
  if (nq <= cfg.max_qubits) {
    const auto q = run_qpe(p, BosonGrid(cfg.n_q), cfg.n_phase_qubits, cfg.qpe_dt, cfg.qpe_trotter_steps,
                           cfg.symmetric, cfg.term_order);
    const double target = energy_to_phase(se.ground(), cfg.qpe_dt);
    const double dist_bins = phase_distance(q.modal_phase, target) * static_cast<double>(q.distribution.size());
    rep["qpe"] = {{"qubits", q.n_qubits},
                  {"modal_bin", q.modal_bin},
                  {"modal_phase", q.modal_phase},
                  {"modal_probability", q.distribution[static_cast<std::size_t>(q.modal_bin)]},
                  {"E_qpe", q.modal_energy},
                  {"bin_width", q.bin_width_energy},
                  {"target_phase", target},
                  {"distance_bins", dist_bins},
                  {"prep_ground_overlap", overlap0},
                  {"within_one_bin", dist_bins <= 1.0}};
    if (overlap0 < 0.5) rep["qpe"]["warning"] = "prepared-state ground overlap below 0.5; the modal bin may mislocate";
  } else {
    rep["qpe"] = {{"skipped", "circuit needs " + std::to_string(nq) + " qubits > max_qubits " +
                                  std::to_string(cfg.max_qubits)}};
  }

  if (!cfg.sweep_lambda.empty()) {
    std::vector<SectorEnergies> rows(cfg.sweep_lambda.size());
    parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
      const ModelParams q = params_from_lambda(p.t_e, p.omega_b, cfg.sweep_lambda[i], cfg.sweep_zeta, p.n_sites);
      rows[i] = sector_ground_energies(q, se.M, opt);
    });
    std::ostringstream os;
    os << "# " << provenance_header(cfg, "ground-state").dump() << "\n";
    os << "lambda_P";
    for (int m = 0; m < p.n_sites; ++m) os << ",E_K" << m;
    os << ",E0,K_ground\n";
    bool monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      os << fmt(cfg.sweep_lambda[i]);
      for (double e : rows[i].energy) os << ',' << fmt(e);
      os << ',' << fmt(rows[i].ground()) << ',' << fmt(rows[i].K[static_cast<std::size_t>(rows[i].argmin())])
         << "\n";
      if (i > 0 && cfg.sweep_lambda[i] > cfg.sweep_lambda[i - 1] && rows[i].ground() > rows[i - 1].ground() + 1e-12)
        monotone = false;
    }
    write_text(std::filesystem::path(cfg.out) / "sweep.csv", os.str());
    const auto thr = locate_crossing(cfg.sweep_lambda, rows);
    rep["sweep"] = {{"zeta", cfg.sweep_zeta}, {"points", rows.size()}, {"E0_monotone_decreasing", monotone}};
    rep["sweep"]["crossing_lambda_P"] = thr ? json(*thr) : json(nullptr);
  }
  r.report = rep;
  write_text(std::filesystem::path(cfg.out) / "ground_state.json", rep.dump(2) + "\n");
  return r;
}

inline CommandResult cmd_qpe(const ExperimentConfig& cfg) {
  const ModelParams p = cfg.params();
  p.validate();
  CommandResult r;
  const int nq = circuit_qubits(cfg, cfg.n_phase_qubits);
  if (nq > cfg.max_qubits) {
    r.exit_code = 2;
    r.report = {{"command", "qpe"},
                {"error", "circuit needs " + std::to_string(nq) + " qubits > max_qubits " +
                              std::to_string(cfg.max_qubits)}};
    return r;
  }
  const auto q = run_qpe(p, BosonGrid(cfg.n_q), cfg.n_phase_qubits, cfg.qpe_dt, cfg.qpe_trotter_steps, cfg.symmetric,
                         cfg.term_order);
  std::vector<std::size_t> counts;
  if (cfg.shots > 0) counts = sample_counts(q.distribution, cfg.shots, cfg.seed);
  std::ostringstream os;
  os << "# " << provenance_header(cfg, "qpe").dump() << "\n";
  os << "bin,phase,energy,probability" << (cfg.shots > 0 ? ",counts" : "") << "\n";
  const double bins = static_cast<double>(q.distribution.size());
  for (std::size_t k = 0; k < q.distribution.size(); ++k) {
    os << k << ',' << fmt(k / bins) << ',' << fmt(phase_to_energy(k / bins, cfg.qpe_dt)) << ','
       << fmt(q.distribution[k]);
    if (cfg.shots > 0) os << ',' << counts[k];
    os << "\n";
  }
  write_text(std::filesystem::path(cfg.out) / "qpe.csv", os.str());
  r.report = {{"command", "qpe"},
              {"qubits", q.n_qubits},
              {"modal_bin", q.modal_bin},
              {"modal_phase", q.modal_phase},
              {"E_qpe", q.modal_energy},
              {"bin_width", q.bin_width_energy}};
  write_text(std::filesystem::path(cfg.out) / "qpe.json", r.report.dump(2) + "\n");
  return r;
}

struct QuenchResult {
  ReferenceSeries reference;
  std::vector<QuenchRecord> encoded;
  std::map<int, std::vector<QuenchRecord>> circuit;
  json summary;
};

inline QuenchResult run_quench(const ExperimentConfig& cfg) {
  const ModelParams p = cfg.params();
  p.validate();
  const auto times = output_times(cfg.t_max, cfg.dt_out);
  const BosonGrid grid(cfg.n_q);
  QuenchResult res;
  res.reference = converged_reference(cfg, times);
  json summary = {{"command", "quench"},
                  {"reference", {{"M", res.reference.M}, {"converged", res.reference.converged},
                                 {"E0_K0", res.reference.E0_K0}, {"log", res.reference.log}}}};
  const bool circuit_ok = circuit_qubits(cfg) <= cfg.max_qubits;
  if (cfg.encoded_reference && circuit_ok) res.encoded = encoded_quench_series(p, grid, times);
  if (circuit_ok) {
    std::vector<std::vector<QuenchRecord>> runs(cfg.n_s.size());
    // (n_s, t) tasks flattened for the pool
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t a = 0; a < cfg.n_s.size(); ++a) {
      runs[a].resize(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) tasks.emplace_back(a, k);
    }
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
      const auto [a, k] = tasks[i];
      runs[a][k] = circuit_quench_series(p, grid, cfg.n_s[a], {times[k]}, cfg.symmetric, cfg.term_order, 1)[0];
    });
    json dev = json::array();
    for (std::size_t a = 0; a < cfg.n_s.size(); ++a) {
      json row = {{"n_s", cfg.n_s[a]}, {"max_dev_L_reference", max_deviation_L(runs[a], res.reference.rows)}};
      if (!res.encoded.empty()) row["max_dev_L_encoded"] = max_deviation_L(runs[a], res.encoded);
      dev.push_back(row);
      res.circuit[cfg.n_s[a]] = std::move(runs[a]);
    }
    for (std::size_t a = 1; a < dev.size(); ++a) {
      if (cfg.n_s[a] <= cfg.n_s[a - 1]) continue;
      for (const char* key : {"max_dev_L_reference", "max_dev_L_encoded"}) {
        if (!dev[a].contains(key)) continue;
        const double d1 = dev[a][key].get<double>();
        dev[a][std::string("ratio_") + key] = d1 > 0.0 ? dev[a - 1][key].get<double>() / d1 : 0.0;
      }
    }
    summary["deviation"] = dev;
  } else {
    summary["circuit"] = "skipped: needs " + std::to_string(circuit_qubits(cfg)) + " qubits > max_qubits " +
                         std::to_string(cfg.max_qubits);
  }
  res.summary = summary;
  return res;
}

inline CommandResult cmd_quench(const ExperimentConfig& cfg) {
  CommandResult r;
  QuenchResult q;
  try {
    q = run_quench(cfg);
  } catch (const TruncationError& e) {
    r.exit_code = 2;
    r.report = {{"command", "quench"}, {"error", e.what()}};
    return r;
  }
  const json header = provenance_header(cfg, "quench");
  std::vector<QuenchRecord> all = q.reference.rows;
  all.insert(all.end(), q.encoded.begin(), q.encoded.end());
  for (const auto& [ns, rows] : q.circuit) all.insert(all.end(), rows.begin(), rows.end());
  const std::filesystem::path out(cfg.out);
  write_text(out / "quench.csv", quench_csv(header, all, cfg.n_sites));
  write_text(out / "quench_reference.csv", quench_csv(header, q.reference.rows, cfg.n_sites));
  if (!q.encoded.empty()) write_text(out / "quench_encoded.csv", quench_csv(header, q.encoded, cfg.n_sites));
  for (const auto& [ns, rows] : q.circuit)
    write_text(out / ("quench_circuit_ns" + std::to_string(ns) + ".csv"), quench_csv(header, rows, cfg.n_sites));
  write_text(out / "quench_summary.json", q.summary.dump(2) + "\n");
  r.report = q.summary;
  return r;
}

}  // namespace pdqs
