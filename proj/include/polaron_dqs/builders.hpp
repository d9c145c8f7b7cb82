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
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "polaron_dqs/circuit.hpp"
#include "polaron_dqs/layout.hpp"
#include "polaron_dqs/model.hpp"

namespace pdqs {

// ---------------------------------------------------------------------------
// W-state preparation
// ---------------------------------------------------------------------------

/// phi_n with sin(phi_n) = (N + 1 - n)^(-1/2), n = 1..N (returned 0-based).
inline std::vector<double> w_state_angles(int n_sites) {
  if (n_sites < 1) throw std::invalid_argument("w_state_angles: N must be >= 1");
  std::vector<double> phi(static_cast<std::size_t>(n_sites));
  for (int n = 1; n <= n_sites; ++n)
    phi[static_cast<std::size_t>(n - 1)] = std::atan2(1.0, std::sqrt(static_cast<double>(n_sites - n)));
  return phi;
}

/// Entangler U_n(phi) on (q_aux, q_n): fixes |01>, |10> and rotates
/// |00> -> cos|00> + sin|11>, |11> -> cos|11> - sin|00>.
///
/// CNOT(aux->n) maps span{|00>,|11>} onto the n = 0 slice, where a
/// NOT-conjugated controlled Ry(2 phi) does the rotation.
inline Circuit build_entangler(double phi, int q_aux, int q_n, int n_qubits) {
  if (q_aux == q_n) throw std::invalid_argument("build_entangler: operand indices clash");
  Circuit c(n_qubits);
  c.append(gate::cnot(q_aux, q_n))
      .append(gate::x(q_n))
      .append(gate::cry(q_n, q_aux, 2.0 * phi))
      .append(gate::x(q_n))
      .append(gate::cnot(q_aux, q_n));
  return c;
}

/// Sequential W preparation along the chain `chain` = [p_0, ..., p_N].
///
/// The auxiliary role starts at p_0 and moves one step per SWAP, so qubit n
/// ends on p_{n-1} and the auxiliary (left in |1>) on p_N.
inline Circuit build_w_state_chain(const std::vector<int>& chain, int n_qubits) {
  const int n_sites = static_cast<int>(chain.size()) - 1;
  const auto phi = w_state_angles(n_sites);
  Circuit c(n_qubits);
  for (int n = 1; n <= n_sites; ++n) {
    const int aux = chain[static_cast<std::size_t>(n - 1)];
    const int tgt = chain[static_cast<std::size_t>(n)];
    c.append(build_entangler(phi[static_cast<std::size_t>(n - 1)], aux, tgt, n_qubits));
    c.append(gate::swap(aux, tgt));
  }
  return c;
}

/// N + 1 qubits: W_N on qubits 0..N-1, auxiliary |1> on qubit N.
inline Circuit build_w_state_circuit(int n_sites) {
  if (n_sites < 1) throw std::invalid_argument("build_w_state_circuit: N must be >= 1");
  std::vector<int> chain(static_cast<std::size_t>(n_sites + 1));
  for (int i = 0; i <= n_sites; ++i) chain[static_cast<std::size_t>(i)] = i;
  return build_w_state_chain(chain, n_sites + 1);
}

/// W_N on the excitation qubits of `layout`, auxiliary on its W ancilla.
inline Circuit build_w_state_circuit(const RegisterLayout& layout) {
  const auto anc = layout.w_ancilla();
  if (!anc) throw std::invalid_argument("build_w_state_circuit: layout has no W ancilla");
  auto chain = layout.excitation_qubits();
  chain.push_back(*anc);
  return build_w_state_chain(chain, layout.total_qubits());
}

// ---------------------------------------------------------------------------
// Small circuit idioms
// ---------------------------------------------------------------------------

/// exp(-i (angle/2) Z_q1 ... Z_qk) via a CNOT parity ladder onto the last qubit.
inline void append_parity_rotation(Circuit& c, const std::vector<int>& qubits, double angle) {
  for (std::size_t i = 0; i + 1 < qubits.size(); ++i) c.append(gate::cnot(qubits[i], qubits[i + 1]));
  c.append(gate::rz(qubits.back(), angle));
  for (std::size_t i = qubits.size() - 1; i-- > 0;) c.append(gate::cnot(qubits[i], qubits[i + 1]));
}

/// exp(-i theta ((j - c) s)^2) on a register holding j = sum_r 2^r b_r.
///
/// Expanding j^2 gives per-bit phases 4^r - 2 c 2^r and pairwise phases
/// 2^(r+s+1); the constant c^2 goes to the global phase.
inline void append_quadratic_phase(Circuit& c, const std::vector<int>& reg, double spacing,
                                   double theta) {
  if (theta == 0.0) return;
  const double n = static_cast<double>(std::size_t{1} << reg.size());
  const double center = 0.5 * (n - 1.0);
  const double a = theta * spacing * spacing;
  c.add_global_phase(-a * center * center);
  for (std::size_t r = 0; r < reg.size(); ++r) {
    const double w = std::ldexp(1.0, static_cast<int>(r));
    c.append(gate::phase(reg[r], a * (w * w - 2.0 * center * w)));
  }
  for (std::size_t r = 0; r < reg.size(); ++r)
    for (std::size_t s = r + 1; s < reg.size(); ++s)
      c.append(gate::cphase(reg[r], reg[s], a * std::ldexp(1.0, static_cast<int>(r + s + 1))));
}

/// Quantum Fourier transform |j> -> 2^(-L/2) sum_m exp(2 pi i j m / 2^L) |m>,
/// reg[0] least significant.
inline Circuit build_qft(const std::vector<int>& reg, int n_qubits) {
  if (reg.empty()) throw std::invalid_argument("build_qft: empty register");
  const int L = static_cast<int>(reg.size());
  Circuit c(n_qubits);
  for (int k = L - 1; k >= 0; --k) {
    c.append(gate::h(reg[static_cast<std::size_t>(k)]));
    for (int l = k - 1; l >= 0; --l)
      c.append(gate::cphase(reg[static_cast<std::size_t>(l)], reg[static_cast<std::size_t>(k)],
                            -2.0 * std::numbers::pi / std::ldexp(1.0, k - l + 1)));
  }
  for (int i = 0; i < L / 2; ++i)
    c.append(gate::swap(reg[static_cast<std::size_t>(i)], reg[static_cast<std::size_t>(L - 1 - i)]));
  return c;
}

// ---------------------------------------------------------------------------
// Free bosons
// ---------------------------------------------------------------------------

inline void check_grid(const RegisterLayout& layout, const BosonGrid& grid) {
  if (layout.n_q() != grid.n_q)
    throw std::invalid_argument("boson circuit: layout n_q differs from grid n_q");
  if (layout.n_q() < 1) throw std::invalid_argument("boson circuit: layout has no boson qubits");
}

/// exp(-i theta x^2) on the boson register of `site`.
inline Circuit build_boson_x2_step(double theta, int site, const RegisterLayout& layout,
                                   const BosonGrid& grid) {
  check_grid(layout, grid);
  Circuit c(layout.total_qubits());
  append_quadratic_phase(c, layout.boson_register(site), grid.delta, theta);
  return c;
}

/// exp(-i theta p^2) on the boson register of `site`, p = -2i d/dx on the grid.
///
/// With x_j = (j - c) delta and p_m = (m - c) delta_p, delta delta_p = 4 pi / 2^n_q,
/// the centered transform is F = D_m QFT^dag D_j up to a constant, where
/// D_j = diag(exp(2 pi i c j / 2^n_q)). D_m commutes with the diagonal and drops out.
inline Circuit build_boson_p2_step(double theta, int site, const RegisterLayout& layout,
                                   const BosonGrid& grid) {
  check_grid(layout, grid);
  const auto reg = layout.boson_register(site);
  const int nq = layout.total_qubits();
  Circuit c(nq);
  if (theta == 0.0) return c;
  const double n = static_cast<double>(grid.n_points());
  const double center = grid.center();
  Circuit shift(nq);
  for (std::size_t r = 0; r < reg.size(); ++r)
    shift.append(gate::phase(reg[r], -2.0 * std::numbers::pi * center * std::ldexp(1.0, static_cast<int>(r)) / n));
  const Circuit qft = build_qft(reg, nq);
  c.append(shift);
  c.append(inverse(qft));
  append_quadratic_phase(c, reg, grid.momentum_spacing(), theta);
  c.append(qft);
  c.append(inverse(shift));
  return c;
}

// ---------------------------------------------------------------------------
// Fermion hopping and interactions
// ---------------------------------------------------------------------------

struct HoppingOptions {
  /// Drop the seam Z string; exact only in the single-excitation sector.
  bool drop_boundary_string = false;
};

/// Qubits of the Pauli support of the hopping image for the bond starting at `site`.
inline std::vector<int> bond_support(int site, const RegisterLayout& layout, bool drop_string) {
  const int a = layout.excitation_qubit(site);
  const int b = layout.excitation_qubit(layout.next_site(site));
  const int lo = std::min(a, b), hi = std::max(a, b);
  std::vector<int> qs{lo};
  if (!drop_string)
    for (int q = lo + 1; q < hi; ++q) qs.push_back(q);
  qs.push_back(hi);
  return qs;
}

namespace detail {

enum class Basis { X, Y };

inline void basis_in(Circuit& c, Basis b, int q0, int q1) {
  if (b == Basis::X) {
    c.append(gate::h(q0)).append(gate::h(q1));
  } else {
    c.append(gate::rx(q0, std::numbers::pi / 2)).append(gate::rx(q1, std::numbers::pi / 2));
  }
}
inline void basis_out(Circuit& c, Basis b, int q0, int q1) {
  if (b == Basis::X) {
    c.append(gate::h(q0)).append(gate::h(q1));
  } else {
    c.append(gate::rx(q0, -std::numbers::pi / 2)).append(gate::rx(q1, -std::numbers::pi / 2));
  }
}

}  // namespace detail

/// exp(+i theta (X_n X_{n+1} + Y_n Y_{n+1}) / 2) for one bond (with its JW string).
/// XX and YY commute on a bond, so the two factors are exact.
inline Circuit build_hopping_bond(double theta, int site, const RegisterLayout& layout,
                                  HoppingOptions opt = {}) {
  if (layout.n_sites() < 2) throw std::invalid_argument("hopping: need at least two sites");
  Circuit c(layout.total_qubits());
  const auto qs = bond_support(site, layout, opt.drop_boundary_string);
  for (auto b : {detail::Basis::X, detail::Basis::Y}) {
    detail::basis_in(c, b, qs.front(), qs.back());
    append_parity_rotation(c, qs, -theta);
    detail::basis_out(c, b, qs.front(), qs.back());
  }
  return c;
}

/// Product over bonds n = 1..N of the bond factors.
inline Circuit build_hopping_step(double theta, const RegisterLayout& layout, HoppingOptions opt = {}) {
  Circuit c(layout.total_qubits());
  for (int n = 1; n <= layout.n_sites(); ++n) c.append(build_hopping_bond(theta, n, layout, opt));
  return c;
}

/// exp(-i theta n_site (x_{site-1} - x_{site+1})) as boson-controlled phase gates
/// onto the excitation qubit: the displacement difference is bit-linear,
/// x_{n-1} - x_{n+1} = delta sum_r 2^r (b^r_{n-1} - b^r_{n+1}), so the grid offsets
/// cancel and each bit contributes one controlled T(+-2^r delta theta).
inline Circuit build_breathing_step(double theta, int site, const RegisterLayout& layout,
                                    const BosonGrid& grid) {
  check_grid(layout, grid);
  Circuit c(layout.total_qubits());
  const int left = layout.prev_site(site);
  const int right = layout.next_site(site);
  if (left == right || theta == 0.0) return c;  // N = 2: the two neighbours coincide
  const int e = layout.excitation_qubit(site);
  for (int r = 0; r < layout.n_q(); ++r) {
    const double w = std::ldexp(grid.delta * theta, r);
    c.append(gate::cphase(layout.boson_qubit(left, r), e, w));
    c.append(gate::cphase(layout.boson_qubit(right, r), e, -w));
  }
  return c;
}

/// exp(-i (theta/2) Z_n Z_{n+1} [Z string] (x_{n+1} - x_n)): parity ladder, then
/// one controlled Rz(+-2^r delta theta) per boson bit of the two bond sites.
inline Circuit build_peierls_core(double theta, int site, const RegisterLayout& layout,
                                  const BosonGrid& grid, HoppingOptions opt = {}) {
  check_grid(layout, grid);
  if (layout.n_sites() < 2) throw std::invalid_argument("peierls: need at least two sites");
  Circuit c(layout.total_qubits());
  const auto qs = bond_support(site, layout, opt.drop_boundary_string);
  const int next = layout.next_site(site);
  for (std::size_t i = 0; i + 1 < qs.size(); ++i) c.append(gate::cnot(qs[i], qs[i + 1]));
  for (int r = 0; r < layout.n_q(); ++r) {
    const double w = std::ldexp(grid.delta * theta, r);
    c.append(gate::crz(layout.boson_qubit(next, r), qs.back(), w));
    c.append(gate::crz(layout.boson_qubit(site, r), qs.back(), -w));
  }
  for (std::size_t i = qs.size() - 1; i-- > 0;) c.append(gate::cnot(qs[i], qs[i + 1]));
  return c;
}

/// U_Y(theta) U_X(theta) for the bond starting at `site`.
inline Circuit build_peierls_step(double theta, int site, const RegisterLayout& layout,
                                  const BosonGrid& grid, HoppingOptions opt = {}) {
  Circuit c(layout.total_qubits());
  if (theta == 0.0) return c;
  const auto qs = bond_support(site, layout, opt.drop_boundary_string);
  const Circuit core = build_peierls_core(theta, site, layout, grid, opt);
  for (auto b : {detail::Basis::X, detail::Basis::Y}) {
    detail::basis_in(c, b, qs.front(), qs.back());
    c.append(core);
    detail::basis_out(c, b, qs.front(), qs.back());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Trotter assembly
// ---------------------------------------------------------------------------

enum class TrotterTerm { boson_x2, boson_p2, hopping, peierls, breathing };

inline const char* term_name(TrotterTerm t) {
  switch (t) {
    case TrotterTerm::boson_x2: return "boson_x2";
    case TrotterTerm::boson_p2: return "boson_p2";
    case TrotterTerm::hopping: return "hopping";
    case TrotterTerm::peierls: return "peierls";
    case TrotterTerm::breathing: return "breathing";
  }
  return "?";
}

inline TrotterTerm term_from_name(const std::string& s) {
  for (auto t : {TrotterTerm::boson_x2, TrotterTerm::boson_p2, TrotterTerm::hopping,
                 TrotterTerm::peierls, TrotterTerm::breathing})
    if (s == term_name(t)) return t;
  throw std::invalid_argument("unknown Trotter term '" + s + "'");
}

inline std::vector<TrotterTerm> default_term_order() {
  return {TrotterTerm::boson_x2, TrotterTerm::boson_p2, TrotterTerm::hopping, TrotterTerm::peierls,
          TrotterTerm::breathing};
}

struct TrotterPlan {
  double total_time = 0.0;
  int n_steps = 1;
  std::vector<TrotterTerm> order = default_term_order();
  /// Palindromic (second-order) step instead of the first-order product.
  bool symmetric = false;
  HoppingOptions hopping{};

  void validate() const {
    if (n_steps < 1) throw std::invalid_argument("TrotterPlan: n_steps must be >= 1");
    if (order.size() != 5) throw std::invalid_argument("TrotterPlan: order must list all five terms");
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("TrotterPlan: each term must appear exactly once");
  }
  double step() const { return total_time / n_steps; }
};

/// Exact exponential factors exp(-i dt H_l) making up one term, in product order.
///
/// Prefactors: hopping t_e dt; bosons w_b dt / 4 on x^2 and p^2 (b^dag b =
/// (x^2 + p^2 - 2) / 4, the constant enters as a global phase); Peierls
/// g_P w_b dt; breathing g_B w_b dt.
inline std::vector<Circuit> trotter_factors(TrotterTerm term, const ModelParams& p,
                                            const RegisterLayout& layout, const BosonGrid& grid,
                                            double dt, HoppingOptions hop = {}) {
  std::vector<Circuit> out;
  const int N = layout.n_sites();
  switch (term) {
    case TrotterTerm::boson_x2:
      for (int n = 1; n <= N; ++n) {
        Circuit c = build_boson_x2_step(0.25 * p.omega_b * dt, n, layout, grid);
        c.add_global_phase(0.5 * p.omega_b * dt);
        out.push_back(std::move(c));
      }
      break;
    case TrotterTerm::boson_p2:
      for (int n = 1; n <= N; ++n) out.push_back(build_boson_p2_step(0.25 * p.omega_b * dt, n, layout, grid));
      break;
    case TrotterTerm::hopping:
      for (int n = 1; n <= N; ++n) out.push_back(build_hopping_bond(p.t_e * dt, n, layout, hop));
      break;
    case TrotterTerm::peierls:
      if (p.g_P != 0.0)
        for (int n = 1; n <= N; ++n)
          out.push_back(build_peierls_step(p.peierls_energy() * dt, n, layout, grid, hop));
      break;
    case TrotterTerm::breathing:
      if (p.g_B != 0.0)
        for (int n = 1; n <= N; ++n) out.push_back(build_breathing_step(p.breathing_energy() * dt, n, layout, grid));
      break;
  }
  return out;
}

/// One Trotter step of length dt.
inline Circuit build_trotter_step(const ModelParams& p, const RegisterLayout& layout,
                                  const BosonGrid& grid, double dt, const TrotterPlan& plan) {
  plan.validate();
  if (layout.n_sites() != p.n_sites)
    throw std::invalid_argument("build_trotter_step: layout and model disagree on N");
  check_grid(layout, grid);
  Circuit c(layout.total_qubits());
  const double h = plan.symmetric ? 0.5 * dt : dt;
  std::vector<Circuit> seq;
  for (auto term : plan.order)
    for (auto& f : trotter_factors(term, p, layout, grid, h, plan.hopping)) seq.push_back(std::move(f));
  for (const auto& f : seq) c.append(f);
  if (plan.symmetric)
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) c.append(*it);
  return c;
}

/// n_s identical steps approximating exp(-i H t).
inline Circuit build_trotter_evolution(const ModelParams& p, const RegisterLayout& layout,
                                       const BosonGrid& grid, const TrotterPlan& plan) {
  plan.validate();
  const Circuit step = build_trotter_step(p, layout, grid, plan.step(), plan);
  return repeat(step, static_cast<std::size_t>(plan.n_steps));
}

// ---------------------------------------------------------------------------
// Phase estimation and Hadamard test
// ---------------------------------------------------------------------------

inline void check_disjoint(const Circuit& c, const std::vector<int>& reg, const char* what) {
  for (int q : support(c))
    if (std::find(reg.begin(), reg.end(), q) != reg.end())
      throw std::invalid_argument(std::string(what) + ": register overlap on qubit " + std::to_string(q));
}

/// prep, Hadamards on the phase register, controlled u^(2^j) from phase[j], inverse QFT.
/// The readout index k = sum_j 2^j bit_j estimates phi with u|psi> = exp(2 pi i phi)|psi>.
inline Circuit build_qpe(const Circuit& u, const std::vector<int>& phase, const Circuit& prep) {
  if (phase.empty()) throw std::invalid_argument("build_qpe: need at least one phase qubit");
  if (u.n_qubits() != prep.n_qubits()) throw std::invalid_argument("build_qpe: qubit-count mismatch");
  check_disjoint(u, phase, "build_qpe");
  check_disjoint(prep, phase, "build_qpe");
  Circuit c = prep;
  for (int q : phase) c.append(gate::h(q));
  for (std::size_t j = 0; j < phase.size(); ++j) {
    const Circuit cu = controlled(u, phase[j]);
    c.append(repeat(cu, std::size_t{1} << j));
  }
  c.append(inverse(build_qft(phase, u.n_qubits())));
  return c;
}

enum class OverlapPart { real, imag };

/// Ancilla <Z> equals Re<psi|u|psi> (or Im with the S^dag variant), psi = prep|0>.
inline Circuit build_hadamard_test(const Circuit& u, const Circuit& prep, int ancilla, OverlapPart part) {
  if (u.n_qubits() != prep.n_qubits())
    throw std::invalid_argument("build_hadamard_test: qubit-count mismatch");
  check_disjoint(u, {ancilla}, "build_hadamard_test");
  check_disjoint(prep, {ancilla}, "build_hadamard_test");
  Circuit c = prep;
  c.append(gate::h(ancilla));
  c.append(controlled(u, ancilla));
  if (part == OverlapPart::imag) c.append(gate::phase(ancilla, std::numbers::pi / 2));
  c.append(gate::h(ancilla));
  return c;
}

}  // namespace pdqs
