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

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polaron_dqs/pauli.hpp"

namespace pdqs {

/// Qubit register map. Sites are numbered 1..N.
///
/// Index order: excitation qubits (site order, the Jordan-Wigner order), then
/// the boson registers site by site with bit r of site n at
/// N + (n-1) n_q + r, then the optional ancillas (W preparation, Hadamard
/// test) and finally the phase-estimation register.
class RegisterLayout {
 public:
  struct Ancillas {
    bool w_prep = true;
    bool hadamard = false;
    int n_phase = 0;
  };

  RegisterLayout(int n_sites, int n_q) : RegisterLayout(n_sites, n_q, Ancillas{}) {}
  RegisterLayout(int n_sites, int n_q, Ancillas anc)
      : n_sites_(n_sites), n_q_(n_q), anc_(anc) {
    if (n_sites < 1) throw std::invalid_argument("RegisterLayout: n_sites must be >= 1");
    if (n_q < 0) throw std::invalid_argument("RegisterLayout: n_q must be >= 0");
    if (anc.n_phase < 0) throw std::invalid_argument("RegisterLayout: n_phase must be >= 0");
  }

  int n_sites() const { return n_sites_; }
  int n_q() const { return n_q_; }

  int excitation_qubit(int site) const {
    check_site(site);
    return site - 1;
  }
  int boson_qubit(int site, int bit) const {
    check_site(site);
    if (bit < 0 || bit >= n_q_) throw std::out_of_range("RegisterLayout: boson bit out of range");
    return n_sites_ + (site - 1) * n_q_ + bit;
  }
  std::vector<int> excitation_qubits() const {
    std::vector<int> v;
    for (int n = 1; n <= n_sites_; ++n) v.push_back(excitation_qubit(n));
    return v;
  }
  std::vector<int> boson_register(int site) const {
    std::vector<int> v;
    for (int r = 0; r < n_q_; ++r) v.push_back(boson_qubit(site, r));
    return v;
  }

  int system_qubits() const { return n_sites_ * (1 + n_q_); }

  std::optional<int> w_ancilla() const {
    if (!anc_.w_prep) return std::nullopt;
    return system_qubits();
  }
  std::optional<int> hadamard_ancilla() const {
    if (!anc_.hadamard) return std::nullopt;
    return system_qubits() + (anc_.w_prep ? 1 : 0);
  }
  std::vector<int> phase_register() const {
    std::vector<int> v;
    const int base = system_qubits() + (anc_.w_prep ? 1 : 0) + (anc_.hadamard ? 1 : 0);
    for (int j = 0; j < anc_.n_phase; ++j) v.push_back(base + j);
    return v;
  }
  std::vector<int> ancilla_indices() const {
    std::vector<int> v;
    if (auto a = w_ancilla()) v.push_back(*a);
    if (auto a = hadamard_ancilla()) v.push_back(*a);
    for (int q : phase_register()) v.push_back(q);
    return v;
  }

  int total_qubits() const {
    return system_qubits() + (anc_.w_prep ? 1 : 0) + (anc_.hadamard ? 1 : 0) + anc_.n_phase;
  }

  /// Site n+1 with periodic wrap.
  int next_site(int site) const { return site % n_sites_ + 1; }
  int prev_site(int site) const { return (site + n_sites_ - 2) % n_sites_ + 1; }

 private:
  void check_site(int site) const {
    if (site < 1 || site > n_sites_) throw std::out_of_range("RegisterLayout: site out of range");
  }

  int n_sites_;
  int n_q_;
  Ancillas anc_;
};

/// 2 sqrt(pi / 2^n_q): equal position and momentum coverage for [x, p] = 2i.
inline double grid_spacing(int n_q) {
  if (n_q < 1) throw std::invalid_argument("grid_spacing: n_q must be >= 1");
  return 2.0 * std::sqrt(std::numbers::pi / static_cast<double>(1ULL << n_q));
}

/// Centered position grid of one oscillator, x_j = (j - (2^n_q - 1)/2) delta.
struct BosonGrid {
  int n_q = 1;
  double delta = grid_spacing(1);

  BosonGrid() = default;
  explicit BosonGrid(int nq) : n_q(nq), delta(grid_spacing(nq)) {}
  BosonGrid(int nq, double spacing) : n_q(nq), delta(spacing) {
    if (nq < 1) throw std::invalid_argument("BosonGrid: n_q must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("BosonGrid: spacing must be > 0");
  }

  std::size_t n_points() const { return std::size_t{1} << n_q; }
  double center() const { return 0.5 * (static_cast<double>(n_points()) - 1.0); }
  double x_value(std::size_t j) const { return (static_cast<double>(j) - center()) * delta; }

  /// Spacing of the conjugate grid for p = -2i d/dx.
  double momentum_spacing() const {
    return 4.0 * std::numbers::pi / (static_cast<double>(n_points()) * delta);
  }
  double p_value(std::size_t m) const { return (static_cast<double>(m) - center()) * momentum_spacing(); }

  std::vector<double> positions() const {
    std::vector<double> x(n_points());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = x_value(j);
    return x;
  }
};

/// Gaussian exp(-x^2/4) sampled on the grid and normalized.
inline std::vector<double> vacuum_amplitudes(const BosonGrid& grid) {
  std::vector<double> a(grid.n_points());
  double norm2 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double x = grid.x_value(j);
    a[j] = std::exp(-0.25 * x * x);
    norm2 += a[j] * a[j];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& v : a) v *= inv;
  return a;
}

// Jordan-Wigner images.

enum class FermionOp { create, annihilate, number };

inline void check_jw_site(int site, int n_sites) {
  if (n_sites < 1 || site < 1 || site > n_sites)
    throw std::out_of_range("jw: site out of range");
}

/// Image of c^dag_n, c_n or c^dag_n c_n with excitation qubit of site n at index n-1.
inline PauliSum jw_map(FermionOp op, int site, int n_sites) {
  check_jw_site(site, n_sites);
  const int q = site - 1;
  if (op == FermionOp::number) {
    return PauliSum::identity(0.5) + PauliSum::single(Pauli::Z, q, -0.5);
  }
  std::map<int, Pauli> string;
  for (int j = 0; j < q; ++j) string.emplace(j, Pauli::Z);
  const std::complex<double> ysign = op == FermionOp::create ? std::complex<double>{0.0, -0.5}
                                                             : std::complex<double>{0.0, 0.5};
  auto xs = string;
  xs.emplace(q, Pauli::X);
  auto ys = string;
  ys.emplace(q, Pauli::Y);
  PauliSum s(PauliString{0.5, xs});
  s.add(PauliString{ysign, ys});
  return s;
}

/// Image of c^dag_{n+1} c_n + h.c. for the bond starting at `site` (wrapping N -> 1).
///
/// Interior bonds give (X_n X_{n+1} + Y_n Y_{n+1})/2; the seam bond carries the
/// Z string over sites 2..N-1 unless `drop_string` is set, which is only valid
/// inside the single-excitation sector.
inline PauliSum jw_hopping_operator(int site, int n_sites, bool drop_string = false) {
  check_jw_site(site, n_sites);
  if (n_sites < 2) throw std::invalid_argument("jw_hopping_operator: need at least two sites");
  const int a = site - 1;
  const int b = site % n_sites;
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  std::map<int, Pauli> zs;
  if (!drop_string)
    for (int j = lo + 1; j < hi; ++j) zs.emplace(j, Pauli::Z);
  auto xx = zs;
  xx[lo] = Pauli::X;
  xx[hi] = Pauli::X;
  auto yy = zs;
  yy[lo] = Pauli::Y;
  yy[hi] = Pauli::Y;
  PauliSum s(PauliString{0.5, xx});
  s.add(PauliString{0.5, yy});
  return s;
}

/// Grid displacement of one oscillator as a Pauli sum: x = -(delta/2) sum_r 2^r Z_r.
///
/// The centering offset cancels against the constant of (1 - Z_r)/2.
inline PauliSum position_operator(int site, const RegisterLayout& layout, const BosonGrid& grid) {
  PauliSum s;
  for (int r = 0; r < layout.n_q(); ++r)
    s.add(PauliString{-0.5 * grid.delta * static_cast<double>(1ULL << r),
                      {{layout.boson_qubit(site, r), Pauli::Z}}});
  return s;
}

}  // namespace pdqs
