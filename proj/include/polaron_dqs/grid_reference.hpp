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
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "polaron_dqs/layout.hpp"
#include "polaron_dqs/model.hpp"
#include "polaron_dqs/sparse.hpp"

namespace pdqs {

/// Dense p^2 on one oscillator grid, row-major, for p = -2i d/dx:
/// (p^2)_{jj'} = (1/G) sum_m p_m^2 exp(i p_m (x_j - x_j') / 2).
inline std::vector<cplx> grid_p2_matrix(const BosonGrid& grid) {
  const std::size_t g = grid.n_points();
  std::vector<cplx> m(g * g);
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t jp = 0; jp < g; ++jp) {
      cplx s{};
      for (std::size_t k = 0; k < g; ++k) {
        const double p = grid.p_value(k);
        s += p * p * std::polar(1.0, 0.5 * p * (grid.x_value(j) - grid.x_value(jp)));
      }
      m[j * g + jp] = s / static_cast<double>(g);
    }
  return m;
}

/// Dense w_b [(x^2 + p^2)/4 - 1/2] on one oscillator grid, row-major.
inline std::vector<cplx> grid_oscillator_matrix(const BosonGrid& grid, double omega_b) {
  auto m = grid_p2_matrix(grid);
  const std::size_t g = grid.n_points();
  for (auto& v : m) v *= 0.25 * omega_b;
  for (std::size_t j = 0; j < g; ++j) {
    const double x = grid.x_value(j);
    m[j * g + j] += omega_b * (0.25 * x * x - 0.5);
  }
  return m;
}

/// Single-excitation sector of the qubit-encoded model.
///
/// Index = site * G^N + sum_s j_s G^s with sites 0-based and j_s the grid
/// point of oscillator s.
class GridBasis {
 public:
  GridBasis(int n_sites, const BosonGrid& grid) : n_sites_(n_sites), grid_(grid) {
    if (n_sites < 2) throw std::invalid_argument("GridBasis: N must be >= 2");
    const double bits = static_cast<double>(grid.n_q) * n_sites + std::log2(n_sites);
    if (bits > 28.0) throw std::length_error("GridBasis: dimension too large");
    block_ = std::size_t{1} << (grid.n_q * n_sites);
  }
  int n_sites() const { return n_sites_; }
  const BosonGrid& grid() const { return grid_; }
  std::size_t block() const { return block_; }
  std::size_t dim() const { return block_ * static_cast<std::size_t>(n_sites_); }
  std::size_t index(int site, std::size_t bosons) const { return static_cast<std::size_t>(site) * block_ + bosons; }
  int site(std::size_t i) const { return static_cast<int>(i / block_); }
  std::size_t grid_index(std::size_t i, int s) const {
    return ((i % block_) >> (grid_.n_q * s)) & (grid_.n_points() - 1);
  }
  double x(std::size_t i, int s) const { return grid_.x_value(grid_index(i, s)); }

  /// Matching computational-basis index of the statevector register layout
  /// without ancillas: one-hot excitation qubits, then boson registers.
  std::size_t qubit_index(std::size_t i) const {
    return (std::size_t{1} << site(i)) | ((i % block_) << n_sites_);
  }

 private:
  int n_sites_;
  BosonGrid grid_;
  std::size_t block_;
};

/// Encoded lattice Hamiltonian with x, p on the grid.
inline SparseMatrix<cplx> build_grid_hamiltonian(const ModelParams& p, const GridBasis& b) {
  p.validate();
  if (p.n_sites != b.n_sites()) throw std::invalid_argument("build_grid_hamiltonian: N mismatch");
  const int n_sites = b.n_sites();
  const std::size_t g = b.grid().n_points();
  const auto osc = grid_oscillator_matrix(b.grid(), p.omega_b);
  const double gp = p.peierls_energy();
  const double gb = p.breathing_energy();
  std::vector<Triplet<cplx>> t;
  t.reserve(b.dim() * (static_cast<std::size_t>(n_sites) * g + 4));
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const int n = b.site(i);
    const int up = (n + 1) % n_sites;
    const int dn = (n + n_sites - 1) % n_sites;
    const std::size_t bos = i % b.block();
    // oscillators: column i of each single-site block
    for (int s = 0; s < n_sites; ++s) {
      const std::size_t js = b.grid_index(i, s);
      const std::size_t base = bos & ~((g - 1) << (b.grid().n_q * s));
      for (std::size_t jr = 0; jr < g; ++jr) {
        const cplx v = osc[jr * g + js];
        if (v == cplx{}) continue;
        t.push_back({b.index(n, base | (jr << (b.grid().n_q * s))), i, v});
      }
    }
    t.push_back({b.index(up, bos), i, cplx(-p.t_e)});
    t.push_back({b.index(dn, bos), i, cplx(-p.t_e)});
    if (gp != 0.0) {
      t.push_back({b.index(up, bos), i, cplx(gp * (b.x(i, up) - b.x(i, n)))});
      t.push_back({b.index(dn, bos), i, cplx(gp * (b.x(i, n) - b.x(i, dn)))});
    }
    if (gb != 0.0) t.push_back({i, i, cplx(gb * (b.x(i, dn) - b.x(i, up)))});
  }
  return SparseMatrix<cplx>::from_triplets(b.dim(), std::move(t));
}

/// Uniform excitation superposition times the grid vacuum on every oscillator.
inline std::vector<cplx> grid_w_vacuum_state(const GridBasis& b) {
  const auto vac = vacuum_amplitudes(b.grid());
  std::vector<cplx> v(b.dim());
  const double a = 1.0 / std::sqrt(static_cast<double>(b.n_sites()));
  for (std::size_t i = 0; i < b.dim(); ++i) {
    double amp = a;
    for (int s = 0; s < b.n_sites(); ++s) amp *= vac[b.grid_index(i, s)];
    v[i] = amp;
  }
  return v;
}

}  // namespace pdqs
