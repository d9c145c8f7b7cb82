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
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "polaron_dqs/model.hpp"
#include "polaron_dqs/sparse.hpp"

namespace pdqs {

/// Single-excitation Fock basis truncated by total boson number.
///
/// Sites are 0-based here. State i has its excitation at site(i) and boson
/// occupations occupations(i) with sum <= M. Enumeration is lexicographic in
/// (site, m_0, ..., m_{N-1}).
class FockBasis {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  int n_sites() const { return n_sites_; }
  int max_bosons() const { return max_bosons_; }
  std::size_t dim() const { return sites_.size(); }
  int site(std::size_t i) const { return sites_[i]; }
  std::span<const std::uint8_t> occupations(std::size_t i) const {
    return {occ_.data() + i * static_cast<std::size_t>(n_sites_), static_cast<std::size_t>(n_sites_)};
  }
  int total_bosons(std::size_t i) const {
    int s = 0;
    for (auto m : occupations(i)) s += m;
    return s;
  }

  std::size_t find(int site, std::span<const std::uint8_t> m) const {
    auto it = index_.find(key(site, m));
    return it == index_.end() ? npos : it->second;
  }

  friend FockBasis enumerate_basis(int n_sites, int max_bosons);

 private:
  std::uint64_t key(int site, std::span<const std::uint8_t> m) const {
    std::uint64_t k = 0;
    for (int j = n_sites_ - 1; j >= 0; --j) k = k * static_cast<std::uint64_t>(max_bosons_ + 1) + m[j];
    return k * static_cast<std::uint64_t>(n_sites_) + static_cast<std::uint64_t>(site);
  }

  int n_sites_ = 0;
  int max_bosons_ = 0;
  std::vector<int> sites_;
  std::vector<std::uint8_t> occ_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// C(n, k) in double precision (exact for the sizes used here).
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline constexpr double kMaxFockDimension = 5.0e7;

inline FockBasis enumerate_basis(int n_sites, int max_bosons) {
  if (n_sites < 2) throw std::invalid_argument("enumerate_basis: N must be >= 2");
  if (max_bosons < 0) throw std::invalid_argument("enumerate_basis: M must be >= 0");
  if (max_bosons > 255) throw std::invalid_argument("enumerate_basis: M must be <= 255");
  const double dim = n_sites * binomial(n_sites + max_bosons, max_bosons);
  if (dim > kMaxFockDimension)
    throw std::length_error("enumerate_basis: dimension " + std::to_string(dim) + " exceeds limit");
  // key() packs (M+1)^N * N into 64 bits
  if (static_cast<double>(n_sites) * std::log2(max_bosons + 1.0) + std::log2(n_sites) > 63.0)
    throw std::length_error("enumerate_basis: occupation key overflow");

  std::vector<std::vector<std::uint8_t>> configs;
  std::vector<std::uint8_t> cur(static_cast<std::size_t>(n_sites), 0);
  auto rec = [&](auto&& self, int j, int left) -> void {
    if (j == n_sites) {
      configs.push_back(cur);
      return;
    }
    for (int m = 0; m <= left; ++m) {
      cur[j] = static_cast<std::uint8_t>(m);
      self(self, j + 1, left - m);
    }
    cur[j] = 0;
  };
  rec(rec, 0, max_bosons);

  FockBasis b;
  b.n_sites_ = n_sites;
  b.max_bosons_ = max_bosons;
  b.sites_.reserve(static_cast<std::size_t>(dim));
  b.occ_.reserve(static_cast<std::size_t>(dim) * n_sites);
  for (int n = 0; n < n_sites; ++n) {
    for (const auto& c : configs) {
      b.index_.emplace(b.key(n, c), b.sites_.size());
      b.sites_.push_back(n);
      b.occ_.insert(b.occ_.end(), c.begin(), c.end());
    }
  }
  return b;
}

namespace detail {

inline int wrap(int j, int n) { return ((j % n) + n) % n; }

/// Calls f(target_index, amplitude) for x = b^dag + b on boson site j of state i,
/// staying inside the truncated space.
template <typename F>
void for_each_x(const FockBasis& b, std::size_t i, int j, F&& f) {
  const auto occ = b.occupations(i);
  std::vector<std::uint8_t> m(occ.begin(), occ.end());
  const int mj = m[j];
  if (mj > 0) {
    m[j] = static_cast<std::uint8_t>(mj - 1);
    f(b.find(b.site(i), m), std::sqrt(static_cast<double>(mj)));
  }
  if (b.total_bosons(i) < b.max_bosons()) {
    m[j] = static_cast<std::uint8_t>(mj + 1);
    f(b.find(b.site(i), m), std::sqrt(static_cast<double>(mj + 1)));
  }
}

/// Index of the state with the same bosons and the excitation moved to `site`.
inline std::size_t moved(const FockBasis& b, std::size_t i, int site) {
  return b.find(site, b.occupations(i));
}

}  // namespace detail

/// Lattice Hamiltonian in the truncated Fock basis, x = b^dag + b.
///
/// H = -t_e sum (c^dag_{n+1} c_n + h.c.) + w_b sum b^dag b
///   + g_P w_b sum (c^dag_{n+1} c_n + h.c.)(x_{n+1} - x_n)
///   + g_B w_b sum c^dag_n c_n (x_{n-1} - x_{n+1}).
inline SparseMatrix<double> build_hamiltonian(const ModelParams& p, const FockBasis& b) {
  p.validate();
  if (p.n_sites != b.n_sites()) throw std::invalid_argument("build_hamiltonian: N mismatch");
  const int n_sites = b.n_sites();
  const double gp = p.peierls_energy();
  const double gb = p.breathing_energy();
  std::vector<Triplet<double>> t;
  t.reserve(b.dim() * static_cast<std::size_t>(4 + 8 * n_sites));
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const int n = b.site(i);
    const int up = detail::wrap(n + 1, n_sites);
    const int dn = detail::wrap(n - 1, n_sites);
    const double nb = b.total_bosons(i);
    if (nb != 0.0) t.push_back({i, i, p.omega_b * nb});
    t.push_back({detail::moved(b, i, up), i, -p.t_e});
    t.push_back({detail::moved(b, i, dn), i, -p.t_e});
    if (gp != 0.0) {
      // n -> n+1 through bond (n, n+1): factor x_{n+1} - x_n
      detail::for_each_x(b, i, up, [&](std::size_t k, double a) { t.push_back({detail::moved(b, k, up), i, gp * a}); });
      detail::for_each_x(b, i, n, [&](std::size_t k, double a) { t.push_back({detail::moved(b, k, up), i, -gp * a}); });
      // n -> n-1 through bond (n-1, n): factor x_n - x_{n-1}
      detail::for_each_x(b, i, n, [&](std::size_t k, double a) { t.push_back({detail::moved(b, k, dn), i, gp * a}); });
      detail::for_each_x(b, i, dn, [&](std::size_t k, double a) { t.push_back({detail::moved(b, k, dn), i, -gp * a}); });
    }
    if (gb != 0.0) {
      detail::for_each_x(b, i, dn, [&](std::size_t k, double a) { t.push_back({k, i, gb * a}); });
      detail::for_each_x(b, i, up, [&](std::size_t k, double a) { t.push_back({k, i, -gb * a}); });
    }
  }
  auto h = SparseMatrix<double>::from_triplets(b.dim(), std::move(t));
  return h;
}

template <typename T>
SparseMatrix<cplx> to_complex(const SparseMatrix<T>& m) {
  std::vector<Triplet<cplx>> t;
  t.reserve(m.nonzeros());
  const auto rp = m.row_ptr();
  for (std::size_t r = 0; r < m.dim(); ++r)
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) t.push_back({r, m.cols()[k], cplx(m.values()[k])});
  return SparseMatrix<cplx>::from_triplets(m.dim(), std::move(t));
}

/// Index of the translated state T^shift |i>, T moving every site label by +1.
inline std::size_t translate(const FockBasis& b, std::size_t i, int shift) {
  const int n_sites = b.n_sites();
  const auto occ = b.occupations(i);
  std::vector<std::uint8_t> m(static_cast<std::size_t>(n_sites));
  for (int j = 0; j < n_sites; ++j) m[detail::wrap(j + shift, n_sites)] = occ[j];
  return b.find(detail::wrap(b.site(i) + shift, n_sites), m);
}

/// Eigenspace of the lattice translation T with eigenvalue e^{iK}.
///
/// Basis vector s is |K,s> = N^{-1/2} sum_j e^{-iKj} T^j |r_s>, with |r_s>
/// the state of the s-th boson configuration and the excitation on site 0.
/// Every orbit has exactly N members, so all sector vectors are normalized.
struct MomentumSector {
  int m = 0;        // K = 2 pi m / N
  double K = 0.0;   // folded into (-pi, pi]
  std::vector<std::size_t> representatives;
  std::vector<std::size_t> rep_of;  // full index -> sector index
  std::vector<int> shift_of;        // full index i = T^{shift} r_{rep}
  std::size_t dim() const { return representatives.size(); }
};

inline int quasimomentum_index(int n_sites, double K) {
  const auto ks = allowed_quasimomenta(n_sites);
  for (int m = 0; m < n_sites; ++m)
    if (std::abs(std::remainder(K - ks[m], 2.0 * std::numbers::pi)) < 1e-9) return m;
  throw std::invalid_argument("momentum_sector: K is not an allowed quasimomentum");
}

inline MomentumSector momentum_sector_index(const FockBasis& b, int m) {
  const int n_sites = b.n_sites();
  if (m < 0 || m >= n_sites) throw std::invalid_argument("momentum_sector: index out of range");
  MomentumSector s;
  s.m = m;
  s.K = allowed_quasimomenta(n_sites)[m];
  s.rep_of.assign(b.dim(), 0);
  s.shift_of.assign(b.dim(), 0);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (b.site(i) != 0) continue;
    const std::size_t r = s.representatives.size();
    s.representatives.push_back(i);
    for (int d = 0; d < n_sites; ++d) {
      const std::size_t j = translate(b, i, d);
      s.rep_of[j] = r;
      s.shift_of[j] = d;
    }
  }
  return s;
}

inline MomentumSector momentum_sector(const FockBasis& b, double K) {
  return momentum_sector_index(b, quasimomentum_index(b.n_sites(), K));
}

/// Block of a translation-invariant H in the sector basis:
/// H_K(s', s) = sum_d e^{iKd} <T^d r_{s'}|H|r_s>.
template <typename T>
SparseMatrix<cplx> project_H(const SparseMatrix<T>& h, const MomentumSector& s) {
  const int n_sites = static_cast<int>(h.dim() / std::max<std::size_t>(s.dim(), 1));
  std::vector<cplx> phase(static_cast<std::size_t>(n_sites));
  for (int d = 0; d < n_sites; ++d)
    phase[d] = std::polar(1.0, 2.0 * std::numbers::pi * s.m * d / n_sites);
  std::vector<Triplet<cplx>> t;
  const auto rp = h.row_ptr();
  // H is Hermitian, so column r_s is read as the conjugated row r_s.
  for (std::size_t col = 0; col < s.dim(); ++col) {
    const std::size_t i = s.representatives[col];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const std::size_t j = h.cols()[k];
      const cplx hji = conj_if(h.values()[k]);
      t.push_back({s.rep_of[j], col, hji * phase[s.shift_of[j]]});
    }
  }
  return SparseMatrix<cplx>::from_triplets(s.dim(), std::move(t));
}

/// Full-space image of a sector vector.
inline std::vector<cplx> embed(const MomentumSector& s, std::span<const cplx> v) {
  if (v.size() != s.dim()) throw std::invalid_argument("embed: dimension mismatch");
  const int n_sites = static_cast<int>(s.rep_of.size() / std::max<std::size_t>(s.dim(), 1));
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
  std::vector<cplx> out(s.rep_of.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = norm * std::polar(1.0, -2.0 * std::numbers::pi * s.m * s.shift_of[i] / n_sites) * v[s.rep_of[i]];
  return out;
}

/// Sector coordinates of the projection of a full-space vector.
inline std::vector<cplx> extract(const MomentumSector& s, std::span<const cplx> full) {
  if (full.size() != s.rep_of.size()) throw std::invalid_argument("extract: dimension mismatch");
  const int n_sites = static_cast<int>(s.rep_of.size() / std::max<std::size_t>(s.dim(), 1));
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_sites));
  std::vector<cplx> out(s.dim());
  for (std::size_t i = 0; i < full.size(); ++i)
    out[s.rep_of[i]] += norm * std::polar(1.0, 2.0 * std::numbers::pi * s.m * s.shift_of[i] / n_sites) * full[i];
  return out;
}

/// Bare excitation in a uniform superposition over sites with all oscillators empty.
inline std::vector<cplx> w_vacuum_state(const FockBasis& b) {
  std::vector<cplx> v(b.dim());
  const std::vector<std::uint8_t> vac(static_cast<std::size_t>(b.n_sites()), 0);
  const double a = 1.0 / std::sqrt(static_cast<double>(b.n_sites()));
  for (int n = 0; n < b.n_sites(); ++n) v[b.find(n, vac)] = a;
  return v;
}

struct Loschmidt {
  cplx G;
  double L = 0.0;
};

inline Loschmidt loschmidt(std::span<const cplx> psi0, std::span<const cplx> psit) {
  if (psi0.size() != psit.size()) throw std::invalid_argument("loschmidt: dimension mismatch");
  Loschmidt r;
  r.G = dotc<cplx>(psi0, psit);
  r.L = std::min(1.0, std::norm(r.G));
  return r;
}

struct Correlations {
  std::vector<double> boson_number;        // per site
  std::vector<double> excitation_density;  // per site
  std::vector<int> offsets;                // d = -floor(N/2) .. floor(N/2)
  std::vector<double> chi;                 // (1/N) sum_n <n_n x_{n+d}>
  double total_bosons() const {
    double s = 0.0;
    for (double v : boson_number) s += v;
    return s;
  }
};

inline std::vector<int> correlation_offsets(int n_sites) {
  std::vector<int> d;
  for (int k = -n_sites / 2; k <= n_sites / 2; ++k) d.push_back(k);
  return d;
}

inline Correlations correlations(std::span<const cplx> psi, const FockBasis& b) {
  if (psi.size() != b.dim()) throw std::invalid_argument("correlations: dimension mismatch");
  const int n_sites = b.n_sites();
  Correlations c;
  c.boson_number.assign(static_cast<std::size_t>(n_sites), 0.0);
  c.excitation_density.assign(static_cast<std::size_t>(n_sites), 0.0);
  c.offsets = correlation_offsets(n_sites);
  c.chi.assign(c.offsets.size(), 0.0);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const double w = std::norm(psi[i]);
    const auto occ = b.occupations(i);
    for (int j = 0; j < n_sites; ++j) c.boson_number[j] += w * occ[j];
    c.excitation_density[b.site(i)] += w;
    if (psi[i] == cplx{}) continue;
    for (std::size_t k = 0; k < c.offsets.size(); ++k) {
      const int j = detail::wrap(b.site(i) + c.offsets[k], n_sites);
      detail::for_each_x(b, i, j, [&](std::size_t t, double a) {
        c.chi[k] += (std::conj(psi[t]) * a * psi[i]).real();
      });
    }
  }
  for (auto& v : c.chi) v /= n_sites;
  return c;
}

}  // namespace pdqs
