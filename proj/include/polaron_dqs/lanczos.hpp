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
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polaron_dqs/sparse.hpp"

namespace pdqs {

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL.
///
/// `diag` (size m) and `off` (size m-1, off[i] couples i and i+1) are inputs.
/// Returns ascending eigenvalues; column k of `vecs` (row-major m x m) is the
/// eigenvector of values[k].
struct TridiagonalEigen {
  std::vector<double> values;
  std::vector<double> vecs;
};

inline TridiagonalEigen tridiagonal_eigen(std::vector<double> d, std::vector<double> off) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return {};
  if (static_cast<int>(off.size()) != n - 1) throw std::invalid_argument("tridiagonal_eigen: size mismatch");
  std::vector<double> e(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) e[i] = off[i];
  std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw std::runtime_error("tridiagonal_eigen: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            double& zk1 = z[static_cast<std::size_t>(k) * n + i + 1];
            double& zk = z[static_cast<std::size_t>(k) * n + i];
            f = zk1;
            zk1 = s * zk + c * f;
            zk = c * zk - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  TridiagonalEigen out;
  out.values.resize(n);
  out.vecs.resize(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    for (int i = 0; i < n; ++i)
      out.vecs[static_cast<std::size_t>(i) * n + k] = z[static_cast<std::size_t>(i) * n + order[k]];
  }
  return out;
}

struct LanczosOptions {
  double tol = 1e-10;
  int max_iter = 600;
  std::uint64_t seed = 1;
  int check_every = 5;
};

template <typename T>
struct LanczosResult {
  double energy = 0.0;
  std::vector<T> vector;
  double residual = 0.0;
  int iterations = 0;
};

class LanczosError : public std::runtime_error {
 public:
  LanczosError(const std::string& msg, double residual) : std::runtime_error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {

template <typename T>
std::vector<T> random_unit_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<T> v(dim);
  for (auto& x : v) {
    if constexpr (is_complex<T>::value)
      x = T{nd(rng), nd(rng)};
    else
      x = nd(rng);
  }
  const double n = norm2<T>(v);
  for (auto& x : v) x /= n;
  return v;
}

template <typename T>
T from_complex(std::complex<double> c) {
  if constexpr (is_complex<T>::value)
    return c;
  else
    return c.real();
}

/// Lanczos recursion with full (twice-applied) reorthogonalization.
/// Stops after `steps` or on invariant-subspace breakdown.
template <typename T>
struct Krylov {
  std::vector<std::vector<T>> basis;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis j and j+1
  bool exhausted = false;

  // Performs one step; returns false once the Krylov space is exhausted.
  bool step(const SparseMatrix<T>& h, double scale) {
    const std::size_t dim = h.dim();
    const std::vector<T>& v = basis.back();
    std::vector<T> w(dim);
    h.template multiply<T>(v, w);
    const double a = dotc<T>(v, w).real();
    alpha.push_back(a);
    for (std::size_t i = 0; i < dim; ++i) w[i] -= a * v[i];
    if (basis.size() >= 2) {
      const double b = beta.back();
      const std::vector<T>& prev = basis[basis.size() - 2];
      for (std::size_t i = 0; i < dim; ++i) w[i] -= b * prev[i];
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        const T c = from_complex<T>(dotc<T>(q, w));
        for (std::size_t i = 0; i < dim; ++i) w[i] -= c * q[i];
      }
    }
    const double b = norm2<T>(w);
    if (b <= 1e-13 * std::max(scale, 1.0) || basis.size() >= dim) {
      exhausted = true;
      return false;
    }
    for (auto& x : w) x /= b;
    beta.push_back(b);
    basis.push_back(std::move(w));
    return true;
  }

  TridiagonalEigen ritz() const {
    const std::size_t m = alpha.size();
    std::vector<double> off(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(m - 1));
    return tridiagonal_eigen(alpha, off);
  }
};

inline double matrix_scale(std::pair<double, double> bounds) {
  return std::max(std::abs(bounds.first), std::abs(bounds.second));
}

}  // namespace detail

/// Lowest eigenpair of a Hermitian sparse matrix.
///
/// Convergence when ||H v - E v|| <= tol * max(1, |H|) with |H| the Gershgorin
/// scale. Deterministic for a fixed seed.
template <typename T>
LanczosResult<T> lanczos_ground_state(const SparseMatrix<T>& h, const LanczosOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("lanczos_ground_state: tol must be > 0");
  if (h.dim() == 0) throw std::invalid_argument("lanczos_ground_state: empty matrix");
  const double scale = std::max(1.0, detail::matrix_scale(h.gershgorin()));
  const double target = opt.tol * scale;

  detail::Krylov<T> k;
  k.basis.push_back(detail::random_unit_vector<T>(h.dim(), opt.seed));

  auto assemble = [&](const TridiagonalEigen& te) {
    const std::size_t m = k.alpha.size();
    LanczosResult<T> r;
    r.vector.assign(h.dim(), T{});
    for (std::size_t j = 0; j < m; ++j) {
      const double c = te.vecs[j * m + 0];
      for (std::size_t i = 0; i < h.dim(); ++i) r.vector[i] += c * k.basis[j][i];
    }
    const double nv = norm2<T>(r.vector);
    for (auto& x : r.vector) x /= nv;
    std::vector<T> hv(h.dim());
    h.template multiply<T>(r.vector, hv);
    r.energy = dotc<T>(r.vector, hv).real();
    for (std::size_t i = 0; i < h.dim(); ++i) hv[i] -= r.energy * r.vector[i];
    r.residual = norm2<T>(hv);
    r.iterations = static_cast<int>(m);
    return r;
  };

  double last_residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    const bool more = k.step(h, scale);
    if (!more || it % opt.check_every == 0 || it == opt.max_iter) {
      const auto te = k.ritz();
      const std::size_t m = k.alpha.size();
      const double est = more ? k.beta.back() * std::abs(te.vecs[(m - 1) * m + 0]) : 0.0;
      if (est <= 0.1 * target || !more) {
        auto r = assemble(te);
        last_residual = r.residual;
        if (r.residual <= target || !more) {
          if (r.residual > target)
            throw LanczosError("lanczos_ground_state: Krylov space exhausted with residual " +
                                   std::to_string(r.residual),
                               r.residual);
          return r;
        }
      }
    }
  }
  const auto r = assemble(k.ritz());
  last_residual = r.residual;
  std::ostringstream os;
  os << "lanczos_ground_state: no convergence after " << opt.max_iter << " iterations, residual "
     << last_residual << " (target " << target << ")";
  throw LanczosError(os.str(), last_residual);
}

/// Extremal Ritz values after `steps` Lanczos iterations.
template <typename T>
std::pair<double, double> lanczos_extremal(const SparseMatrix<T>& h, int steps = 50, std::uint64_t seed = 7) {
  if (h.dim() == 0) throw std::invalid_argument("lanczos_extremal: empty matrix");
  const double scale = std::max(1.0, detail::matrix_scale(h.gershgorin()));
  detail::Krylov<T> k;
  k.basis.push_back(detail::random_unit_vector<T>(h.dim(), seed));
  for (int it = 0; it < steps; ++it)
    if (!k.step(h, scale)) break;
  const auto te = k.ritz();
  return {te.values.front(), te.values.back()};
}

}  // namespace pdqs
