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
#include <optional>
#include <stdexcept>
#include <vector>

#include "polaron_dqs/lanczos.hpp"
#include "polaron_dqs/model.hpp"
#include "polaron_dqs/sparse.hpp"

namespace pdqs {

/// J_0(x)..J_kmax(x) for x >= 0 by Miller's backward recurrence, normalized
/// with J_0 + 2 sum_k J_2k = 1.
inline std::vector<double> bessel_j_sequence(int kmax, double x) {
  if (kmax < 0) throw std::invalid_argument("bessel_j_sequence: kmax must be >= 0");
  if (x < 0.0) throw std::invalid_argument("bessel_j_sequence: x must be >= 0");
  std::vector<double> j(static_cast<std::size_t>(kmax) + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  int start = std::max(kmax, static_cast<int>(x)) + 40 + static_cast<int>(std::sqrt(40.0 * std::max(x, 1.0)));
  if (start % 2) ++start;
  double jp1 = 0.0, jk = 1e-300, sum = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm1 = 2.0 * k / x * jk - jp1;
    jp1 = jk;
    jk = jm1;
    if (k - 1 <= kmax) j[static_cast<std::size_t>(k - 1)] = jk;
    if ((k - 1) % 2 == 0 && k - 1 > 0) sum += 2.0 * jk;
    if (std::abs(jk) > 1e250) {
      jk *= 1e-250;
      jp1 *= 1e-250;
      sum *= 1e-250;
      for (auto& v : j) v *= 1e-250;
    }
  }
  sum += jk;
  for (auto& v : j) v /= sum;
  return j;
}

class ChebyshevBoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChebyshevOptions {
  double coefficient_tol = 1e-15;
  double max_bt = 20.0;
  int bound_steps = 50;
  double margin = 0.01;
  std::uint64_t seed = 7;
};

/// e^{-iHt} by Chebyshev expansion of the rescaled Hamiltonian (H - a)/b.
class ChebyshevPropagator {
 public:
  using Options = ChebyshevOptions;

  explicit ChebyshevPropagator(const SparseMatrix<cplx>& h) : ChebyshevPropagator(h, Options{}) {}
  ChebyshevPropagator(const SparseMatrix<cplx>& h, Options opt) : h_(&h), opt_(opt) {
    const auto [lo, hi] = lanczos_extremal(h, opt.bound_steps, opt.seed);
    set_bounds(lo, hi);
  }
  ChebyshevPropagator(const SparseMatrix<cplx>& h, double e_min, double e_max, Options opt = Options{})
      : h_(&h), opt_(opt) {
    set_bounds(e_min, e_max);
  }

  double center() const { return a_; }
  double half_width() const { return b_; }
  int last_order() const { return last_order_; }

  /// Replaces the Ritz-based bounds by the Gershgorin enclosure.
  void refresh_bounds() {
    const auto [lo, hi] = h_->gershgorin();
    set_bounds(lo, hi, 0.0);
  }

  /// Coefficients for one sub-step of length t.
  std::vector<cplx> coefficients(double t) const {
    const double x = b_ * std::abs(t);
    int kmax = static_cast<int>(x) + 30;
    std::vector<double> jb;
    for (;;) {
      jb = bessel_j_sequence(kmax, x);
      if (std::abs(jb.back()) < opt_.coefficient_tol && kmax > x) break;
      kmax += 20;
    }
    while (jb.size() > 1 && std::abs(jb.back()) < opt_.coefficient_tol &&
           std::abs(jb[jb.size() - 2]) < opt_.coefficient_tol)
      jb.pop_back();
    std::vector<cplx> c(jb.size());
    const cplx mi = t >= 0.0 ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
    cplx pw{1.0, 0.0};
    for (std::size_t k = 0; k < jb.size(); ++k) {
      c[k] = (k == 0 ? 1.0 : 2.0) * pw * jb[k];
      pw *= mi;
    }
    return c;
  }

  /// e^{-iHt} psi; long times are split into sub-steps with b*dt <= max_bt.
  std::vector<cplx> propagate(const std::vector<cplx>& psi, double t) {
    if (psi.size() != h_->dim()) throw std::invalid_argument("ChebyshevPropagator: dimension mismatch");
    if (t == 0.0) return psi;
    const int chunks = std::max(1, static_cast<int>(std::ceil(b_ * std::abs(t) / opt_.max_bt)));
    const double dt = t / chunks;
    std::vector<cplx> v = psi;
    for (int c = 0; c < chunks; ++c) v = step(v, dt);
    return v;
  }

  /// Propagation that refreshes bounds once on overflow.
  std::vector<cplx> propagate_checked(const std::vector<cplx>& psi, double t) {
    try {
      return propagate(psi, t);
    } catch (const ChebyshevBoundsError&) {
      refresh_bounds();
      return propagate(psi, t);
    }
  }

 private:
  void set_bounds(double lo, double hi, double margin_frac = -1.0) {
    if (!(hi >= lo)) throw std::invalid_argument("ChebyshevPropagator: invalid bounds");
    const double m = margin_frac < 0.0 ? opt_.margin : margin_frac;
    const double width = std::max(hi - lo, 1e-12);
    lo -= m * width;
    hi += m * width;
    a_ = 0.5 * (hi + lo);
    b_ = std::max(0.5 * (hi - lo), 1e-12);
  }

  // psi -> (H - a) psi / b
  void apply_scaled(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    h_->multiply<cplx>(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (y[i] - a_ * x[i]) / b_;
  }

  std::vector<cplx> step(const std::vector<cplx>& psi, double dt) {
    const auto c = coefficients(dt);
    last_order_ = static_cast<int>(c.size()) - 1;
    const std::size_t n = psi.size();
    const double n0 = norm2<cplx>(psi);
    const double limit = (1.0 + 1e-6) * n0;
    std::vector<cplx> t0 = psi, t1(n), t2(n), out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = c[0] * t0[i];
    if (c.size() > 1) {
      apply_scaled(t0, t1);
      for (std::size_t i = 0; i < n; ++i) out[i] += c[1] * t1[i];
    }
    for (std::size_t k = 2; k < c.size(); ++k) {
      apply_scaled(t1, t2);
      for (std::size_t i = 0; i < n; ++i) t2[i] = 2.0 * t2[i] - t0[i];
      if (norm2<cplx>(t2) > limit)
        throw ChebyshevBoundsError("ChebyshevPropagator: recurrence overflow, spectral bounds violated");
      for (std::size_t i = 0; i < n; ++i) out[i] += c[k] * t2[i];
      std::swap(t0, t1);
      std::swap(t1, t2);
    }
    const cplx phase = std::exp(cplx{0.0, -a_ * dt});
    for (auto& x : out) x *= phase;
    return out;
  }

  const SparseMatrix<cplx>* h_;
  Options opt_;
  double a_ = 0.0;
  double b_ = 1.0;
  int last_order_ = 0;
};

}  // namespace pdqs
