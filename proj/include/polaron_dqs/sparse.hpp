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
#include <complex>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace pdqs {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double conj_if(double x) { return x; }
inline std::complex<double> conj_if(std::complex<double> x) { return std::conj(x); }

template <typename T>
struct Triplet {
  std::size_t row;
  std::size_t col;
  T value;
};

/// Compressed-row square matrix. Duplicate triplets are summed in insertion order.
template <typename T>
class SparseMatrix {
 public:
  using value_type = T;

  SparseMatrix() = default;

  static SparseMatrix from_triplets(std::size_t dim, std::vector<Triplet<T>> trips) {
    for (const auto& t : trips)
      if (t.row >= dim || t.col >= dim) throw std::out_of_range("SparseMatrix: triplet out of range");
    std::stable_sort(trips.begin(), trips.end(), [](const auto& a, const auto& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.dim_ = dim;
    m.row_ptr_.assign(dim + 1, 0);
    for (std::size_t k = 0; k < trips.size();) {
      std::size_t e = k;
      T sum{};
      while (e < trips.size() && trips[e].row == trips[k].row && trips[e].col == trips[k].col)
        sum += trips[e++].value;
      m.cols_.push_back(trips[k].col);
      m.vals_.push_back(sum);
      ++m.row_ptr_[trips[k].row + 1];
      k = e;
    }
    for (std::size_t r = 0; r < dim; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  std::size_t dim() const { return dim_; }
  std::size_t nonzeros() const { return vals_.size(); }
  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> cols() const { return cols_; }
  std::span<const T> values() const { return vals_; }

  T at(std::size_t r, std::size_t c) const {
    const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(b, e, c);
    if (it == e || *it != c) return T{};
    return vals_[static_cast<std::size_t>(it - cols_.begin())];
  }

  /// y = A x; rows are independent and summed left to right.
  template <typename V>
  void multiply(std::span<const V> x, std::span<V> y) const {
    if (x.size() != dim_ || y.size() != dim_) throw std::invalid_argument("SparseMatrix: size mismatch");
    for (std::size_t r = 0; r < dim_; ++r) {
      V acc{};
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k] * x[cols_[k]];
      y[r] = acc;
    }
  }

  template <typename V>
  std::vector<V> operator*(const std::vector<V>& x) const {
    std::vector<V> y(dim_);
    multiply<V>(x, y);
    return y;
  }

  /// max |A_ij - conj(A_ji)|
  double hermiticity_defect() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        worst = std::max(worst, std::abs(vals_[k] - conj_if(at(cols_[k], r))));
    return worst;
  }

  /// Gershgorin enclosure of the (real) spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t r = 0; r < dim_; ++r) {
      double diag = 0.0, off = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        if (cols_[k] == r)
          diag = std::real(vals_[k]);
        else
          off += std::abs(vals_[k]);
      }
      if (first || diag - off < lo) lo = diag - off;
      if (first || diag + off > hi) hi = diag + off;
      first = false;
    }
    return {lo, hi};
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<T> vals_;
};

// Small vector helpers shared by the Krylov routines.

template <typename V>
std::complex<double> dotc(std::span<const V> a, std::span<const V> b) {
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += conj_if(a[i]) * b[i];
  return s;
}

template <typename V>
double norm2(std::span<const V> a) {
  double s = 0.0;
  for (const auto& x : a) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace pdqs
