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
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdqs {

enum class Pauli : std::uint8_t { X, Y, Z };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

/// coefficient * prod_q sigma_q. An empty factor map is the identity term.
struct PauliString {
  std::complex<double> coefficient{1.0, 0.0};
  std::map<int, Pauli> factors;

  PauliString() = default;
  PauliString(std::complex<double> c, std::map<int, Pauli> f)
      : coefficient(c), factors(std::move(f)) {}

  bool same_operator(const PauliString& o) const { return factors == o.factors; }

  std::string str() const {
    std::ostringstream os;
    os << "(" << coefficient.real() << (coefficient.imag() < 0 ? "-" : "+")
       << std::abs(coefficient.imag()) << "i)";
    for (const auto& [q, p] : factors) os << " " << pauli_char(p) << q;
    return os.str();
  }
};

namespace detail {

// single-site product a*b = phase * result (result nullopt means identity)
struct SiteProduct {
  std::complex<double> phase;
  bool identity;
  Pauli result;
};

inline SiteProduct site_product(Pauli a, Pauli b) {
  using P = Pauli;
  const std::complex<double> I{0.0, 1.0};
  if (a == b) return {1.0, true, P::X};
  if (a == P::X && b == P::Y) return {I, false, P::Z};
  if (a == P::Y && b == P::X) return {-I, false, P::Z};
  if (a == P::Y && b == P::Z) return {I, false, P::X};
  if (a == P::Z && b == P::Y) return {-I, false, P::X};
  if (a == P::Z && b == P::X) return {I, false, P::Y};
  return {-I, false, P::Y};  // X*Z
}

}  // namespace detail

inline PauliString operator*(const PauliString& a, const PauliString& b) {
  PauliString out;
  out.coefficient = a.coefficient * b.coefficient;
  out.factors = a.factors;
  for (const auto& [q, pb] : b.factors) {
    auto it = out.factors.find(q);
    if (it == out.factors.end()) {
      out.factors.emplace(q, pb);
      continue;
    }
    const auto sp = detail::site_product(it->second, pb);
    out.coefficient *= sp.phase;
    if (sp.identity)
      out.factors.erase(it);
    else
      it->second = sp.result;
  }
  return out;
}

/// Sum of Pauli strings, kept simplified: like terms merged, zero terms dropped.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(PauliString s) { add(std::move(s)); }

  static PauliSum identity(std::complex<double> c = 1.0) {
    return PauliSum(PauliString{c, {}});
  }
  static PauliSum single(Pauli p, int q, std::complex<double> c = 1.0) {
    return PauliSum(PauliString{c, {{q, p}}});
  }

  void add(PauliString s, double drop_tol = 1e-15) {
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
      if (it->same_operator(s)) {
        it->coefficient += s.coefficient;
        if (std::abs(it->coefficient) <= drop_tol) terms_.erase(it);
        return;
      }
    }
    if (std::abs(s.coefficient) > drop_tol) terms_.push_back(std::move(s));
  }

  const std::vector<PauliString>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  PauliSum& operator+=(const PauliSum& o) {
    for (const auto& t : o.terms_) add(t);
    return *this;
  }
  PauliSum& operator*=(std::complex<double> c) {
    if (c == std::complex<double>{0.0, 0.0}) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.coefficient *= c;
    return *this;
  }

  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, PauliSum b) {
    b *= -1.0;
    return a += b;
  }
  friend PauliSum operator*(PauliSum a, std::complex<double> c) { return a *= c; }
  friend PauliSum operator*(std::complex<double> c, PauliSum a) { return a *= c; }

  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    PauliSum out;
    for (const auto& x : a.terms_)
      for (const auto& y : b.terms_) out.add(x * y);
    return out;
  }

  /// True when every coefficient is real to within tol (each string is Hermitian).
  bool is_hermitian(double tol = 1e-12) const {
    return std::all_of(terms_.begin(), terms_.end(), [tol](const PauliString& t) {
      return std::abs(t.coefficient.imag()) <= tol;
    });
  }

  int max_qubit() const {
    int m = -1;
    for (const auto& t : terms_)
      if (!t.factors.empty()) m = std::max(m, t.factors.rbegin()->first);
    return m;
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < terms_.size(); ++i) os << (i ? " + " : "") << terms_[i].str();
    return os.str();
  }

 private:
  std::vector<PauliString> terms_;
};

/// Row-major dense matrix of a Pauli sum on n_qubits, qubit 0 least significant.
inline std::vector<std::complex<double>> dense_matrix(const PauliSum& s, int n_qubits) {
  if (s.max_qubit() >= n_qubits) throw std::out_of_range("dense_matrix: qubit index too large");
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<std::complex<double>> m(dim * dim);
  const std::complex<double> I{0.0, 1.0};
  for (const auto& t : s.terms()) {
    std::uint64_t flip = 0;
    for (const auto& [q, p] : t.factors)
      if (p != Pauli::Z) flip |= std::uint64_t{1} << q;
    for (std::size_t col = 0; col < dim; ++col) {
      std::complex<double> amp = t.coefficient;
      for (const auto& [q, p] : t.factors) {
        const bool bit = (col >> q) & 1U;
        if (p == Pauli::Z && bit) amp = -amp;
        if (p == Pauli::Y) amp *= bit ? -I : I;
      }
      m[(col ^ flip) * dim + col] += amp;
    }
  }
  return m;
}

}  // namespace pdqs
