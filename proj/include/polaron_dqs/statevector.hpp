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
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polaron_dqs/circuit.hpp"
#include "polaron_dqs/pauli.hpp"

namespace pdqs {

/// Dense amplitudes over 2^n basis states; bit q of the index is qubit q.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 0 || n_qubits > 40) throw std::invalid_argument("StateVector: bad qubit count");
    amps_.assign(std::size_t{1} << n_qubits, {0.0, 0.0});
    amps_[0] = 1.0;
  }
  StateVector(int n_qubits, std::vector<std::complex<double>> amps)
      : n_qubits_(n_qubits), amps_(std::move(amps)) {
    if (amps_.size() != (std::size_t{1} << n_qubits))
      throw std::invalid_argument("StateVector: amplitude count is not 2^n_qubits");
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const std::complex<double>> amplitudes() const { return amps_; }
  std::span<std::complex<double>> amplitudes() { return amps_; }
  const std::complex<double>& operator[](std::size_t i) const { return amps_[i]; }
  std::complex<double>& operator[](std::size_t i) { return amps_[i]; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

 private:
  int n_qubits_ = 0;
  std::vector<std::complex<double>> amps_;
};

/// Basis state; `bits[i]` is the value of qubit i.
inline StateVector init_basis(int n_qubits, const std::string& bits) {
  if (bits.size() != static_cast<std::size_t>(n_qubits))
    throw std::invalid_argument("init_basis: bitstring length does not match qubit count");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      idx |= std::size_t{1} << i;
    else if (bits[i] != '0')
      throw std::invalid_argument("init_basis: bitstring must contain only 0 and 1");
  }
  StateVector s(n_qubits);
  s[0] = 0.0;
  s[idx] = 1.0;
  return s;
}

inline StateVector init_basis(int n_qubits, std::size_t index) {
  StateVector s(n_qubits);
  if (index >= s.dim()) throw std::out_of_range("init_basis: index out of range");
  s[0] = 0.0;
  s[index] = 1.0;
  return s;
}

/// A sub-state on an ordered list of qubits; qubits[0] is the least significant.
struct RegisterState {
  std::vector<int> qubits;
  std::vector<std::complex<double>> amplitudes;
};

namespace detail {
inline std::size_t scatter_bits(std::size_t value, std::span<const int> qubits) {
  std::size_t out = 0;
  for (std::size_t b = 0; b < qubits.size(); ++b)
    if ((value >> b) & 1U) out |= std::size_t{1} << qubits[b];
  return out;
}
inline std::size_t gather_bits(std::size_t index, std::span<const int> qubits) {
  std::size_t out = 0;
  for (std::size_t b = 0; b < qubits.size(); ++b)
    if ((index >> qubits[b]) & 1U) out |= std::size_t{1} << b;
  return out;
}
inline std::size_t mask_of(std::span<const int> qubits) {
  std::size_t m = 0;
  for (int q : qubits) m |= std::size_t{1} << q;
  return m;
}
}  // namespace detail

/// Replaces the |0...0> content of `reg.qubits` by `reg.amplitudes`.
///
/// Valid only while the register is still in |0...0> (checked); this is how
/// oscillator vacua are loaded without a preparation circuit.
inline void inject_register(StateVector& s, const RegisterState& reg, double tol = 1e-14) {
  const std::size_t n_local = std::size_t{1} << reg.qubits.size();
  if (reg.amplitudes.size() != n_local)
    throw std::invalid_argument("inject_register: amplitude count is not 2^|register|");
  for (int q : reg.qubits)
    if (q < 0 || q >= s.n_qubits()) throw std::out_of_range("inject_register: qubit out of range");
  const std::size_t mask = detail::mask_of(reg.qubits);
  auto amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i)
    if ((i & mask) != 0 && std::abs(amps[i]) > tol)
      throw std::logic_error("inject_register: register is not in |0...0>");
  std::vector<std::size_t> offsets(n_local);
  for (std::size_t j = 0; j < n_local; ++j) offsets[j] = detail::scatter_bits(j, reg.qubits);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & mask) != 0) continue;
    const std::complex<double> a = amps[i];
    if (a == std::complex<double>{0.0, 0.0}) continue;
    for (std::size_t j = n_local; j-- > 0;) amps[i | offsets[j]] = a * reg.amplitudes[j];
  }
}

/// Tensor product of register sub-states; qubits not covered start in |0>.
/// Each sub-state is normalized before use.
inline StateVector init_product(int n_qubits, const std::vector<RegisterState>& regs) {
  std::size_t used = 0;
  for (const auto& r : regs) {
    const std::size_t m = detail::mask_of(r.qubits);
    if (m & used) throw std::invalid_argument("init_product: registers overlap");
    used |= m;
  }
  StateVector s(n_qubits);
  for (auto r : regs) {
    double n2 = 0.0;
    for (const auto& a : r.amplitudes) n2 += std::norm(a);
    if (!(n2 > 0.0)) throw std::invalid_argument("init_product: zero sub-state");
    for (auto& a : r.amplitudes) a /= std::sqrt(n2);
    inject_register(s, r);
  }
  return s;
}

namespace detail {

// Complex multiply without the NaN/Inf recovery path of operator*.
inline std::complex<double> cmul(std::complex<double> a, std::complex<double> b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline std::size_t insert_zero(std::size_t i, int bit) {
  const std::size_t low = i & ((std::size_t{1} << bit) - 1);
  return ((i >> bit) << (bit + 1)) | low;
}

}  // namespace detail

inline void apply_gate(StateVector& s, const Gate& g) {
  g.validate();
  for (int q : g.qubits)
    if (q >= s.n_qubits()) throw std::out_of_range("apply_gate: qubit index out of range");
  auto amps = s.amplitudes();
  const std::size_t cmask = detail::mask_of(g.controls());

  if (g.op == Op::Swap) {
    const std::size_t a = std::size_t{1} << g.targets()[0];
    const std::size_t b = std::size_t{1} << g.targets()[1];
    for (std::size_t i = 0; i < amps.size(); ++i)
      if ((i & a) && !(i & b) && (i & cmask) == cmask) std::swap(amps[i], amps[i ^ a ^ b]);
    return;
  }

  const int t = g.target();
  const std::size_t tbit = std::size_t{1} << t;
  const std::size_t half = amps.size() >> 1;
  const Mat2 m = op_matrix(g.op, g.angle);

  if (g.op == Op::X) {
    for (std::size_t k = 0; k < half; ++k) {
      const std::size_t i0 = detail::insert_zero(k, t);
      if ((i0 & cmask) == cmask) std::swap(amps[i0], amps[i0 | tbit]);
    }
    return;
  }
  if (g.is_diagonal()) {
    for (std::size_t k = 0; k < half; ++k) {
      const std::size_t i0 = detail::insert_zero(k, t);
      if ((i0 & cmask) != cmask) continue;
      amps[i0] = detail::cmul(m[0], amps[i0]);
      amps[i0 | tbit] = detail::cmul(m[3], amps[i0 | tbit]);
    }
    return;
  }
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i0 = detail::insert_zero(k, t);
    if ((i0 & cmask) != cmask) continue;
    const std::complex<double> a0 = amps[i0];
    const std::complex<double> a1 = amps[i0 | tbit];
    amps[i0] = detail::cmul(m[0], a0) + detail::cmul(m[1], a1);
    amps[i0 | tbit] = detail::cmul(m[2], a0) + detail::cmul(m[3], a1);
  }
}

inline void apply_circuit(StateVector& s, const Circuit& c) {
  if (c.n_qubits() != s.n_qubits())
    throw std::invalid_argument("apply_circuit: circuit and state have different qubit counts");
  for (const Gate& g : c.gates()) apply_gate(s, g);
  if (c.global_phase() != 0.0) {
    const std::complex<double> ph = std::polar(1.0, c.global_phase());
    for (auto& a : s.amplitudes()) a = detail::cmul(ph, a);
  }
}

inline StateVector run(const Circuit& c, StateVector s) {
  apply_circuit(s, c);
  return s;
}

/// <a|b>, summed in index order.
inline std::complex<double> overlap(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("overlap: dimension mismatch");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) acc += detail::cmul(std::conj(a[i]), b[i]);
  return acc;
}

/// Exact <s|P|s> for a Hermitian Pauli sum.
inline double expectation_pauli(const StateVector& s, const PauliSum& p) {
  if (!p.is_hermitian()) throw std::invalid_argument("expectation_pauli: Pauli sum is not Hermitian");
  if (p.max_qubit() >= s.n_qubits()) throw std::out_of_range("expectation_pauli: qubit out of range");
  const std::complex<double> I{0.0, 1.0};
  double total = 0.0;
  for (const auto& term : p.terms()) {
    std::size_t flip = 0, zmask = 0, ymask = 0;
    for (const auto& [q, op] : term.factors) {
      const std::size_t b = std::size_t{1} << q;
      if (op != Pauli::Z) flip |= b;
      if (op == Pauli::Z) zmask |= b;
      if (op == Pauli::Y) ymask |= b;
    }
    // P|i> = phase(i) |i ^ flip>; Y|0> = i|1>, Y|1> = -i|0>
    const std::size_t ny = static_cast<std::size_t>(std::popcount(ymask));
    std::complex<double> yphase = 1.0;
    for (std::size_t k = 0; k < (ny & 3U); ++k) yphase *= I;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < s.dim(); ++i) {
      const int parity = (std::popcount(i & zmask) + std::popcount(i & ymask)) & 1;
      const std::complex<double> ph = parity ? -yphase : yphase;
      acc += std::conj(s[i ^ flip]) * ph * s[i];
    }
    total += (term.coefficient * acc).real();
  }
  return total;
}

/// Born-rule marginal over `qubits`; outcome bit b is qubits[b].
inline std::vector<double> measure_register(const StateVector& s, const std::vector<int>& qubits) {
  for (int q : qubits)
    if (q < 0 || q >= s.n_qubits()) throw std::out_of_range("measure_register: qubit out of range");
  std::vector<double> dist(std::size_t{1} << qubits.size(), 0.0);
  for (std::size_t i = 0; i < s.dim(); ++i) dist[detail::gather_bits(i, qubits)] += std::norm(s[i]);
  return dist;
}

/// Seeded multinomial sampling of an outcome distribution.
inline std::vector<std::size_t> sample_counts(const std::vector<double>& dist, std::size_t shots,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> d(dist.begin(), dist.end());
  std::vector<std::size_t> counts(dist.size(), 0);
  for (std::size_t k = 0; k < shots; ++k) ++counts[d(rng)];
  return counts;
}

/// Columns of the circuit unitary, obtained by running each basis state.
inline std::vector<std::complex<double>> circuit_unitary(const Circuit& c) {
  const std::size_t dim = std::size_t{1} << c.n_qubits();
  std::vector<std::complex<double>> u(dim * dim);
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector s = init_basis(c.n_qubits(), col);
    apply_circuit(s, c);
    for (std::size_t row = 0; row < dim; ++row) u[row * dim + col] = s[row];
  }
  return u;
}

// Binary dump: 8-byte magic, uint32 n_qubits, then (re, im) doubles in index order,
// all little-endian.

inline constexpr char kStateMagic[8] = {'P', 'D', 'Q', 'S', 'S', 'V', '0', '1'};

namespace detail {
inline bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}
template <typename T>
void write_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if (!host_is_little_endian()) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}
template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T)))
    throw std::runtime_error("state dump: truncated input");
  if (!host_is_little_endian()) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}
}  // namespace detail

inline void write_state(std::ostream& os, const StateVector& s) {
  os.write(kStateMagic, sizeof kStateMagic);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_qubits()));
  for (const auto& a : s.amplitudes()) {
    detail::write_le<double>(os, a.real());
    detail::write_le<double>(os, a.imag());
  }
}

inline StateVector read_state(std::istream& is) {
  char magic[sizeof kStateMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kStateMagic, sizeof magic) != 0)
    throw std::runtime_error("state dump: bad magic");
  const auto n = detail::read_le<std::uint32_t>(is);
  if (n > 40) throw std::runtime_error("state dump: qubit count too large");
  std::vector<std::complex<double>> amps(std::size_t{1} << n);
  for (auto& a : amps) {
    const double re = detail::read_le<double>(is);
    const double im = detail::read_le<double>(is);
    a = {re, im};
  }
  return StateVector(static_cast<int>(n), std::move(amps));
}

}  // namespace pdqs
