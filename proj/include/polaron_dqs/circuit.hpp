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
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdqs {

/// Base operation of a gate; controls are carried separately.
enum class Op { X, H, Rx, Ry, Rz, Phase, Swap };

inline bool op_has_angle(Op op) {
  return op == Op::Rx || op == Op::Ry || op == Op::Rz || op == Op::Phase;
}
inline int op_targets(Op op) { return op == Op::Swap ? 2 : 1; }

inline const char* op_name(Op op) {
  switch (op) {
    case Op::X: return "X";
    case Op::H: return "H";
    case Op::Rx: return "RX";
    case Op::Ry: return "RY";
    case Op::Rz: return "RZ";
    case Op::Phase: return "T";
    case Op::Swap: return "SWAP";
  }
  return "?";
}

using Mat2 = std::array<std::complex<double>, 4>;  // row-major

/// 2x2 matrix of a single-target op.
///
/// Rz(t) = exp(-i t Z / 2); T(t) = diag(1, exp(-i t)); Ry(t) = exp(-i t Y / 2).
inline Mat2 op_matrix(Op op, double angle) {
  const std::complex<double> I{0.0, 1.0};
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  switch (op) {
    case Op::X: return {0.0, 1.0, 1.0, 0.0};
    case Op::H: {
      const double r = 1.0 / std::sqrt(2.0);
      return {r, r, r, -r};
    }
    case Op::Rx: return {c, -I * s, -I * s, c};
    case Op::Ry: return {c, -s, s, c};
    case Op::Rz: return {std::exp(-0.5 * I * angle), 0.0, 0.0, std::exp(0.5 * I * angle)};
    case Op::Phase: return {1.0, 0.0, 0.0, std::exp(-I * angle)};
    case Op::Swap: break;
  }
  throw std::logic_error("op_matrix: SWAP has no 2x2 matrix");
}

/// One gate: `qubits` lists the controls first, then the targets.
struct Gate {
  Op op = Op::X;
  int n_controls = 0;
  std::vector<int> qubits;
  double angle = 0.0;

  int n_targets() const { return op_targets(op); }
  std::span<const int> controls() const { return {qubits.data(), static_cast<std::size_t>(n_controls)}; }
  std::span<const int> targets() const {
    return {qubits.data() + n_controls, qubits.size() - static_cast<std::size_t>(n_controls)};
  }
  int target() const { return qubits[static_cast<std::size_t>(n_controls)]; }
  bool is_diagonal() const { return op == Op::Rz || op == Op::Phase; }

  std::string name() const {
    if (op == Op::X && n_controls == 1) return "CNOT";
    return std::string(static_cast<std::size_t>(n_controls), 'C') + op_name(op);
  }

  Gate inverse() const {
    Gate g = *this;
    if (op_has_angle(op)) g.angle = -angle;
    return g;
  }

  void validate() const {
    if (n_controls < 0) throw std::invalid_argument("Gate: negative control count");
    if (qubits.size() != static_cast<std::size_t>(n_controls + n_targets()))
      throw std::invalid_argument("Gate " + name() + ": operand count does not match kind");
    for (std::size_t i = 0; i < qubits.size(); ++i) {
      if (qubits[i] < 0) throw std::invalid_argument("Gate: negative qubit index");
      for (std::size_t j = i + 1; j < qubits.size(); ++j)
        if (qubits[i] == qubits[j]) throw std::invalid_argument("Gate " + name() + ": repeated operand");
    }
  }

  bool operator==(const Gate&) const = default;
};

namespace gate {
inline Gate single(Op op, int q, double angle = 0.0) { return Gate{op, 0, {q}, angle}; }
inline Gate x(int q) { return single(Op::X, q); }
inline Gate h(int q) { return single(Op::H, q); }
inline Gate rx(int q, double a) { return single(Op::Rx, q, a); }
inline Gate ry(int q, double a) { return single(Op::Ry, q, a); }
inline Gate rz(int q, double a) { return single(Op::Rz, q, a); }
inline Gate phase(int q, double a) { return single(Op::Phase, q, a); }
inline Gate cnot(int c, int t) { return Gate{Op::X, 1, {c, t}, 0.0}; }
inline Gate swap(int a, int b) { return Gate{Op::Swap, 0, {a, b}, 0.0}; }
inline Gate cry(int c, int t, double a) { return Gate{Op::Ry, 1, {c, t}, a}; }
inline Gate crz(int c, int t, double a) { return Gate{Op::Rz, 1, {c, t}, a}; }
inline Gate cphase(int c, int t, double a) { return Gate{Op::Phase, 1, {c, t}, a}; }
}  // namespace gate

struct ResourceReport {
  std::size_t total_gates = 0;
  std::size_t two_qubit_gates = 0;
  std::size_t depth = 0;
  std::map<std::string, std::size_t> histogram;
};

/// Ordered gate list over n_qubits with a tracked global phase exp(i global_phase).
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 0) throw std::invalid_argument("Circuit: negative qubit count");
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }
  double global_phase() const { return global_phase_; }

  Circuit& append(Gate g) {
    g.validate();
    for (int q : g.qubits)
      if (q >= n_qubits_)
        throw std::out_of_range("Circuit::append: qubit " + std::to_string(q) + " >= " +
                                std::to_string(n_qubits_));
    gates_.push_back(std::move(g));
    return *this;
  }
  Circuit& add_global_phase(double phi) {
    global_phase_ += phi;
    return *this;
  }
  Circuit& append(const Circuit& other) {
    if (other.n_qubits_ != n_qubits_)
      throw std::invalid_argument("Circuit::append: qubit-count mismatch");
    gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
    global_phase_ += other.global_phase_;
    return *this;
  }

  bool operator==(const Circuit&) const = default;

 private:
  int n_qubits_ = 0;
  std::vector<Gate> gates_;
  double global_phase_ = 0.0;
};

inline Circuit append(Circuit c, Gate g) { return std::move(c.append(std::move(g))); }

/// `a` followed by `b`.
inline Circuit compose(const Circuit& a, const Circuit& b) {
  Circuit out = a;
  out.append(b);
  return out;
}

inline Circuit inverse(const Circuit& c) {
  Circuit out(c.n_qubits());
  for (auto it = c.gates().rbegin(); it != c.gates().rend(); ++it) out.append(it->inverse());
  out.add_global_phase(-c.global_phase());
  return out;
}

/// `c` repeated `times` times.
inline Circuit repeat(const Circuit& c, std::size_t times) {
  Circuit out(c.n_qubits());
  for (std::size_t i = 0; i < times; ++i) out.append(c);
  return out;
}

/// Every gate gains `control`; the global phase becomes a phase gate on it.
inline Circuit controlled(const Circuit& c, int control) {
  Circuit out(c.n_qubits());
  for (const Gate& g : c.gates()) {
    if (std::find(g.qubits.begin(), g.qubits.end(), control) != g.qubits.end())
      throw std::invalid_argument("controlled: control qubit is an operand of the circuit");
    Gate cg = g;
    cg.qubits.insert(cg.qubits.begin(), control);
    cg.n_controls += 1;
    out.append(std::move(cg));
  }
  if (c.global_phase() != 0.0) out.append(gate::phase(control, -c.global_phase()));
  return out;
}

/// Qubits touched by any gate.
inline std::vector<int> support(const Circuit& c) {
  std::vector<bool> used(static_cast<std::size_t>(c.n_qubits()), false);
  for (const Gate& g : c.gates())
    for (int q : g.qubits) used[static_cast<std::size_t>(q)] = true;
  std::vector<int> out;
  for (int q = 0; q < c.n_qubits(); ++q)
    if (used[static_cast<std::size_t>(q)]) out.push_back(q);
  return out;
}

inline ResourceReport count_resources(const Circuit& c) {
  ResourceReport r;
  std::vector<std::size_t> level(static_cast<std::size_t>(c.n_qubits()), 0);
  for (const Gate& g : c.gates()) {
    ++r.total_gates;
    if (g.qubits.size() == 2) ++r.two_qubit_gates;
    ++r.histogram[g.name()];
    std::size_t layer = 0;
    for (int q : g.qubits) layer = std::max(layer, level[static_cast<std::size_t>(q)]);
    ++layer;
    for (int q : g.qubits) level[static_cast<std::size_t>(q)] = layer;
    r.depth = std::max(r.depth, layer);
  }
  return r;
}

/// Rewrites SWAP and singly-controlled rotations into CNOT + single-qubit gates.
/// Gates with two or more controls are kept as they are.
inline Circuit lower_to_cnot(const Circuit& c) {
  Circuit out(c.n_qubits());
  out.add_global_phase(c.global_phase());
  for (const Gate& g : c.gates()) {
    if (g.op == Op::Swap && g.n_controls == 0) {
      const int a = g.qubits[0], b = g.qubits[1];
      out.append(gate::cnot(a, b)).append(gate::cnot(b, a)).append(gate::cnot(a, b));
      continue;
    }
    if (g.n_controls != 1 || g.op == Op::X) {
      out.append(g);
      continue;
    }
    const int ctl = g.qubits[0], tgt = g.qubits[1];
    switch (g.op) {
      case Op::Rz:
      case Op::Ry:
        out.append(gate::single(g.op, tgt, 0.5 * g.angle))
            .append(gate::cnot(ctl, tgt))
            .append(gate::single(g.op, tgt, -0.5 * g.angle))
            .append(gate::cnot(ctl, tgt));
        break;
      case Op::Phase:
        // exp(-i t n_c n_t) with n = (1 - Z)/2
        out.add_global_phase(-0.25 * g.angle);
        out.append(gate::rz(ctl, -0.5 * g.angle))
            .append(gate::rz(tgt, -0.5 * g.angle))
            .append(gate::cnot(ctl, tgt))
            .append(gate::rz(tgt, 0.5 * g.angle))
            .append(gate::cnot(ctl, tgt));
        break;
      default:
        out.append(g);
    }
  }
  return out;
}

// Text format: `QUBITS n`, optional `PHASE phi`, then `KIND q0 q1 ... [angle]`.

namespace detail {
inline std::string format_angle(double a) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", a);
  return buf;
}

inline Gate parse_gate_name(const std::string& name) {
  Gate g;
  std::string base = name;
  if (name == "CNOT") {
    g.op = Op::X;
    g.n_controls = 1;
    return g;
  }
  std::size_t k = 0;
  while (k < base.size() && base[k] == 'C') ++k;
  base = base.substr(k);
  g.n_controls = static_cast<int>(k);
  static const std::map<std::string, Op> ops = {{"X", Op::X},   {"H", Op::H},  {"RX", Op::Rx},
                                                {"RY", Op::Ry}, {"RZ", Op::Rz}, {"T", Op::Phase},
                                                {"SWAP", Op::Swap}};
  auto it = ops.find(base);
  if (it == ops.end()) throw std::runtime_error("circuit text: unknown gate kind '" + name + "'");
  g.op = it->second;
  return g;
}
}  // namespace detail

inline void write_circuit(std::ostream& os, const Circuit& c) {
  os << "QUBITS " << c.n_qubits() << '\n';
  if (c.global_phase() != 0.0) os << "PHASE " << detail::format_angle(c.global_phase()) << '\n';
  for (const Gate& g : c.gates()) {
    os << g.name();
    for (int q : g.qubits) os << ' ' << q;
    if (op_has_angle(g.op)) os << ' ' << detail::format_angle(g.angle);
    os << '\n';
  }
}

inline std::string to_text(const Circuit& c) {
  std::ostringstream os;
  write_circuit(os, c);
  return os.str();
}

inline Circuit read_circuit(std::istream& is) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line))
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) return true;
    return false;
  };
  if (!next_line()) throw std::runtime_error("circuit text: empty input");
  std::istringstream head(line);
  std::string tag;
  int n = -1;
  if (!(head >> tag >> n) || tag != "QUBITS" || n < 0)
    throw std::runtime_error("circuit text: expected 'QUBITS n' header");
  Circuit c(n);
  while (next_line()) {
    std::istringstream ls(line);
    std::string name;
    ls >> name;
    if (name == "PHASE") {
      std::string a;
      if (!(ls >> a)) throw std::runtime_error("circuit text: PHASE needs a value");
      c.add_global_phase(std::strtod(a.c_str(), nullptr));
      continue;
    }
    Gate g = detail::parse_gate_name(name);
    const int arity = g.n_controls + g.n_targets();
    for (int i = 0; i < arity; ++i) {
      int q;
      if (!(ls >> q)) throw std::runtime_error("circuit text: missing operand in '" + line + "'");
      g.qubits.push_back(q);
    }
    if (op_has_angle(g.op)) {
      std::string a;
      if (!(ls >> a)) throw std::runtime_error("circuit text: missing angle in '" + line + "'");
      char* end = nullptr;
      g.angle = std::strtod(a.c_str(), &end);
      if (end == a.c_str()) throw std::runtime_error("circuit text: bad angle '" + a + "'");
    }
    c.append(std::move(g));
  }
  return c;
}

inline Circuit from_text(const std::string& s) {
  std::istringstream is(s);
  return read_circuit(is);
}

}  // namespace pdqs
