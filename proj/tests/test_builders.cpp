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


#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "polaron_dqs/builders.hpp"
#include "polaron_dqs/statevector.hpp"

using namespace pdqs;
using oracle::cd;
using oracle::Mat;
constexpr double kPi = std::numbers::pi;

static RegisterLayout bare(int n, int nq) { return RegisterLayout(n, nq, RegisterLayout::Ancillas{false, false, 0}); }

static Mat unitary(const Circuit& c) { return oracle::circuit_matrix(c); }

static Mat position(int site, const RegisterLayout& l, const BosonGrid& g) {
  return oracle::pauli_sum(position_operator(site, l, g), l.total_qubits());
}
static Mat number(int site, const RegisterLayout& l) {
  return oracle::pauli_sum(jw_map(FermionOp::number, site, l.n_sites()), l.total_qubits());
}

// Entangler on (aux, n) written out in the |aux n> basis.
static Mat entangler_reference(double phi) {
  // index = aux + 2 n with aux on qubit 0
  Mat u = Mat::Identity(4, 4);
  const double c = std::cos(phi), s = std::sin(phi);
  u(0, 0) = c;
  u(3, 0) = s;
  u(0, 3) = -s;
  u(3, 3) = c;
  return u;
}

TEST(Entangler, Examples) {
  EXPECT_LT(oracle::max_abs(unitary(build_entangler(0.0, 0, 1, 2)) - Mat::Identity(4, 4)), 1e-15);
  const Mat u = unitary(build_entangler(kPi / 2, 0, 1, 2));
  EXPECT_NEAR(std::abs(u(3, 0) - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(u(0, 3) + 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(u(1, 1) - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(u(2, 2) - 1.0), 0, 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 20; ++i) {
    const double phi = a(rng);
    EXPECT_LT(oracle::max_abs(unitary(build_entangler(phi, 0, 1, 2)) - entangler_reference(phi)), 1e-12);
  }
  EXPECT_THROW(build_entangler(0.1, 1, 1, 2), std::invalid_argument);
}

static double w_fidelity(int N) {
  StateVector s(N + 1);
  apply_circuit(s, build_w_state_circuit(N));
  cd ov = 0;
  for (int n = 0; n < N; ++n) ov += s[(std::size_t{1} << n) | (std::size_t{1} << N)] / std::sqrt(double(N));
  return std::norm(ov);
}

TEST(WState, Examples) {
  const auto phi1 = w_state_angles(1);
  EXPECT_NEAR(phi1[0], kPi / 2, 1e-15);
  StateVector s(2);
  apply_circuit(s, build_w_state_circuit(1));
  EXPECT_NEAR(std::abs(s[3] - 1.0), 0, 1e-12);
  StateVector s2(3);
  apply_circuit(s2, build_w_state_circuit(2));
  EXPECT_NEAR(std::abs(s2[0b101] - 1 / std::sqrt(2.0)), 0, 1e-12);
  EXPECT_NEAR(std::abs(s2[0b110] - 1 / std::sqrt(2.0)), 0, 1e-12);
  for (int N = 1; N <= 8; ++N) EXPECT_GE(w_fidelity(N), 1 - 1e-10) << N;
}

TEST(WState, GateCountIsAffine) {
  std::vector<std::size_t> g;
  for (int N = 1; N <= 10; ++N) g.push_back(count_resources(build_w_state_circuit(N)).total_gates);
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_EQ(g[i] - g[i - 1], g[1] - g[0]);
}

TEST(WState, AngleConditions) {
  for (int N = 1; N <= 64; ++N) {
    const auto phi = w_state_angles(N);
    double prod = 1.0;
    for (double p : phi) prod *= std::cos(p);
    EXPECT_LE(std::abs(prod), 1e-15);
    for (int n = 0; n + 1 < N; ++n)
      EXPECT_NEAR(std::cos(phi[n]) * std::abs(std::sin(phi[n + 1])), std::abs(std::sin(phi[n])), 1e-15);
  }
}

TEST(WState, LayoutVariantUsesExcitationQubitsAndAncilla) {
  const RegisterLayout l(3, 1);
  StateVector s(l.total_qubits());
  apply_circuit(s, build_w_state_circuit(l));
  const std::size_t anc = std::size_t{1} << *l.w_ancilla();
  double w = 0;
  for (int n = 1; n <= 3; ++n) w += std::norm(s[anc | (std::size_t{1} << l.excitation_qubit(n))]);
  EXPECT_NEAR(w, 1.0, 1e-12);
}

TEST(Hopping, ZeroAngleAndSingleBondRabi) {
  const RegisterLayout l = bare(3, 1);
  EXPECT_LT(oracle::max_abs(unitary(build_hopping_step(0.0, l)) - Mat::Identity(64, 64)), 1e-14);
  const RegisterLayout two(2, 0, RegisterLayout::Ancillas{false, false, 0});
  for (double th : {0.1, 0.7, 1.3}) {
    StateVector s = init_basis(2, "10");
    apply_circuit(s, build_hopping_bond(th, 1, two));
    EXPECT_NEAR(std::norm(s[2]), std::pow(std::sin(th), 2), 1e-14);
    // both ring bonds of N = 2 coincide
    StateVector t = init_basis(2, "10");
    apply_circuit(t, build_hopping_step(th, two));
    EXPECT_NEAR(std::norm(t[2]), std::pow(std::sin(2 * th), 2), 1e-14);
  }
}

TEST(Hopping, BondEqualsExponentialOfJordanWignerImage) {
  for (int N : {3, 4}) {
    const RegisterLayout l = bare(N, 0);
    for (int n = 1; n <= N; ++n) {
      const Mat h = oracle::pauli_sum(jw_hopping_operator(n, N), N);
      EXPECT_LT(oracle::max_abs(unitary(build_hopping_bond(0.37, n, l)) - oracle::expm_hermitian(h, -0.37)), 1e-12);
    }
  }
}

TEST(Hopping, FreeDispersionPhases) {
  const int N = 4;
  const RegisterLayout l = bare(N, 0);
  const double t = 1.0;
  for (int ns : {50, 100}) {
    const Circuit step = build_hopping_step(t / ns, l);
    double worst = 0;
    for (double k : allowed_quasimomenta(N)) {
      std::vector<cd> amp(16, 0.0);
      for (int n = 0; n < N; ++n) amp[std::size_t{1} << n] = std::exp(cd(0, k * n)) / 2.0;
      StateVector s0(N, amp), s = s0;
      for (int i = 0; i < ns; ++i) apply_circuit(s, step);
      worst = std::max(worst, std::abs(overlap(s0, s) - std::exp(cd(0, 2 * t * std::cos(k)))));
    }
    EXPECT_LT(worst, 2.0 * t * t / ns);
  }
}

TEST(BosonX2, DiagonalPhases) {
  for (int nq : {2, 3}) {
    const RegisterLayout l = bare(2, nq);
    const BosonGrid g(nq);
    const double th = 0.813;
    const Mat u = unitary(build_boson_x2_step(th, 2, l, g));
    EXPECT_LT(oracle::max_abs(u - Mat(u.diagonal().asDiagonal())), 1e-15);
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double x = g.x_value((std::size_t(i) >> l.boson_qubit(2, 0)) & (g.n_points() - 1));
      EXPECT_NEAR(std::abs(u(i, i) - std::exp(cd(0, -th * x * x))), 0, 1e-12);
    }
    EXPECT_LT(oracle::max_abs(unitary(build_boson_x2_step(0.0, 1, l, g)) - Mat::Identity(u.rows(), u.cols())), 1e-15);
  }
}

TEST(QFT, OneQubitIsHadamardAndThreeQubitsIsDFT) {
  Circuit h(1);
  h.append(gate::h(0));
  EXPECT_LT(oracle::max_abs(unitary(build_qft({0}, 1)) - unitary(h)), 1e-15);
  const Mat f = unitary(build_qft({0, 1, 2}, 3));
  for (int m = 0; m < 8; ++m)
    for (int j = 0; j < 8; ++j)
      EXPECT_NEAR(std::abs(f(m, j) - std::exp(cd(0, 2 * kPi * j * m / 8)) / std::sqrt(8.0)), 0, 1e-12);
  // non-contiguous register on a larger circuit
  const Mat g = unitary(build_qft({3, 1}, 4));
  EXPECT_NEAR(std::abs(g(0b1000, 0b1000) - cd(0, 1) / 2.0), 0, 1e-12);
  EXPECT_NEAR(std::abs(g(0b0010, 0b1000) + 0.5), 0, 1e-12);
}

// exp(-i theta p^2) from an explicit centered DFT.
static Mat p2_exponential(const BosonGrid& g, double th) {
  const auto n = Eigen::Index(g.n_points());
  Mat f(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index j = 0; j < n; ++j) f(m, j) = std::exp(cd(0, -0.5 * g.p_value(m) * g.x_value(j))) / std::sqrt(double(n));
  Mat d = Mat::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) d(m, m) = std::exp(cd(0, -th * g.p_value(m) * g.p_value(m)));
  return f.adjoint() * d * f;
}

TEST(BosonP2, MatchesCenteredFourierOracle) {
  for (int nq : {1, 2, 3}) {
    const RegisterLayout l = bare(2, nq);
    const BosonGrid g(nq);
    const double th = 0.29;
    const Mat u = unitary(build_boson_p2_step(th, 1, l, g));
    const Mat single = p2_exponential(g, th);
    // embed single-register operator: register of site 1 occupies qubits 2 .. 2 + nq - 1
    const auto n = Eigen::Index(g.n_points());
    Mat full = oracle::kron(Mat::Identity(n, n), single);       // site 2 register (high), site 1 register
    full = oracle::kron(full, Mat::Identity(4, 4));         // excitation qubits 0, 1
    EXPECT_LT(oracle::max_abs(u - full), 1e-12) << nq;
  }
}

TEST(FreeBoson, StepReproducesOscillatorRevival) {
  // a displaced Gaussian returns after one period 2 pi / w_b of the oscillator (x^2 + p^2) / 4
  const int nq = 6;
  const RegisterLayout l = bare(1, nq);
  const BosonGrid g(nq);
  const int steps = 400;
  const double dt = 2 * kPi / steps;
  Circuit step(l.total_qubits());
  step.append(build_boson_x2_step(0.125 * dt, 1, l, g));
  step.append(build_boson_p2_step(0.25 * dt, 1, l, g));
  step.append(build_boson_x2_step(0.125 * dt, 1, l, g));
  std::vector<cd> amp(g.n_points());
  double norm = 0;
  for (std::size_t j = 0; j < amp.size(); ++j) {
    const double x = g.x_value(j) - 1.5;
    amp[j] = std::exp(-x * x / 4);
    norm += std::norm(amp[j]);
  }
  for (auto& a : amp) a /= std::sqrt(norm);
  StateVector s(l.total_qubits());
  inject_register(s, RegisterState{l.boson_register(1), amp});
  const StateVector s0 = s;
  for (int i = 0; i < steps / 2; ++i) apply_circuit(s, step);
  EXPECT_LT(std::norm(overlap(s0, s)), 0.5);
  for (int i = 0; i < steps / 2; ++i) apply_circuit(s, step);
  EXPECT_GE(std::norm(overlap(s0, s)), 1 - 1e-3);
}

TEST(Breathing, MatchesExponentialOfGenerator) {
  for (int nq : {1, 2}) {
    const RegisterLayout l = bare(3, nq);
    const BosonGrid g(nq);
    for (int n = 1; n <= 3; ++n) {
      const double th = 0.41;
      const Mat gen = number(n, l) * (position(l.prev_site(n), l, g) - position(l.next_site(n), l, g));
      const Mat u = unitary(build_breathing_step(th, n, l, g));
      EXPECT_LT(oracle::max_abs(u - oracle::expm_hermitian(gen, th)), 1e-12) << nq << " " << n;
    }
  }
  const RegisterLayout l = bare(3, 1);
  EXPECT_LT(oracle::max_abs(unitary(build_breathing_step(0.0, 2, l, BosonGrid(1))) - Mat::Identity(64, 64)), 1e-15);
}

TEST(Breathing, IdentityWithoutExcitationAndDiagonalInGrid) {
  const RegisterLayout l = bare(3, 2);
  const BosonGrid g(2);
  const Mat u = unitary(build_breathing_step(0.9, 2, l, g));
  EXPECT_LT(oracle::max_abs(u - Mat(u.diagonal().asDiagonal())), 1e-15);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    if ((i & 0b111) == 0) {
      EXPECT_NEAR(std::abs(u(i, i) - 1.0), 0, 1e-12);
    }
}

TEST(Peierls, CoreMatchesZZExponential) {
  for (int N : {2, 3, 4}) {
    const RegisterLayout l = bare(N, 1);
    const BosonGrid g(1);
    for (int n = 1; n <= N; ++n) {
      const auto qs = bond_support(n, l, false);
      std::map<int, char> f;
      for (int q : qs) f[q] = 'Z';
      const Mat zz = oracle::pauli_string(f, l.total_qubits());
      const Mat gen = 0.5 * zz * (position(l.next_site(n), l, g) - position(n, l, g));
      const double th = 0.53;
      EXPECT_LT(oracle::max_abs(unitary(build_peierls_core(th, n, l, g)) - oracle::expm_hermitian(gen, th)), 1e-12);
    }
  }
}

TEST(Peierls, StepMatchesExponentialOfJordanWignerTerm) {
  for (int N : {2, 3}) {
    const RegisterLayout l = bare(N, 1);
    const BosonGrid g(1);
    for (int n = 1; n <= N; ++n) {
      const Mat hop = oracle::pauli_sum(jw_hopping_operator(n, N), l.total_qubits());
      const Mat gen = hop * (position(l.next_site(n), l, g) - position(n, l, g));
      const double th = 0.67;
      const Mat u = unitary(build_peierls_step(th, n, l, g));
      // U_X and U_Y commute on a bond, so the split carries no error
      EXPECT_LT(oracle::max_abs(u - oracle::expm_hermitian(gen, th)), 1e-12) << N << " " << n;
    }
  }
  const RegisterLayout l = bare(2, 1);
  EXPECT_LT(oracle::max_abs(unitary(build_peierls_step(0.0, 1, l, BosonGrid(1))) - Mat::Identity(16, 16)), 1e-15);
}

TEST(Peierls, CoreIsIdentityForEqualDisplacements) {
  const RegisterLayout l = bare(2, 2);
  const BosonGrid g(2);
  const Mat u = unitary(build_peierls_core(0.8, 1, l, g));
  EXPECT_LT(oracle::max_abs(u - Mat(u.diagonal().asDiagonal())), 1e-15);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const auto j1 = (i >> l.boson_qubit(1, 0)) & 3, j2 = (i >> l.boson_qubit(2, 0)) & 3;
    if (j1 == j2) {
      EXPECT_NEAR(std::abs(u(i, i) - 1.0), 0, 1e-12);
    }
  }
}

TEST(Trotter, SymmetricStepIsPalindromeOfHalfSteps) {
  const ModelParams p{1.0, 1.0, 0.4, 0.3, 3};
  const RegisterLayout l(3, 1);
  const BosonGrid g(1);
  TrotterPlan sym;
  sym.symmetric = true;
  TrotterPlan first;
  const Circuit half = build_trotter_step(p, l, g, 0.1, first);
  const Circuit s = build_trotter_step(p, l, g, 0.2, sym);
  ASSERT_EQ(s.size(), 2 * half.size());
  for (std::size_t i = 0; i < half.size(); ++i) EXPECT_EQ(s.gates()[i], half.gates()[i]);
  EXPECT_NEAR(s.global_phase(), 2 * half.global_phase(), 1e-15);
}

TEST(Trotter, PlanValidation) {
  TrotterPlan p;
  p.n_steps = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.n_steps = 1;
  p.order = {TrotterTerm::hopping, TrotterTerm::hopping, TrotterTerm::boson_x2, TrotterTerm::boson_p2,
             TrotterTerm::peierls};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_EQ(term_from_name("peierls"), TrotterTerm::peierls);
  EXPECT_THROW(term_from_name("nope"), std::invalid_argument);
  const ModelParams mp{1, 1, 0, 0, 3};
  EXPECT_THROW(build_trotter_step(mp, RegisterLayout(4, 1), BosonGrid(1), 0.1, TrotterPlan{}), std::invalid_argument);
  EXPECT_THROW(build_trotter_step(mp, RegisterLayout(3, 2), BosonGrid(1), 0.1, TrotterPlan{}), std::invalid_argument);
}

TEST(Trotter, FirstOrderStepMatchesProductOfExactFactors) {
  // one step is the ordered product of per-site and per-bond exponentials of the encoded Hamiltonian
  const ModelParams p{1.0, 0.8, 0.5, 0.35, 3};
  const RegisterLayout l = bare(3, 1);
  const BosonGrid g(1);
  const double dt = 0.2;
  const int nq = l.total_qubits();
  const auto dim = Eigen::Index(1) << nq;
  const Mat id = Mat::Identity(dim, dim);
  // n_q = 1: p^2 on the two-point grid from an explicit centered DFT
  Mat f(2, 2), d = Mat::Zero(2, 2);
  for (int m = 0; m < 2; ++m) {
    d(m, m) = g.p_value(m) * g.p_value(m);
    for (int j = 0; j < 2; ++j) f(m, j) = std::exp(cd(0, -0.5 * g.p_value(m) * g.x_value(j))) / std::sqrt(2.0);
  }
  const Mat p2 = f.adjoint() * d * f;
  Mat u = id;
  auto apply = [&](const Mat& h) { u = oracle::expm_hermitian(h, dt) * u; };
  for (int n = 1; n <= 3; ++n) {
    const Mat x = position(n, l, g);
    apply(0.25 * p.omega_b * x * x - 0.5 * p.omega_b * id);
  }
  for (int n = 1; n <= 3; ++n) apply(0.25 * p.omega_b * oracle::on_qubit(p2, l.boson_qubit(n, 0), nq));
  for (int n = 1; n <= 3; ++n) apply(-p.t_e * oracle::pauli_sum(jw_hopping_operator(n, 3), nq));
  for (int n = 1; n <= 3; ++n)
    apply(p.peierls_energy() * oracle::pauli_sum(jw_hopping_operator(n, 3), nq) *
          (position(l.next_site(n), l, g) - position(n, l, g)));
  for (int n = 1; n <= 3; ++n)
    apply(p.breathing_energy() * number(n, l) * (position(l.prev_site(n), l, g) - position(l.next_site(n), l, g)));
  const Mat got = unitary(build_trotter_step(p, l, g, dt, TrotterPlan{}));
  EXPECT_LT(oracle::max_abs(got - u), 1e-12);
}

TEST(Trotter, FreeQuenchKeepsInitialStateUpToPhase) {
  const ModelParams p{1.0, 1.0, 0.0, 0.0, 3};
  const RegisterLayout l(3, 4);
  const BosonGrid g(4);
  StateVector s0(l.total_qubits());
  apply_circuit(s0, build_w_state_circuit(l));
  const auto vac = vacuum_amplitudes(g);
  for (int n = 1; n <= 3; ++n) inject_register(s0, RegisterState{l.boson_register(n), std::vector<cd>(vac.begin(), vac.end())});
  TrotterPlan plan;
  plan.total_time = 2.0;
  plan.n_steps = 64;
  plan.symmetric = true;
  StateVector s = s0;
  apply_circuit(s, build_trotter_evolution(p, l, g, plan));
  EXPECT_GE(std::norm(overlap(s0, s)), 1 - 1e-6);
}

TEST(Trotter, TwoQubitGatesScaleLinearly) {
  const ModelParams p8{1, 1, 0.5, 0.5, 8}, p16{1, 1, 0.5, 0.5, 16};
  const auto c8 = count_resources(build_trotter_step(p8, RegisterLayout(8, 2), BosonGrid(2), 0.1, TrotterPlan{}));
  const auto c16 = count_resources(build_trotter_step(p16, RegisterLayout(16, 2), BosonGrid(2), 0.1, TrotterPlan{}));
  EXPECT_LE(double(c16.two_qubit_gates) / double(c8.two_qubit_gates), 2.1);
  // exact affinity of per-step counts for N >= 3
  std::vector<long> tq, tot;
  for (int N = 3; N <= 9; ++N) {
    const ModelParams p{1, 1, 0.5, 0.5, N};
    const auto r = count_resources(build_trotter_step(p, RegisterLayout(N, 2), BosonGrid(2), 0.1, TrotterPlan{}));
    tq.push_back(long(r.two_qubit_gates));
    tot.push_back(long(r.total_gates));
  }
  for (std::size_t i = 2; i < tq.size(); ++i) {
    EXPECT_EQ(tq[i] - tq[i - 1], tq[1] - tq[0]);
    EXPECT_EQ(tot[i] - tot[i - 1], tot[1] - tot[0]);
  }
}

TEST(QPE, ExactPhaseOnRz) {
  // u = Rz(theta) on |1> has eigenphase theta / 2 = 2 pi * 3/16
  const double theta = 2 * 2 * kPi * 3 / 16;
  Circuit u(5), prep(5);
  u.append(gate::rz(0, theta));
  prep.append(gate::x(0));
  const Circuit q = build_qpe(u, {1, 2, 3, 4}, prep);
  StateVector s(5);
  apply_circuit(s, q);
  const auto d = measure_register(s, {1, 2, 3, 4});
  EXPECT_NEAR(d[3], 1.0, 1e-12);
  EXPECT_THROW(build_qpe(u, {0, 1}, prep), std::invalid_argument);
  EXPECT_THROW(build_qpe(u, {}, prep), std::invalid_argument);
}

TEST(QPE, FreeTrotterStepGivesBareEnergy) {
  const ModelParams p{1.0, 1.0, 0.0, 0.0, 2};
  const int nphase = 5;
  const RegisterLayout l(2, 1, RegisterLayout::Ancillas{true, false, nphase});
  const BosonGrid g(1);
  const double dt = 0.5;
  TrotterPlan plan;
  plan.total_time = dt;
  const Circuit u = build_trotter_evolution(p, l, g, plan);
  Circuit prep = build_w_state_circuit(l);
  for (int n = 1; n <= 2; ++n) prep.append(gate::h(l.boson_qubit(n, 0)));  // n_q = 1 vacuum
  StateVector s(l.total_qubits());
  apply_circuit(s, build_qpe(u, l.phase_register(), prep));
  const auto d = measure_register(s, l.phase_register());
  const auto k = std::max_element(d.begin(), d.end()) - d.begin();
  // eigenvalue of the encoded free Hamiltonian on this state
  const BosonGrid gg(1);
  const double e_osc = 0.25 * (gg.x_value(0) * gg.x_value(0) + gg.p_value(0) * gg.p_value(0)) - 0.5;
  double target = -(-2.0 + 2 * e_osc) * dt / (2 * kPi);
  target -= std::floor(target);
  const double dist = std::abs(double(k) / (1 << nphase) - target);
  EXPECT_LE(std::min(dist, 1 - dist) * (1 << nphase), 1.0);
}

TEST(HadamardTest, Examples) {
  Circuit id(2), prep(2);
  StateVector s(2);
  apply_circuit(s, build_hadamard_test(id, prep, 1, OverlapPart::real));
  EXPECT_NEAR(expectation_pauli(s, PauliSum::single(Pauli::Z, 1)), 1.0, 1e-14);

  Circuit z(2), plus(2);
  z.append(gate::rz(0, kPi));
  plus.append(gate::h(0));
  StateVector t(2);
  apply_circuit(t, build_hadamard_test(z, plus, 1, OverlapPart::real));
  EXPECT_NEAR(expectation_pauli(t, PauliSum::single(Pauli::Z, 1)), 0.0, 1e-14);
  EXPECT_THROW(build_hadamard_test(z, plus, 0, OverlapPart::real), std::invalid_argument);
}

TEST(HadamardTest, ReproducesSurvivalProbability) {
  const ModelParams p{1.0, 1.0, 0.6, 0.3, 3};
  const RegisterLayout l(3, 1, RegisterLayout::Ancillas{true, true, 0});
  const BosonGrid g(1);
  TrotterPlan plan;
  plan.total_time = 0.8;
  plan.n_steps = 3;
  const Circuit u = build_trotter_evolution(p, l, g, plan);
  Circuit prep = build_w_state_circuit(l);
  for (int n = 1; n <= 3; ++n) prep.append(gate::h(l.boson_qubit(n, 0)));
  const int anc = *l.hadamard_ancilla();
  double parts[2];
  for (int k = 0; k < 2; ++k) {
    StateVector s(l.total_qubits());
    apply_circuit(s, build_hadamard_test(u, prep, anc, k ? OverlapPart::imag : OverlapPart::real));
    parts[k] = expectation_pauli(s, PauliSum::single(Pauli::Z, anc));
  }
  StateVector a(l.total_qubits());
  apply_circuit(a, prep);
  StateVector b = a;
  apply_circuit(b, u);
  const cd G = overlap(a, b);
  EXPECT_NEAR(parts[0], G.real(), 1e-12);
  EXPECT_NEAR(parts[1], G.imag(), 1e-12);
  EXPECT_NEAR(parts[0] * parts[0] + parts[1] * parts[1], std::norm(G), 1e-12);
}
