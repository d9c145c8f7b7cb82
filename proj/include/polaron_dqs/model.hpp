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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdqs {

using cplx = std::complex<double>;

/// Physical couplings of the lattice model.
///
/// Energies are in the caller's units (t_e is the natural unit for reports).
/// Couplings are dimensionless: the real-space interaction prefactors are
/// alpha_P * xi_0 = g_P * omega_b and alpha_B * xi_0 = g_B * omega_b, with
/// displacements measured as x = b^dagger + b. The lattice is always a ring.
struct ModelParams {
  double t_e = 1.0;
  double omega_b = 1.0;
  double g_P = 0.0;
  double g_B = 0.0;
  int n_sites = 2;

  void validate() const {
    if (!(t_e > 0.0)) throw std::invalid_argument("ModelParams: t_e must be > 0");
    if (!(omega_b > 0.0))
      throw std::invalid_argument("ModelParams: omega_b must be > 0");
    if (n_sites < 2) throw std::invalid_argument("ModelParams: n_sites must be >= 2");
    if (g_P < 0.0 || g_B < 0.0)
      throw std::invalid_argument("ModelParams: couplings must be non-negative");
  }

  /// Real-space prefactor of the Peierls term, alpha_P * xi_0.
  double peierls_energy() const { return g_P * omega_b; }
  /// Real-space prefactor of the breathing term, alpha_B * xi_0.
  double breathing_energy() const { return g_B * omega_b; }

  bool operator==(const ModelParams&) const = default;
};

struct CouplingMeasures {
  double lambda_P = 0.0;
  std::optional<double> zeta;  // absent when g_P == 0
};

/// e-b vertex 2i w_b { g_B sin q + g_P [sin k - sin(k+q)] }.
inline cplx vertex_gamma(double k, double q, const ModelParams& p) {
  const double re = p.g_B * std::sin(q) + p.g_P * (std::sin(k) - std::sin(k + q));
  return {0.0, 2.0 * p.omega_b * re};
}

inline double effective_lambda_P(const ModelParams& p) {
  return 2.0 * p.g_P * p.g_P * p.omega_b / p.t_e;
}

inline CouplingMeasures coupling_measures(const ModelParams& p) {
  CouplingMeasures m;
  m.lambda_P = effective_lambda_P(p);
  if (p.g_P > 0.0) m.zeta = p.g_B / p.g_P;
  return m;
}

/// Inverse of effective_lambda_P: g_P = sqrt(lambda_P t_e / (2 w_b)), g_B = zeta g_P.
inline ModelParams params_from_lambda(double t_e, double omega_b, double lambda_P,
                                      double zeta, int n_sites) {
  if (lambda_P < 0.0) throw std::invalid_argument("lambda_P must be >= 0");
  if (zeta < 0.0) throw std::invalid_argument("zeta must be >= 0");
  ModelParams p;
  p.t_e = t_e;
  p.omega_b = omega_b;
  p.n_sites = n_sites;
  p.g_P = std::sqrt(lambda_P * t_e / (2.0 * omega_b));
  p.g_B = zeta * p.g_P;
  p.validate();
  return p;
}

/// Quasimomenta 2 pi m / N folded into (-pi, pi], in order m = 0..N-1.
inline std::vector<double> allowed_quasimomenta(int n_sites) {
  if (n_sites < 2) throw std::invalid_argument("allowed_quasimomenta: n_sites must be >= 2");
  std::vector<double> ks;
  ks.reserve(static_cast<std::size_t>(n_sites));
  for (int m = 0; m < n_sites; ++m) {
    // fold by integer arithmetic so pi itself is produced exactly
    const int folded = (2 * m > n_sites) ? m - n_sites : m;
    ks.push_back(2.0 * std::numbers::pi * folded / n_sites);
  }
  return ks;
}

}  // namespace pdqs
