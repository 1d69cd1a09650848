// Copyright 2026 The phonsim Authors
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
#include <vector>

#include "phonsim/constants.hpp"
#include "phonsim/core.hpp"

namespace phonsim {

/// Static trap parameters. Frequencies are ordinary frequencies in Hz
/// (the nu in omega = 2*pi*nu); conversion to angular frequency happens
/// exactly once, inside the geometry computations.
struct TrapConfig {
  int ion_count = 2;
  double mass_kg = constants::ca40_ion_mass_kg;
  double charge_c = constants::elementary_charge_c;
  double nu_x_hz = 3.07e6;
  double nu_y_hz = 2.87e6;
  double nu_z_hz = 0.11e6;

  void validate() const {
    if (ion_count < 1) throw ValidationError("TrapConfig: ion_count must be >= 1");
    if (!(mass_kg > 0)) throw ValidationError("TrapConfig: mass must be positive");
    if (!(charge_c > 0)) throw ValidationError("TrapConfig: charge must be positive");
    if (!(nu_x_hz > 0 && nu_y_hz > 0 && nu_z_hz > 0)) {
      throw ValidationError("TrapConfig: all trap frequencies must be positive");
    }
    if (!(nu_z_hz < nu_x_hz && nu_z_hz < nu_y_hz)) {
      throw ValidationError("TrapConfig: need nu_z < nu_x and nu_z < nu_y (linear chain)");
    }
  }

  double omega_y() const { return constants::two_pi * nu_y_hz; }
  double omega_z() const { return constants::two_pi * nu_z_hz; }

  /// Coulomb length scale l, with l^3 = e^2 / (4 pi eps0 m omega_z^2).
  double length_scale_m() const {
    const double q2k = charge_c * charge_c /
                       (4.0 * constants::pi * constants::vacuum_permittivity_f_m);
    return std::cbrt(q2k / (mass_kg * omega_z() * omega_z()));
  }
};

namespace detail {

// Dimensionless axial potential 0.5*sum u_i^2 + sum_{i<j} 1/|u_i-u_j|
// and its derivatives, positions assumed strictly increasing.
inline double chain_potential(const Eigen::VectorXd& u) {
  double v = 0.5 * u.squaredNorm();
  for (int i = 0; i < u.size(); ++i) {
    for (int j = i + 1; j < u.size(); ++j) v += 1.0 / (u[j] - u[i]);
  }
  return v;
}

inline Eigen::VectorXd chain_gradient(const Eigen::VectorXd& u) {
  Eigen::VectorXd g = u;
  for (int i = 0; i < u.size(); ++i) {
    for (int j = 0; j < u.size(); ++j) {
      if (j == i) continue;
      const double d = u[i] - u[j];
      g[i] += (d > 0 ? -1.0 : 1.0) / (d * d);
    }
  }
  return g;
}

inline Eigen::MatrixXd chain_hessian(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3.0);
      h(i, i) += c;
      h(i, j) -= c;
    }
  }
  return h;
}

inline bool strictly_increasing(const Eigen::VectorXd& u) {
  for (int i = 0; i + 1 < u.size(); ++i) {
    if (!(u[i] < u[i + 1])) return false;
  }
  return true;
}

}  // namespace detail

/// Equilibrium axial positions (meters) of the Coulomb crystal: minimizer of
/// the harmonic-plus-Coulomb potential, centered on the trap axis, sorted
/// ascending. Damped Newton iteration on the dimensionless equations, seeded
/// with the near-uniform ansatz; residual gradient norm < 1e-12 scaled units.
inline std::vector<double> equilibrium_positions(const TrapConfig& trap) {
  trap.validate();
  const int n = trap.ion_count;
  if (n == 1) return {0.0};

  Eigen::VectorXd u(n);
  const double spread = 2.0 / std::pow(static_cast<double>(n), 0.56);
  for (int i = 0; i < n; ++i) u[i] = spread * (i - 0.5 * (n - 1));

  Eigen::VectorXd grad = detail::chain_gradient(u);
  const int max_iter = 200;
  int iter = 0;
  while (grad.norm() > 1e-13) {
    if (++iter > max_iter) {
      throw NumericalError("equilibrium_positions: Newton iteration did not converge");
    }
    const Eigen::VectorXd step = detail::chain_hessian(u).ldlt().solve(grad);
    // backtrack on the gradient norm (strictly decreasing for damped Newton
    // all the way to machine precision, unlike the potential itself)
    double alpha = 1.0;
    Eigen::VectorXd next = u - alpha * step;
    while (alpha > 1e-10 && (!detail::strictly_increasing(next) ||
                             detail::chain_gradient(next).norm() >= grad.norm())) {
      alpha *= 0.5;
      next = u - alpha * step;
    }
    if (alpha <= 1e-10) {
      throw NumericalError("equilibrium_positions: line search stalled");
    }
    u = next;
    grad = detail::chain_gradient(u);
  }

  u.array() -= u.mean();  // exact mirror symmetry keeps this at noise level
  const double scale = trap.length_scale_m();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = u[i] * scale;
  std::sort(out.begin(), out.end());
  return out;
}

/// Local-phonon hopping rates kappa_ij = e^2 / (4 pi eps0 m d_ij^3 omega_y)
/// in rad/s; zero diagonal.
inline Eigen::MatrixXd coupling_matrix(const std::vector<double>& positions_m,
                                       const TrapConfig& trap) {
  trap.validate();
  const int n = static_cast<int>(positions_m.size());
  for (int i = 0; i + 1 < n; ++i) {
    if (!(positions_m[i] < positions_m[i + 1])) {
      throw ValidationError("coupling_matrix: positions must be strictly increasing");
    }
  }
  const double q2k = trap.charge_c * trap.charge_c /
                     (4.0 * constants::pi * constants::vacuum_permittivity_f_m);
  Eigen::MatrixXd kappa = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = positions_m[j] - positions_m[i];
      const double k = q2k / (trap.mass_kg * d * d * d * trap.omega_y());
      kappa(i, j) = k;
      kappa(j, i) = k;
    }
  }
  return kappa;
}

/// Site-dependent secular frequency shifts omega_i = -(1/2) sum_{j!=i} kappa_ij.
inline std::vector<double> site_shifts(const Eigen::MatrixXd& kappa) {
  const int n = static_cast<int>(kappa.rows());
  if (kappa.cols() != n) throw ValidationError("site_shifts: kappa must be square");
  for (int i = 0; i < n; ++i) {
    if (kappa(i, i) != 0.0) throw ValidationError("site_shifts: kappa diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(kappa(i, j) - kappa(j, i)) > 1e-9 * std::abs(kappa(i, j))) {
        throw ValidationError("site_shifts: kappa must be symmetric");
      }
    }
  }
  std::vector<double> shifts(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) s += kappa(i, j);
    }
    shifts[i] = -0.5 * s;
  }
  return shifts;
}

/// Equilibrium geometry plus the derived hopping constants.
struct ChainGeometry {
  std::vector<double> positions_m;
  Eigen::MatrixXd kappa;             // rad/s
  std::vector<double> site_shift;    // rad/s

  int size() const { return static_cast<int>(positions_m.size()); }

  static ChainGeometry from_trap(const TrapConfig& trap) {
    ChainGeometry g;
    g.positions_m = equilibrium_positions(trap);
    g.kappa = coupling_matrix(g.positions_m, trap);
    g.site_shift = site_shifts(g.kappa);
    return g;
  }
};

}  // namespace phonsim
