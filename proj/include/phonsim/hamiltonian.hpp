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

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "phonsim/chain.hpp"
#include "phonsim/core.hpp"
#include "phonsim/hilbert.hpp"

namespace phonsim {

enum class Sideband { Red, Blue };

/// One continuous sideband drive. g is the half-Rabi frequency (the sideband
/// Rabi frequency is 2g); detuning follows the sign convention of the
/// rotating-frame Hamiltonians below.
struct DriveSpec {
  int site = 0;
  double g = 0.0;          // rad/s
  double detuning = 0.0;   // rad/s
  Sideband sideband = Sideband::Blue;
  double phase = 0.0;      // rad, rotation-axis phase

  void validate() const {
    if (g < 0) throw ValidationError("DriveSpec: g must be >= 0");
  }
};

/// Rotating-frame hopping Hamiltonian:
///   H = sum_i omega_i a_i^dag a_i
///     + sum_{i<j} (kappa_ij / 2) (a_i a_j^dag + a_i^dag a_j).
inline Operator hopping_hamiltonian(const HilbertSpec& spec, const ChainGeometry& geometry) {
  spec.validate();
  if (geometry.size() != spec.ion_count) {
    throw ValidationError("hopping_hamiltonian: geometry size must equal ion_count");
  }
  const long dim = spec.dimension();
  Operator h = Operator::Zero(dim, dim);
  for (int i = 0; i < spec.ion_count; ++i) {
    if (geometry.site_shift[i] != 0.0) h += geometry.site_shift[i] * number_op(spec, i);
  }
  for (int i = 0; i < spec.ion_count; ++i) {
    for (int j = i + 1; j < spec.ion_count; ++j) {
      const Operator hop = annihilation_op(spec, i) * creation_op(spec, j);
      h += (0.5 * geometry.kappa(i, j)) * (hop + hop.adjoint());
    }
  }
  return h;
}

/// Sideband coupling term for one driven ion, with the drive phase on the
/// raising combination:
///   red:  g (e^{i phi} a sigma^+ + e^{-i phi} a^dag sigma^-)
///   blue: g (e^{i phi} a^dag sigma^+ + e^{-i phi} a sigma^-)
/// phi = 0 gives the plain Jaynes-Cummings / anti-Jaynes-Cummings coupling.
inline Operator sideband_coupling(const HilbertSpec& spec, int site, Sideband sideband,
                                  double g, double phase) {
  const Complex ephase = std::exp(Complex(0.0, phase));
  Operator raising;
  if (sideband == Sideband::Red) {
    raising = annihilation_op(spec, site) * spin_raise_op(spec, site);
  } else {
    raising = creation_op(spec, site) * spin_raise_op(spec, site);
  }
  const Operator term = (g * ephase) * raising;
  return term + term.adjoint();
}

/// Full blockade Hamiltonian: hopping plus, per drive,
///   red:  Delta |up><up|   + coupling   (Jaynes-Cummings)
///   blue: Delta |down><down| + coupling (anti-Jaynes-Cummings)
inline Operator blockade_hamiltonian(const HilbertSpec& spec, const ChainGeometry& geometry,
                                     const std::vector<DriveSpec>& drives) {
  if (spec.internal_levels != 2) {
    throw ValidationError("blockade_hamiltonian: requires a 2-level internal space");
  }
  Operator h = hopping_hamiltonian(spec, geometry);
  std::set<int> seen;
  for (const auto& d : drives) {
    d.validate();
    if (d.site < 0 || d.site >= spec.ion_count) {
      throw ValidationError("blockade_hamiltonian: drive site out of range");
    }
    if (!seen.insert(d.site).second) {
      throw ValidationError("blockade_hamiltonian: duplicate drive on one site");
    }
    if (d.detuning != 0.0) {
      const Internal shifted = d.sideband == Sideband::Red ? Internal::Up : Internal::Down;
      h += d.detuning * internal_projector(spec, d.site, shifted);
    }
    if (d.g != 0.0) h += sideband_coupling(spec, d.site, d.sideband, d.g, d.phase);
  }
  return h;
}

/// Resonant Jaynes-Cummings eigenenergies at polaritonic excitation n:
///   E_± = n omega ± g sqrt(n).
inline std::pair<double, double> jc_energies(double omega, double g, int n) {
  if (n < 0) throw ValidationError("jc_energies: n must be >= 0");
  const double split = g * std::sqrt(static_cast<double>(n));
  return {n * omega + split, n * omega - split};
}

/// Gap between consecutive rungs of the JC ladder:
///   dE = omega ± g (sqrt(n+1) - sqrt(n)).
inline std::pair<double, double> jc_gap(double omega, double g, int n) {
  if (n < 0) throw ValidationError("jc_gap: n must be >= 0");
  const double anharm =
      g * (std::sqrt(static_cast<double>(n) + 1.0) - std::sqrt(static_cast<double>(n)));
  return {omega + anharm, omega - anharm};
}

/// Conserved excitation counter of the driven chain:
///   red:  sum_i a_i^dag a_i + sum_i |up_i><up_i|
///   blue: sum_i a_i^dag a_i + sum_i |down_i><down_i|
inline Operator excitation_number_op(const HilbertSpec& spec, Sideband sideband) {
  const Internal counted = sideband == Sideband::Red ? Internal::Up : Internal::Down;
  const long dim = spec.dimension();
  Operator n = Operator::Zero(dim, dim);
  for (int i = 0; i < spec.ion_count; ++i) {
    n += number_op(spec, i) + internal_projector(spec, i, counted);
  }
  return n;
}

}  // namespace phonsim
