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

namespace phonsim::constants {

// Physical constants, CODATA 2018. Kept in one table so every derived
// quantity in the library traces back to the same values.
inline constexpr double elementary_charge_c = 1.602176634e-19;      // C (exact)
inline constexpr double vacuum_permittivity_f_m = 8.8541878128e-12; // F/m
inline constexpr double atomic_mass_unit_kg = 1.66053906660e-27;    // kg
inline constexpr double electron_mass_u = 5.48579909065e-4;         // u

// 40Ca neutral-atom mass (AME2020); the ion is one electron lighter.
inline constexpr double ca40_atom_mass_u = 39.962590863;
inline constexpr double ca40_ion_mass_kg =
    (ca40_atom_mass_u - electron_mass_u) * atomic_mass_unit_kg;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// e^2 / (4 pi eps0), the Coulomb interaction prefactor in J*m.
inline constexpr double coulomb_prefactor_j_m =
    elementary_charge_c * elementary_charge_c /
    (4.0 * pi * vacuum_permittivity_f_m);

}  // namespace phonsim::constants
