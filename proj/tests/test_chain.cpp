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

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "phonsim/chain.hpp"

using namespace phonsim;

namespace {

// Independent constants path for the oracles below; deliberately not shared
// with the library's constants table.
constexpr double kElementaryCharge = 1.602176634e-19;
constexpr double kVacuumPermittivity = 8.8541878128e-12;
constexpr double kCa40IonMassKg = (39.962590863 - 5.48579909065e-4) * 1.66053906660e-27;
constexpr double kPi = 3.14159265358979323846;

double two_ion_separation_oracle(double mass_kg, double nu_z_hz) {
  const double omega_z = 2.0 * kPi * nu_z_hz;
  const double q2k = kElementaryCharge * kElementaryCharge / (4.0 * kPi * kVacuumPermittivity);
  return std::cbrt(2.0) * std::cbrt(q2k / (mass_kg * omega_z * omega_z));
}

double kappa_oracle(double mass_kg, double d_m, double nu_y_hz) {
  const double omega_y = 2.0 * kPi * nu_y_hz;
  const double q2k = kElementaryCharge * kElementaryCharge / (4.0 * kPi * kVacuumPermittivity);
  return q2k / (mass_kg * d_m * d_m * d_m * omega_y);
}

// Scaled-units gradient of the axial potential at the returned positions.
double equilibrium_gradient_norm(const std::vector<double>& x, const TrapConfig& trap) {
  const double scale = trap.length_scale_m();
  const int n = static_cast<int>(x.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = x[i] / scale;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (x[i] - x[j]) / scale;
      g += (d > 0 ? -1.0 : 1.0) / (d * d);
    }
    acc += g * g;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("single ion sits at the trap centre") {
  TrapConfig trap;
  trap.ion_count = 1;
  REQUIRE(equilibrium_positions(trap) == std::vector<double>{0.0});
}

TEST_CASE("two-ion separation matches the closed form and the quoted distance") {
  TrapConfig trap;  // paper operating point
  const auto pos = equilibrium_positions(trap);
  REQUIRE(pos.size() == 2);
  const double d = pos[1] - pos[0];
  const double oracle = two_ion_separation_oracle(trap.mass_kg, trap.nu_z_hz);
  REQUIRE(std::abs(d - oracle) / oracle < 1e-10);
  REQUIRE(d > 23.5e-6);
  REQUIRE(d < 25.5e-6);
  // mirror symmetry about the centre
  REQUIRE(std::abs(pos[0] + pos[1]) < 1e-12 * d);
}

TEST_CASE("equilibrium gradient vanishes for chains up to five ions") {
  for (int n = 2; n <= 5; ++n) {
    TrapConfig trap;
    trap.ion_count = n;
    const auto pos = equilibrium_positions(trap);
    REQUIRE(equilibrium_gradient_norm(pos, trap) < 1e-12);
    for (size_t i = 0; i + 1 < pos.size(); ++i) REQUIRE(pos[i] < pos[i + 1]);
  }
}

TEST_CASE("coupling at the paper geometry matches the arithmetic oracle") {
  TrapConfig trap;
  const auto pos = equilibrium_positions(trap);
  const auto kappa = coupling_matrix(pos, trap);
  const double oracle = kappa_oracle(trap.mass_kg, pos[1] - pos[0], trap.nu_y_hz);
  REQUIRE(std::abs(kappa(0, 1) - oracle) / oracle < 1e-10);
  // around 2 kHz in ordinary-frequency units
  const double kappa_hz = kappa(0, 1) / (2.0 * kPi);
  REQUIRE(kappa_hz > 2.0e3);
  REQUIRE(kappa_hz < 2.3e3);
}

TEST_CASE("doubling the distance divides kappa by eight") {
  TrapConfig trap;
  const auto near = coupling_matrix({0.0, 24e-6}, trap);
  const auto far = coupling_matrix({0.0, 48e-6}, trap);
  REQUIRE(near(0, 1) / far(0, 1) == Catch::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("kappa is symmetric with zero diagonal for random chains") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> gap(5e-6, 40e-6);
  TrapConfig trap;
  trap.ion_count = 4;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> pos{0.0};
    for (int i = 0; i < 3; ++i) pos.push_back(pos.back() + gap(gen));
    const auto kappa = coupling_matrix(pos, trap);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(kappa(i, i) == 0.0);
      for (int j = 0; j < 4; ++j) {
        REQUIRE(kappa(i, j) == kappa(j, i));
        if (i != j) REQUIRE(kappa(i, j) > 0.0);
      }
    }
  }
}

TEST_CASE("site shifts") {
  SECTION("two ions share -kappa/2") {
    Eigen::MatrixXd kappa(2, 2);
    kappa << 0.0, 3.0e3, 3.0e3, 0.0;
    const auto shifts = site_shifts(kappa);
    REQUIRE(shifts[0] == Catch::Approx(-1.5e3));
    REQUIRE(shifts[1] == Catch::Approx(-1.5e3));
  }
  SECTION("single ion has no shift") {
    REQUIRE(site_shifts(Eigen::MatrixXd::Zero(1, 1)) == std::vector<double>{0.0});
  }
  SECTION("three-ion formula") {
    Eigen::MatrixXd kappa(3, 3);
    kappa << 0, 2, 5, 2, 0, 3, 5, 3, 0;
    const auto shifts = site_shifts(kappa);
    REQUIRE(shifts[0] == Catch::Approx(-0.5 * (2 + 5)));
    REQUIRE(shifts[1] == Catch::Approx(-0.5 * (2 + 3)));
    REQUIRE(shifts[2] == Catch::Approx(-0.5 * (5 + 3)));
  }
}

TEST_CASE("geometry construction ties the pieces together") {
  TrapConfig trap;
  const auto geom = ChainGeometry::from_trap(trap);
  REQUIRE(geom.size() == 2);
  REQUIRE(geom.site_shift[0] == Catch::Approx(-0.5 * geom.kappa(0, 1)));
}

TEST_CASE("invalid inputs are rejected") {
  TrapConfig trap;
  trap.ion_count = 0;
  REQUIRE_THROWS_AS(equilibrium_positions(trap), ValidationError);

  TrapConfig squeezed;
  squeezed.nu_z_hz = squeezed.nu_y_hz;  // not a linear chain
  REQUIRE_THROWS_AS(equilibrium_positions(squeezed), ValidationError);

  TrapConfig ok;
  REQUIRE_THROWS_AS(coupling_matrix({1e-6, 1e-6}, ok), ValidationError);

  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 2, 0;
  REQUIRE_THROWS_AS(site_shifts(bad), ValidationError);
  Eigen::MatrixXd diag(2, 2);
  diag << 1, 2, 2, 0;
  REQUIRE_THROWS_AS(site_shifts(diag), ValidationError);
}
