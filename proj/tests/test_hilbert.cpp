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

#include "phonsim/hilbert.hpp"

using namespace phonsim;

TEST_CASE("basis index round trip covers every element") {
  const HilbertSpec spec{2, 3, 2};
  REQUIRE(spec.dimension() == 64);
  for (long idx = 0; idx < spec.dimension(); ++idx) {
    const auto labels = spec.basis_label(idx);
    REQUIRE(spec.basis_index(labels) == idx);
  }
}

TEST_CASE("annihilation acts as sqrt(n) lowering") {
  const HilbertSpec spec{1, 4, 2};
  const auto a = annihilation_op(spec, 0);
  const StateVector n2 = product_state(spec, {IonLabel{0, 2}});
  const StateVector n1 = product_state(spec, {IonLabel{0, 1}});
  REQUIRE((a * n2 - std::sqrt(2.0) * n1).norm() < 1e-15);

  // creation truncates at the cutoff, keeping adjointness exact
  const auto adag = creation_op(spec, 0);
  const StateVector top = product_state(spec, {IonLabel{0, spec.n_max}});
  REQUIRE((adag * top).norm() == 0.0);
  REQUIRE(max_abs(adag - a.adjoint()) == 0.0);
}

TEST_CASE("spin ladder basics") {
  const HilbertSpec spec{1, 2, 2};
  const StateVector down = product_state(spec, {IonLabel{0, 0}});
  REQUIRE((spin_lower_op(spec, 0) * down).norm() == 0.0);

  const Operator sp = spin_raise_op(spec, 0);
  const Operator sm = spin_lower_op(spec, 0);
  const Operator id = Operator::Identity(spec.dimension(), spec.dimension());
  REQUIRE(max_abs(sp * sm + sm * sp - id) == 0.0);
}

TEST_CASE("commutator of a and a-dagger is the identity below the cutoff") {
  const HilbertSpec spec{1, 4, 2};
  const Operator a = annihilation_op(spec, 0);
  const Operator comm = a * a.adjoint() - a.adjoint() * a;
  for (int level = 0; level < 2; ++level) {
    for (int n = 0; n + 1 <= spec.n_max; ++n) {
      const StateVector basis = product_state(spec, {IonLabel{level, n}});
      REQUIRE((comm * basis - basis).norm() < 1e-14);
    }
  }
}

TEST_CASE("number operator is diagonal with entries 0..n_max") {
  const HilbertSpec spec{1, 4, 2};
  const Operator n = number_op(spec, 0);
  for (int fock = 0; fock <= spec.n_max; ++fock) {
    const StateVector basis = product_state(spec, {IonLabel{1, fock}});
    REQUIRE((n * basis - static_cast<double>(fock) * basis).norm() == 0.0);
  }
  // the ladder product agrees up to the rounding of sqrt(n)^2
  const Operator product = creation_op(spec, 0) * annihilation_op(spec, 0);
  REQUIRE(max_abs(product - n) < 1e-14);
  REQUIRE(max_abs(product - Operator(product.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("operators on different sites commute") {
  const HilbertSpec spec{2, 3, 2};
  const Operator a0 = annihilation_op(spec, 0);
  const Operator sp1 = spin_raise_op(spec, 1);
  REQUIRE(max_abs(a0 * sp1 - sp1 * a0) < 1e-12);
  const Operator n1 = number_op(spec, 1);
  REQUIRE(max_abs(a0 * n1 - n1 * a0) < 1e-12);
}

TEST_CASE("product states sit at the documented basis index") {
  const HilbertSpec spec{2, 4, 2};
  // |up,2> x |up,0>: local indices 1*5+2=7 and 1*5+0=5, global 7*10+5.
  const StateVector psi = product_state(spec, {IonLabel{1, 2}, IonLabel{1, 0}});
  REQUIRE(psi.norm() == Catch::Approx(1.0));
  REQUIRE(psi[75] == Complex(1.0, 0.0));

  const HilbertSpec one{1, 4, 2};
  const StateVector ground = product_state(one, {IonLabel{0, 0}});
  REQUIRE(ground[0] == Complex(1.0, 0.0));

  const StateVector other = product_state(spec, {IonLabel{1, 1}, IonLabel{1, 1}});
  REQUIRE(std::abs(psi.dot(other)) == 0.0);
}

TEST_CASE("partial populations recover per-ion tables") {
  const HilbertSpec spec{2, 4, 2};
  const StateVector psi20 = product_state(spec, {IonLabel{1, 2}, IonLabel{1, 0}});
  const Eigen::MatrixXd ion0 = partial_populations(spec, psi20, 0);
  REQUIRE(ion0(1, 2) == Catch::Approx(1.0));

  const StateVector psi11 = product_state(spec, {IonLabel{1, 1}, IonLabel{1, 1}});
  const StateVector mixed = (psi11 + psi20) / std::sqrt(2.0);
  const Eigen::MatrixXd ion1 = partial_populations(spec, mixed, 1);
  REQUIRE(ion1(1, 1) == Catch::Approx(0.5));
  REQUIRE(ion1(1, 0) == Catch::Approx(0.5));

  const DensityOperator rho = mixed * mixed.adjoint();
  REQUIRE(max_abs(partial_populations(spec, rho, 1) - ion1) < 1e-14);
}

TEST_CASE("partial populations sum to one for random states") {
  const HilbertSpec spec{2, 3, 2};
  std::mt19937 gen(11);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    StateVector psi(spec.dimension());
    for (long i = 0; i < psi.size(); ++i) psi[i] = Complex(normal(gen), normal(gen));
    psi.normalize();
    for (int ion = 0; ion < 2; ++ion) {
      REQUIRE(partial_populations(spec, psi, ion).sum() == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("joint Fock distribution of two ions") {
  const HilbertSpec spec{2, 4, 2};
  const StateVector psi = product_state(spec, {IonLabel{1, 2}, IonLabel{0, 1}});
  const Eigen::MatrixXd p = joint_fock_distribution(spec, psi);
  REQUIRE(p(2, 1) == Catch::Approx(1.0));
  REQUIRE(p.sum() == Catch::Approx(1.0));
}

TEST_CASE("embedding into a three-level space preserves amplitudes") {
  const HilbertSpec two{2, 3, 2};
  const HilbertSpec three{2, 3, 3};
  const StateVector psi = (product_state(two, {IonLabel{1, 1}, IonLabel{0, 0}}) +
                           product_state(two, {IonLabel{0, 2}, IonLabel{1, 0}})) /
                          std::sqrt(2.0);
  const StateVector big = embed_state(two, three, psi);
  REQUIRE(big.size() == three.dimension());
  REQUIRE(big.norm() == Catch::Approx(1.0));
  REQUIRE(std::abs(big[three.basis_index(std::vector<IonLabel>{IonLabel{1, 1}, IonLabel{0, 0}})] -
                   1.0 / std::sqrt(2.0)) < 1e-15);
  for (int ion = 0; ion < 2; ++ion) {
    REQUIRE(max_abs(partial_populations(three, big, ion).topRows(2) -
                    partial_populations(two, psi, ion)) < 1e-14);
  }
}

TEST_CASE("out-of-range labels are rejected") {
  const HilbertSpec spec{2, 3, 2};
  REQUIRE_THROWS_AS(product_state(spec, {IonLabel{0, 4}, IonLabel{0, 0}}), ValidationError);
  REQUIRE_THROWS_AS(product_state(spec, {IonLabel{2, 0}, IonLabel{0, 0}}), ValidationError);
  REQUIRE_THROWS_AS(annihilation_op(spec, 2), ValidationError);
  REQUIRE_THROWS_AS(fock_projector(spec, 0, 4), ValidationError);
  REQUIRE_THROWS_AS(internal_projector(spec, 0, Internal::Aux), ValidationError);
  HilbertSpec bad{0, 3, 2};
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);
}
