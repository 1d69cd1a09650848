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

#include <array>

#include "phonsim/pulses.hpp"

using namespace phonsim;

namespace {

constexpr double kG = 2.0 * constants::pi * 20e3;

ChainGeometry lone_ion() { return ChainGeometry{{0.0}, Eigen::MatrixXd::Zero(1, 1), {0.0}}; }
ChainGeometry paper_geometry() { return ChainGeometry::from_trap(TrapConfig{}); }

using Mat2 = std::array<std::array<Complex, 2>, 2>;

// Closed-form rotation on one sideband rung {|dn,n>, |up,n+1>}: angle scales
// with sqrt(n+1) relative to the ground-state angle theta.
Mat2 rung_rotation(double theta, double phi, double scale) {
  const double half = 0.5 * theta * scale;
  const Complex off = Complex(0.0, -1.0) * std::exp(Complex(0.0, -phi)) * std::sin(half);
  return Mat2{{{std::cos(half), off},
               {Complex(0.0, -1.0) * std::exp(Complex(0.0, phi)) * std::sin(half),
                std::cos(half)}}};
}

Mat2 multiply(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    }
  }
  return c;
}

// The three composite rotations at a given Rabi scale, applied right to left.
Mat2 composite_oracle(double scale) {
  const Mat2 outer = rung_rotation(constants::pi / 2, 0.0, scale);
  const Mat2 middle = rung_rotation(constants::pi / std::sqrt(2.0), constants::pi / 2, scale);
  return multiply(outer, multiply(middle, outer));
}

StateVector apply_sequence(const HilbertSpec& spec, const ChainGeometry& geom,
                           const PulseSequence& seq, StateVector psi, bool hop) {
  for (const auto& seg : sequence_segments(spec, geom, seq, hop)) {
    psi = propagate_unitary(seg, psi);
  }
  return psi;
}

}  // namespace

TEST_CASE("pulse durations derive from the ground-state angle") {
  const PulseEvent e{0, Transition::Bsb, constants::pi, 0.0, kG};
  REQUIRE(e.duration() == Catch::Approx(constants::pi / (2.0 * kG)));
  REQUIRE_THROWS_AS((PulseEvent{0, Transition::Bsb, 1.0, 0.0, 0.0}).duration(), ValidationError);
}

TEST_CASE("resonant BSB pi pulse on the ground rung") {
  const HilbertSpec spec{1, 4, 2};
  const auto geom = lone_ion();
  const PulseEvent pulse{0, Transition::Bsb, constants::pi, 0.0, kG};
  const Segment seg = pulse_segment(spec, geom, pulse, false);

  SECTION("|dn,0> transfers fully to |up,1>") {
    const StateVector out = propagate_unitary(seg, product_state(spec, {IonLabel{0, 0}}));
    REQUIRE(partial_populations(spec, out, 0)(1, 1) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("|up,0> is dark") {
    const StateVector in = product_state(spec, {IonLabel{1, 0}});
    const StateVector out = propagate_unitary(seg, in);
    REQUIRE(std::abs(std::abs(in.dot(out)) - 1.0) < 1e-12);
  }
  SECTION("|dn,1> rotates by pi*sqrt(2), matching the 2x2 oracle") {
    const StateVector out = propagate_unitary(seg, product_state(spec, {IonLabel{0, 1}}));
    const Mat2 oracle = rung_rotation(constants::pi, 0.0, std::sqrt(2.0));
    const double expected = std::norm(oracle[1][0]);  // = sin^2(pi/sqrt(2)) ~ 0.633
    REQUIRE(partial_populations(spec, out, 0)(1, 2) == Catch::Approx(expected).margin(1e-10));
    REQUIRE(expected == Catch::Approx(std::pow(std::sin(constants::pi / std::sqrt(2.0)), 2)));
  }
}

TEST_CASE("composite pulse transfers both rungs to machine precision") {
  const HilbertSpec spec{1, 4, 2};
  const auto geom = lone_ion();
  const PulseSequence cp = composite_cp(0, kG);

  SECTION("|dn,0> -> |up,1>") {
    const StateVector out =
        apply_sequence(spec, geom, cp, product_state(spec, {IonLabel{0, 0}}), false);
    const double p = partial_populations(spec, out, 0)(1, 1);
    REQUIRE(1.0 - p < 1e-10);
    REQUIRE(1.0 - std::norm(composite_oracle(1.0)[1][0]) < 1e-12);
  }
  SECTION("|dn,1> -> |up,2>") {
    const StateVector out =
        apply_sequence(spec, geom, cp, product_state(spec, {IonLabel{0, 1}}), false);
    const double p = partial_populations(spec, out, 0)(1, 2);
    REQUIRE(1.0 - p < 1e-10);
    REQUIRE(1.0 - std::norm(composite_oracle(std::sqrt(2.0))[1][0]) < 1e-12);
  }
  SECTION("full propagator matches the oracle on both rungs") {
    Operator u = Operator::Identity(spec.dimension(), spec.dimension());
    for (const auto& seg : sequence_segments(spec, geom, cp, false)) {
      u = SegmentPropagator(seg.hamiltonian).unitary(seg.duration) * u;
    }
    for (double scale : {1.0, std::sqrt(2.0)}) {
      const int n = scale > 1.1 ? 1 : 0;
      const long lo = spec.basis_index(std::vector<IonLabel>{IonLabel{0, n}});
      const long hi = spec.basis_index(std::vector<IonLabel>{IonLabel{1, n + 1}});
      const Mat2 oracle = composite_oracle(scale);
      REQUIRE(std::abs(u(lo, lo) - oracle[0][0]) < 1e-10);
      REQUIRE(std::abs(u(hi, lo) - oracle[1][0]) < 1e-10);
    }
  }
  SECTION("|up,0> stays dark") {
    const StateVector in = product_state(spec, {IonLabel{1, 0}});
    const StateVector out = apply_sequence(spec, geom, cp, in, false);
    REQUIRE(std::abs(std::abs(in.dot(out)) - 1.0) < 1e-12);
  }
  SECTION("permuting the composite breaks the sqrt(2) transfer") {
    PulseSequence permuted;
    permuted.push(PulseEvent{0, Transition::Bsb, constants::pi / std::sqrt(2.0),
                             constants::pi / 2, kG});
    permuted.push(PulseEvent{0, Transition::Bsb, constants::pi / 2, 0.0, kG});
    permuted.push(PulseEvent{0, Transition::Bsb, constants::pi / 2, 0.0, kG});
    const StateVector out =
        apply_sequence(spec, geom, permuted, product_state(spec, {IonLabel{0, 1}}), false);
    REQUIRE(partial_populations(spec, out, 0)(1, 2) < 0.999);
  }
}

TEST_CASE("pulse propagators are unitary") {
  const HilbertSpec spec{2, 3, 2};
  const auto geom = paper_geometry();
  const PulseEvent pulse{0, Transition::Bsb, constants::pi, 0.4, kG};
  const Segment seg = pulse_segment(spec, geom, pulse, true);
  const Operator u = SegmentPropagator(seg.hamiltonian).unitary(seg.duration);
  const Operator id = Operator::Identity(spec.dimension(), spec.dimension());
  REQUIRE(max_abs(u * u.adjoint() - id) < 1e-10);
}

TEST_CASE("a 4pi ground-rung rotation returns up to phase") {
  const HilbertSpec spec{1, 3, 2};
  const auto geom = lone_ion();
  const StateVector in = product_state(spec, {IonLabel{0, 0}});
  const PulseEvent full{0, Transition::Bsb, 4.0 * constants::pi, 0.0, kG};
  const StateVector out = propagate_unitary(pulse_segment(spec, geom, full, false), in);
  REQUIRE(std::abs(std::abs(in.dot(out)) - 1.0) < 1e-10);
}

TEST_CASE("preparation sequences reach the target states with hopping off") {
  const HilbertSpec spec{2, 4, 2};
  const auto geom = paper_geometry();
  const StateVector ground = product_state(spec, {IonLabel{0, 0}, IonLabel{0, 0}});

  SECTION("both ions to |up,1>") {
    const StateVector out =
        apply_sequence(spec, geom, prep_sequence(PrepKind::Fig3, spec, kG), ground, false);
    const StateVector target = product_state(spec, {IonLabel{1, 1}, IonLabel{1, 1}});
    REQUIRE(std::norm(target.dot(out)) > 1.0 - 1e-9);
  }
  SECTION("|up,2> x |up,0>") {
    const StateVector out =
        apply_sequence(spec, geom, prep_sequence(PrepKind::Fig2, spec, kG), ground, false);
    const StateVector target = product_state(spec, {IonLabel{1, 2}, IonLabel{1, 0}});
    REQUIRE(std::norm(target.dot(out)) > 1.0 - 1e-9);
  }
  SECTION("hopping during the pulses leaks population") {
    const StateVector out =
        apply_sequence(spec, geom, prep_sequence(PrepKind::Fig2, spec, kG), ground, true);
    const StateVector target = product_state(spec, {IonLabel{1, 2}, IonLabel{1, 0}});
    REQUIRE(std::norm(target.dot(out)) < 1.0 - 1e-6);
  }
}

TEST_CASE("sequence validation") {
  const HilbertSpec spec{2, 3, 2};
  const auto geom = paper_geometry();
  REQUIRE_THROWS_AS(
      drive_operator(spec, PulseEvent{0, Transition::ShelveDnE0, constants::pi, 0.0, kG}),
      ValidationError);
  REQUIRE_THROWS_AS(prep_sequence(PrepKind::Fig2, HilbertSpec{1, 3, 2}, kG), ValidationError);

  PulseSequence clashing;
  clashing.push(std::vector<PulseEvent>{PulseEvent{0, Transition::Bsb, constants::pi, 0.0, kG},
                                        PulseEvent{0, Transition::Rsb, constants::pi, 0.0, kG}});
  REQUIRE_THROWS_AS(sequence_segments(spec, geom, clashing, true), ValidationError);

  PulseSequence mismatched;
  mismatched.push(
      std::vector<PulseEvent>{PulseEvent{0, Transition::Bsb, constants::pi, 0.0, kG},
                              PulseEvent{1, Transition::Bsb, constants::pi / 2, 0.0, kG}});
  REQUIRE_THROWS_AS(sequence_segments(spec, geom, mismatched, true), ValidationError);

  PulseSequence waits;
  waits.push(WaitEvent{25e-6});
  const auto segs = sequence_segments(spec, geom, waits, true);
  REQUIRE(segs.size() == 1);
  REQUIRE(segs[0].duration == 25e-6);
  REQUIRE(max_abs(segs[0].hamiltonian - hopping_hamiltonian(spec, geom)) == 0.0);
}
