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

#include <cmath>

#include "phonsim/scenarios.hpp"

using namespace phonsim;

namespace {

double paper_kappa() {
  const auto geom = ChainGeometry::from_trap(TrapConfig{});
  return geom.kappa(0, 1);
}

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / v.size();
}

}  // namespace

TEST_CASE("free two-phonon interference matches the analytic law") {
  const double kappa = paper_kappa();
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig3Free);
  cfg.ideal_mode = true;
  cfg.hop_during_pulses = false;  // exact |1,1> start
  cfg.time = TimeGrid{0.0, 2.0 * constants::two_pi / kappa, constants::two_pi / kappa / 40.0};
  const TimeSeries ts = run_scenario(cfg);
  const auto& p11 = ts.column("phonon_P11");
  double worst = 0.0;
  for (size_t i = 0; i < ts.times.size(); ++i) {
    worst = std::max(worst,
                     std::abs(p11[i] - std::pow(std::cos(kappa * ts.times[i]), 2)));
  }
  REQUIRE(worst < 1e-6);
  // exact joint populations close in the two-phonon sector
  const auto& p20 = ts.column("phonon_P20");
  const auto& p02 = ts.column("phonon_P02");
  for (size_t i = 0; i < ts.times.size(); ++i) {
    REQUIRE(p20[i] + p11[i] + p02[i] == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("fig2 classification starts at |2,0> when pulses run without hopping") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig2Free);
  cfg.ideal_mode = true;
  cfg.hop_during_pulses = false;
  cfg.time = TimeGrid{0.0, 40e-6, 20e-6};
  const TimeSeries ts = run_scenario(cfg);
  REQUIRE(ts.column("P20_exact")[0] == Catch::Approx(1.0).margin(1e-9));
  // readout classification forms a partition together with the leak column
  for (size_t i = 0; i < ts.times.size(); ++i) {
    const double sum = ts.column("P20_exact")[i] + ts.column("P11_exact")[i] +
                       ts.column("P02_exact")[i] + ts.column("Pleak_exact")[i];
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(ts.column("P20_exact")[i] + ts.column("P11_exact")[i] +
                ts.column("P02_exact")[i] ==
            Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("hopping during preparation leaves a visible mark at tau = 0") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig2Free);
  cfg.ideal_mode = true;
  cfg.hop_during_pulses = true;
  cfg.time = TimeGrid{0.0, 20e-6, 20e-6};
  const TimeSeries ts = run_scenario(cfg);
  REQUIRE(ts.column("P20_exact")[0] < 1.0);
}

TEST_CASE("free evolution treats the two ions symmetrically") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig3Free);
  cfg.ideal_mode = true;
  cfg.time = TimeGrid{0.0, 400e-6, 40e-6};
  const TimeSeries ts = run_scenario(cfg);
  const auto& ion1 = ts.column("P_down_ion1_exact");
  const auto& ion2 = ts.column("P_down_ion2_exact");
  for (size_t i = 0; i < ts.times.size(); ++i) {
    REQUIRE(std::abs(ion1[i] - ion2[i]) < 1e-9);
  }
}

TEST_CASE("the blockade pins the target ion while the driven ion Rabi-flops") {
  const double kappa = paper_kappa();
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig3Blockade);
  cfg.ideal_mode = true;
  cfg.blockade.g = 10.0 * kappa;
  cfg.time = TimeGrid{0.0, 480e-6, 20e-6};
  const TimeSeries ts = run_scenario(cfg);
  const double var1 = variance(ts.column("P_down_ion1_exact"));
  const double var2 = variance(ts.column("P_down_ion2_exact"));
  REQUIRE(var1 < 0.1 * var2);
}

TEST_CASE("leakage falls monotonically with blockade strength") {
  const double kappa = paper_kappa();
  ScenarioConfig base = ScenarioConfig::defaults_for(ScenarioKind::Fig2Blockade);
  base.ideal_mode = true;
  base.hop_during_pulses = false;
  base.time = TimeGrid{0.0, constants::two_pi / kappa, constants::two_pi / kappa / 30.0};
  const std::vector<double> gs{2 * kappa, 5 * kappa, 10 * kappa, 20 * kappa};
  const auto sweep = sweep_blockade(base, gs);
  REQUIRE(sweep.size() == 4);
  for (size_t i = 0; i + 1 < sweep.size(); ++i) {
    REQUIRE(sweep[i].max_leakage > sweep[i + 1].max_leakage);
  }
  // far regime: doubling g cuts the maximum leakage by about 4x
  const double ratio = sweep[2].max_leakage / sweep[3].max_leakage;
  REQUIRE(ratio > 2.0);
  REQUIRE(ratio < 6.0);
  // and the g = 0 limit reproduces free hopping (maximal leakage)
  const auto free_sweep = sweep_blockade(base, std::vector<double>{0.0, 10 * kappa});
  REQUIRE(free_sweep[0].max_leakage > 0.99);
}

TEST_CASE("noise calibration") {
  const double g = constants::two_pi * 20e3;
  SECTION("zero target means zero rate") { REQUIRE(calibrate_noise(0.0, g) == 0.0); }
  SECTION("the calibrated rate reproduces the target infidelity") {
    const double rate = calibrate_noise(0.12, g);
    REQUIRE(rate > 0.0);
    // re-simulate the lone pulse
    const HilbertSpec spec{1, 2, 2};
    const ChainGeometry lone{{0.0}, Eigen::MatrixXd::Zero(1, 1), {0.0}};
    const Segment pulse = pulse_segment(
        spec, lone, PulseEvent{0, Transition::Bsb, constants::pi, 0.0, g}, false);
    const StateVector psi0 = product_state(spec, {IonLabel{0, 0}});
    const DensityOperator rho = propagate_lindblad(
        pulse, {{internal_projector(spec, 0, Internal::Up), rate}}, psi0 * psi0.adjoint());
    const long up1 = spec.basis_index(std::vector<IonLabel>{IonLabel{1, 1}});
    const double infidelity = 1.0 - rho(up1, up1).real();
    REQUIRE(infidelity > 0.115);
    REQUIRE(infidelity < 0.125);
  }
  SECTION("higher targets need higher rates") {
    REQUIRE(calibrate_noise(0.05, g) < calibrate_noise(0.12, g));
    REQUIRE(calibrate_noise(0.12, g) < calibrate_noise(0.2, g));
  }
  SECTION("invalid targets are rejected") {
    REQUIRE_THROWS_AS(calibrate_noise(0.6, g), ValidationError);
    REQUIRE_THROWS_AS(calibrate_noise(-0.1, g), ValidationError);
  }
}

TEST_CASE("noisy runs are reproducible bit for bit") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig3Blockade);
  cfg.time = TimeGrid{0.0, 80e-6, 40e-6};
  cfg.shots = 50;
  cfg.seed = 42;
  const std::string a = run_scenario(cfg).to_csv();
  const std::string b = run_scenario(cfg).to_csv();
  REQUIRE(a == b);

  cfg.seed = 43;
  const std::string c = run_scenario(cfg).to_csv();
  REQUIRE(a != c);
}

TEST_CASE("sampled columns appear only when sampling") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig3Free);
  cfg.time = TimeGrid{0.0, 40e-6, 40e-6};
  cfg.ideal_mode = true;
  REQUIRE_FALSE(run_scenario(cfg).has_column("P_down_ion1_sampled"));
  cfg.ideal_mode = false;
  cfg.noise.enabled = false;  // pure dynamics, sampled readout
  const TimeSeries ts = run_scenario(cfg);
  REQUIRE(ts.has_column("P_down_ion1_sampled"));
  REQUIRE(ts.has_column("P_down_ion1_sigma"));
}

TEST_CASE("fig4 analysis recovers the pre-probe distribution in ideal mode") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig4Free);
  cfg.ideal_mode = true;
  cfg.hop_during_pulses = false;
  cfg.time = TimeGrid{0.0, 120e-6, 60e-6};
  const TimeSeries ts = run_scenario(cfg);
  for (size_t i = 0; i < ts.times.size(); ++i) {
    REQUIRE(ts.column("fit_ok")[i] == 1.0);
    for (const char* level : {"0", "1", "2"}) {
      const double exact = ts.column(std::string("p") + level + "_exact")[i];
      const double fitted = ts.column(std::string("p") + level + "_fit")[i];
      REQUIRE(std::abs(exact - fitted) < 0.02);
    }
  }
}

TEST_CASE("a too-small Fock cutoff is escalated to an error") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig2Free);
  cfg.hilbert.n_max = 3;  // thermal branch reaches the cutoff during prep
  cfg.time = TimeGrid{0.0, 20e-6, 20e-6};
  cfg.shots = 10;
  REQUIRE_THROWS_AS(run_scenario(cfg), NumericalError);
}

TEST_CASE("configuration validation") {
  ScenarioConfig cfg = ScenarioConfig::defaults_for(ScenarioKind::Fig2Free);
  cfg.hilbert.n_max = 2;
  REQUIRE_THROWS_AS(cfg.validate(), ValidationError);

  ScenarioConfig shots = ScenarioConfig::defaults_for(ScenarioKind::Fig3Free);
  shots.shots = 0;
  REQUIRE_THROWS_AS(shots.validate(), ValidationError);
  shots.ideal_mode = true;
  REQUIRE_NOTHROW(shots.validate());

  ScenarioConfig grid = ScenarioConfig::defaults_for(ScenarioKind::Fig3Free);
  grid.time.step = 0.0;
  REQUIRE_THROWS_AS(grid.validate(), ValidationError);

  REQUIRE_THROWS_AS(sweep_blockade(ScenarioConfig::defaults_for(ScenarioKind::Fig2Blockade),
                                   std::vector<double>{1.0}),
                    ValidationError);
}
