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

#include <cstdint>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phonsim/detection.hpp"

namespace phonsim {

/// The built-in experiment pipelines. The fig2 family prepares |up,2>|up,0>
/// and reads out joint Fock populations with the number-resolving protocol;
/// the fig3 family prepares |up,1>|up,1> and reads per-ion spin-down
/// probabilities after a BSB pi pulse; the fig4 family additionally probes a
/// sideband Rabi trace on ion 1 and fits the Fock distribution. "custom" runs
/// the fig3 pipeline with the blockade drive taken from the config as-is.
enum class ScenarioKind {
  Fig2Free,
  Fig2Blockade,
  Fig3Free,
  Fig3Blockade,
  Fig4Free,
  Fig4Blockade,
  Custom,
};

inline const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Fig2Free: return "fig2_free";
    case ScenarioKind::Fig2Blockade: return "fig2_blockade";
    case ScenarioKind::Fig3Free: return "fig3_free";
    case ScenarioKind::Fig3Blockade: return "fig3_blockade";
    case ScenarioKind::Fig4Free: return "fig4_free";
    case ScenarioKind::Fig4Blockade: return "fig4_blockade";
    case ScenarioKind::Custom: return "custom";
  }
  return "?";
}

inline ScenarioKind parse_scenario(const std::string& name) {
  for (ScenarioKind k :
       {ScenarioKind::Fig2Free, ScenarioKind::Fig2Blockade, ScenarioKind::Fig3Free,
        ScenarioKind::Fig3Blockade, ScenarioKind::Fig4Free, ScenarioKind::Fig4Blockade,
        ScenarioKind::Custom}) {
    if (name == scenario_name(k)) return k;
  }
  throw ValidationError("unknown scenario: " + name);
}

inline bool scenario_blockade_on(ScenarioKind k) {
  return k == ScenarioKind::Fig2Blockade || k == ScenarioKind::Fig3Blockade ||
         k == ScenarioKind::Fig4Blockade;
}

/// 2, 3 or 4 for the built-in families; 0 for custom.
inline int scenario_family(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Fig2Free:
    case ScenarioKind::Fig2Blockade: return 2;
    case ScenarioKind::Fig3Free:
    case ScenarioKind::Fig3Blockade: return 3;
    case ScenarioKind::Fig4Free:
    case ScenarioKind::Fig4Blockade: return 4;
    case ScenarioKind::Custom: return 0;
  }
  return 0;
}

struct NoiseConfig {
  bool enabled = true;
  /// Infidelity of a lone BSB pi pulse that the per-ion spin dephasing rate
  /// is calibrated to reproduce.
  double pulse_infidelity_target = 0.12;
  /// Separate target for red-sideband drives; < 0 means "same as BSB".
  double rsb_infidelity_target = -1.0;
  /// Residual mean phonon number after sideband cooling; enters the initial
  /// state as a one-phonon admixture with thermal weight.
  double nbar = 0.04;

  void validate() const {
    if (pulse_infidelity_target < 0 || pulse_infidelity_target >= 0.5) {
      throw ValidationError("NoiseConfig: pulse_infidelity_target must be in [0, 0.5)");
    }
    if (rsb_infidelity_target >= 0.5) {
      throw ValidationError("NoiseConfig: rsb_infidelity_target must be below 0.5");
    }
    if (nbar < 0 || nbar >= 1.0) throw ValidationError("NoiseConfig: nbar must be in [0, 1)");
  }
};

struct TimeGrid {
  double start = 0.0;
  double stop = 480e-6;
  double step = 20e-6;

  void validate() const {
    if (!(step > 0)) throw ValidationError("TimeGrid: step must be > 0");
    if (!(stop >= start) || start < 0) throw ValidationError("TimeGrid: need 0 <= start <= stop");
  }

  /// Inclusive of both endpoints.
  std::vector<double> times() const {
    validate();
    std::vector<double> out;
    for (long k = 0;; ++k) {
      const double t = start + static_cast<double>(k) * step;
      if (t > stop * (1.0 + 1e-12) + 1e-30) break;
      out.push_back(std::min(t, stop));
    }
    return out;
  }
};

/// Sideband Rabi probe grid for the fig4 analysis.
struct ProbeConfig {
  int points = 48;
  double periods = 2.0;  // span in ground-state Rabi periods (pi/g each)

  void validate() const {
    if (points < 4) throw ValidationError("ProbeConfig: need at least 4 points");
    if (!(periods > 0)) throw ValidationError("ProbeConfig: periods must be > 0");
  }
};

struct ScenarioConfig {
  TrapConfig trap;
  HilbertSpec hilbert{2, 4, 2};
  ScenarioKind scenario = ScenarioKind::Fig2Free;
  /// Blockade beam; used by the *_blockade scenarios (and custom when g > 0).
  DriveSpec blockade{1, constants::two_pi * 20e3, 0.0, Sideband::Blue, 0.0};
  /// Half-Rabi frequency of every preparation/mapping pulse.
  double pulse_g = constants::two_pi * 20e3;
  TimeGrid time;
  long shots = 500;
  std::uint64_t seed = 1;
  NoiseConfig noise;
  /// Skips noise and shot sampling; dynamics become pure-state and exact.
  bool ideal_mode = false;
  /// Keep the hopping Hamiltonian on underneath every pulse.
  bool hop_during_pulses = true;
  ProbeConfig probe;
  ReadoutModel readout;

  static ScenarioConfig defaults_for(ScenarioKind kind) {
    ScenarioConfig cfg;
    cfg.scenario = kind;
    switch (scenario_family(kind)) {
      case 2:
        cfg.time = TimeGrid{0.0, 480e-6, 20e-6};
        cfg.shots = 500;
        break;
      case 3:
      case 0:
        cfg.time = TimeGrid{0.0, 480e-6, 20e-6};
        cfg.shots = 50;
        break;
      case 4:
        cfg.time = TimeGrid{0.0, 480e-6, 40e-6};
        cfg.shots = 50;
        break;
    }
    return cfg;
  }

  void validate() const {
    trap.validate();
    hilbert.validate();
    time.validate();
    noise.validate();
    probe.validate();
    readout.validate();
    blockade.validate();
    if (trap.ion_count != hilbert.ion_count) {
      throw ValidationError("ScenarioConfig: trap and hilbert ion counts differ");
    }
    if (scenario_family(scenario) != 0 || scenario == ScenarioKind::Custom) {
      if (trap.ion_count != 2) {
        throw ValidationError("ScenarioConfig: built-in scenarios are two-ion experiments");
      }
    }
    if (hilbert.internal_levels != 2) {
      throw ValidationError(
          "ScenarioConfig: dynamics run in a 2-level internal space (readout extends it)");
    }
    if (hilbert.n_max < 3) {
      throw ValidationError("ScenarioConfig: n_max must be >= 3 for two-excitation scenarios");
    }
    if (!(pulse_g > 0)) throw ValidationError("ScenarioConfig: pulse_g must be > 0");
    if (shots < 1 && !ideal_mode) {
      throw ValidationError("ScenarioConfig: shots must be >= 1 unless ideal_mode");
    }
    if (blockade.site < 0 || blockade.site >= trap.ion_count) {
      throw ValidationError("ScenarioConfig: blockade site out of range");
    }
  }
};

/// Named probability columns over a common time axis.
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  double max_cutoff_population = 0.0;

  std::vector<double>& add_column(const std::string& name) {
    columns.emplace_back(name, std::vector<double>{});
    return columns.back().second;
  }

  const std::vector<double>& column(const std::string& name) const {
    for (const auto& [n, v] : columns) {
      if (n == name) return v;
    }
    throw ValidationError("TimeSeries: no column named " + name);
  }

  bool has_column(const std::string& name) const {
    for (const auto& [n, v] : columns) {
      if (n == name) return true;
    }
    return false;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "time_s";
    for (const auto& [n, v] : columns) out << "," << n;
    out << "\n";
    for (size_t i = 0; i < times.size(); ++i) {
      out << format_double(times[i]);
      for (const auto& [n, v] : columns) out << "," << format_double(v.at(i));
      out << "\n";
    }
    return out.str();
  }
};

/// Spin-dephasing rate (for L = |up><up| per ion) that gives a lone BSB pi
/// pulse at half-Rabi frequency g the requested infidelity. Scalar bisection;
/// the achieved infidelity lands within `tol` of the target.
inline double calibrate_noise(double target_infidelity, double g, double tol = 5e-4) {
  if (target_infidelity == 0.0) return 0.0;
  if (!(target_infidelity > 0 && target_infidelity < 0.5)) {
    throw ValidationError("calibrate_noise: target must be in (0, 0.5)");
  }
  if (!(g > 0)) throw ValidationError("calibrate_noise: g must be > 0");

  const HilbertSpec spec{1, 2, 2};
  const ChainGeometry lone{{0.0}, Eigen::MatrixXd::Zero(1, 1), {0.0}};
  const Segment pulse =
      pulse_segment(spec, lone, PulseEvent{0, Transition::Bsb, constants::pi, 0.0, g}, false);
  const StateVector psi0 = product_state(spec, {IonLabel{0, 0}});
  const DensityOperator rho0 = psi0 * psi0.adjoint();
  const long target_idx = spec.basis_index(std::vector<IonLabel>{IonLabel{1, 1}});

  auto infidelity = [&](double rate) {
    const std::vector<NoiseChannel> channels{{internal_projector(spec, 0, Internal::Up), rate}};
    const DensityOperator rho = propagate_lindblad(pulse, channels, rho0);
    return 1.0 - rho(target_idx, target_idx).real();
  };

  double lo = 0.0;
  double hi = 1.0 / pulse.duration;
  int guard = 0;
  while (infidelity(hi) < target_infidelity) {
    hi *= 2.0;
    if (++guard > 60) throw NumericalError("calibrate_noise: target infidelity unreachable");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = infidelity(mid);
    if (std::abs(f - target_infidelity) <= tol) return mid;
    (f < target_infidelity ? lo : hi) = mid;
  }
  throw NumericalError("calibrate_noise: bisection did not converge");
}

namespace detail {

inline std::vector<NoiseChannel> dephasing_channels(const HilbertSpec& spec, double rate) {
  std::vector<NoiseChannel> out;
  if (rate <= 0) return out;
  for (int ion = 0; ion < spec.ion_count; ++ion) {
    out.push_back(NoiseChannel{internal_projector(spec, ion, Internal::Up), rate});
  }
  return out;
}

inline bool step_uses_rsb(const SequenceStep& step) {
  if (const auto* events = std::get_if<std::vector<PulseEvent>>(&step)) {
    for (const auto& e : *events) {
      if (e.transition == Transition::Rsb) return true;
    }
  }
  return false;
}

inline std::uint64_t derived_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 of (base, index): decorrelates per-point streams.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Shared machinery of the scenario pipelines.
class ScenarioRun {
 public:
  explicit ScenarioRun(const ScenarioConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    geom_ = ChainGeometry::from_trap(cfg_.trap);
    dyn_ = cfg_.hilbert;
    noisy_ = !cfg_.ideal_mode && cfg_.noise.enabled;
    sampling_ = !cfg_.ideal_mode;
    if (noisy_) {
      rate_bsb_ = calibrate_noise(cfg_.noise.pulse_infidelity_target, cfg_.pulse_g);
      const double rsb_target = cfg_.noise.rsb_infidelity_target >= 0
                                    ? cfg_.noise.rsb_infidelity_target
                                    : cfg_.noise.pulse_infidelity_target;
      rate_rsb_ = calibrate_noise(rsb_target, cfg_.pulse_g);
    }
  }

  TimeSeries run() {
    switch (scenario_family(cfg_.scenario)) {
      case 2: return run_fig2();
      case 4: return run_fig4();
      default: return run_fig3();
    }
  }

  double rate_bsb() const { return rate_bsb_; }
  double rate_rsb() const { return rate_rsb_; }
  const ChainGeometry& geometry() const { return geom_; }

 private:
  bool blockade_active() const {
    return scenario_blockade_on(cfg_.scenario) ||
           (cfg_.scenario == ScenarioKind::Custom && cfg_.blockade.g > 0);
  }

  Operator hop_hamiltonian_with_drive() const {
    std::vector<DriveSpec> drives;
    if (blockade_active()) drives.push_back(cfg_.blockade);
    return blockade_hamiltonian(dyn_, geom_, drives);
  }

  double segment_rate(const SequenceStep& step) const {
    return step_uses_rsb(step) ? rate_rsb_ : rate_bsb_;
  }

  void observe_truncation(double p) {
    worst_cutoff_ = std::max(worst_cutoff_, p);
    if (p > 1e-3) {
      throw NumericalError(
          "scenario: population at the Fock cutoff exceeded 1e-3; raise n_max");
    }
    if (p > 1e-6 && !warned_) {
      warned_ = true;
      std::cerr << "phonsim: warning: population " << p
                << " at the Fock cutoff (n_max = " << dyn_.n_max << ")\n";
    }
  }

  // --- pure-state path ---------------------------------------------------

  StateVector initial_pure() const {
    std::vector<IonLabel> labels(dyn_.ion_count, IonLabel{0, 0});
    return product_state(dyn_, labels);
  }

  StateVector apply_sequence(const HilbertSpec& spec, const PulseSequence& seq,
                             StateVector psi) const {
    for (const auto& seg : sequence_segments(spec, geom_, seq, cfg_.hop_during_pulses)) {
      psi = propagate_unitary(seg, psi);
    }
    return psi;
  }

  Operator sequence_unitary(const HilbertSpec& spec, const PulseSequence& seq) const {
    Operator u = Operator::Identity(spec.dimension(), spec.dimension());
    for (const auto& seg : sequence_segments(spec, geom_, seq, cfg_.hop_during_pulses)) {
      u = SegmentPropagator(seg.hamiltonian).unitary(seg.duration) * u;
    }
    return u;
  }

  // --- density-operator path ----------------------------------------------

  DensityOperator initial_thermal() const {
    // Thermal weights truncated at n = 1: p1 = r / (1 + r), r = nbar/(1+nbar).
    const double r = cfg_.noise.nbar / (1.0 + cfg_.noise.nbar);
    const double p1 = r / (1.0 + r);
    Eigen::MatrixXcd local = Eigen::MatrixXcd::Zero(dyn_.local_dim(), dyn_.local_dim());
    local(0, 0) = 1.0 - p1;  // |down, 0>
    local(1, 1) = p1;        // |down, 1>
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(1, 1);
    for (int i = 0; i < dyn_.ion_count; ++i) rho = kron(rho, local);
    return rho;
  }

  DensityOperator apply_sequence_noisy(const HilbertSpec& spec, const PulseSequence& seq,
                                       DensityOperator rho) const {
    for (const auto& step : seq.steps) {
      const Segment seg = step_segment(spec, geom_, step, cfg_.hop_during_pulses);
      const auto channels = dephasing_channels(spec, segment_rate(step));
      rho = propagate_lindblad(seg, channels, rho);
    }
    return rho;
  }

  // --- shared stages --------------------------------------------------------

  PulseSequence prep() const {
    return prep_sequence(scenario_family(cfg_.scenario) == 2 ? PrepKind::Fig2 : PrepKind::Fig3,
                         dyn_, cfg_.pulse_g);
  }

  /// Hop-stage states at the requested times (pure or mixed path).
  template <typename State>
  std::vector<State> hop_snapshots(const State& after_prep, const std::vector<double>& taus,
                                   bool with_noise) {
    const Operator h = hop_hamiltonian_with_drive();
    const double tau_max = taus.back();
    std::vector<State> out;
    out.reserve(taus.size());
    if constexpr (std::is_same_v<State, StateVector>) {
      const SegmentPropagator prop(h);
      for (double tau : taus) out.push_back(prop.advance(after_prep, tau));
    } else {
      std::vector<NoiseChannel> channels;
      if (with_noise && blockade_active()) {
        // The blockade beam is a continuous drive; it carries the dephasing of
        // its sideband. Drive-free waits stay coherent.
        const double rate =
            cfg_.blockade.sideband == Sideband::Red ? rate_rsb_ : rate_bsb_;
        channels = dephasing_channels(dyn_, rate);
      }
      const auto res = run_schedule({Segment{h, tau_max}}, channels, after_prep, taus);
      out = res.samples;
    }
    return out;
  }

  // --- the three pipelines ---------------------------------------------------

  TimeSeries run_fig2();
  TimeSeries run_fig3();
  TimeSeries run_fig4();

  const ScenarioConfig cfg_;
  ChainGeometry geom_;
  HilbertSpec dyn_;
  bool noisy_ = false;
  bool sampling_ = false;
  double rate_bsb_ = 0.0;
  double rate_rsb_ = 0.0;
  double worst_cutoff_ = 0.0;
  bool warned_ = false;
};

inline TimeSeries ScenarioRun::run_fig2() {
  const std::vector<double> taus = cfg_.time.times();
  const HilbertSpec map_spec{dyn_.ion_count, dyn_.n_max, 3};
  const PulseSequence mapping = pnr_map_sequence(std::vector<int>{0, 1}, cfg_.pulse_g);

  TimeSeries ts;
  ts.times = taus;
  auto& p20e = ts.add_column("P20_exact");
  auto& p11e = ts.add_column("P11_exact");
  auto& p02e = ts.add_column("P02_exact");
  auto& pleak = ts.add_column("Pleak_exact");
  auto& f20 = ts.add_column("phonon_P20");
  auto& f11 = ts.add_column("phonon_P11");
  auto& f02 = ts.add_column("phonon_P02");
  std::vector<double>*p20s = nullptr, *p11s = nullptr, *p02s = nullptr;
  std::vector<double>*s20 = nullptr, *s11 = nullptr, *s02 = nullptr;
  if (sampling_) {
    p20s = &ts.add_column("P20_sampled");
    p11s = &ts.add_column("P11_sampled");
    p02s = &ts.add_column("P02_sampled");
    s20 = &ts.add_column("P20_sigma");
    s11 = &ts.add_column("P11_sigma");
    s02 = &ts.add_column("P02_sigma");
  }

  auto record = [&](std::uint64_t index, const auto& mapped) {
    const Eigen::Matrix3d joint =
        joint_classification_probabilities(map_spec, mapped, cfg_.readout);
    // Classified pair (n_ion0, n_ion1): |2,0> is (n2, n0) etc.
    p20e.push_back(joint(2, 0));
    p11e.push_back(joint(1, 1));
    p02e.push_back(joint(0, 2));
    pleak.push_back(1.0 - joint(2, 0) - joint(1, 1) - joint(0, 2));
    if (sampling_) {
      const PnrOutcome counts = two_stage_readout(map_spec, mapped, cfg_.shots,
                                                  derived_seed(cfg_.seed, index), cfg_.readout);
      const double n = static_cast<double>(counts.shots);
      const double q20 = counts.count(2, 0) / n;
      const double q11 = counts.count(1, 1) / n;
      const double q02 = counts.count(0, 2) / n;
      p20s->push_back(q20);
      p11s->push_back(q11);
      p02s->push_back(q02);
      s20->push_back(binomial_sigma(q20, counts.shots));
      s11->push_back(binomial_sigma(q11, counts.shots));
      s02->push_back(binomial_sigma(q02, counts.shots));
    }
  };

  if (!noisy_) {
    StateVector prep_state = apply_sequence(dyn_, prep(), initial_pure());
    observe_truncation(cutoff_population(dyn_, prep_state));
    const auto snaps = hop_snapshots(prep_state, taus, false);
    const Operator u_map = sequence_unitary(map_spec, mapping);
    for (size_t k = 0; k < snaps.size(); ++k) {
      const Eigen::MatrixXd fock = joint_fock_distribution(dyn_, snaps[k]);
      f20.push_back(fock(2, 0));
      f11.push_back(fock(1, 1));
      f02.push_back(fock(0, 2));
      const StateVector mapped = u_map * embed_state(dyn_, map_spec, snaps[k]);
      observe_truncation(cutoff_population(map_spec, mapped));
      record(k, mapped);
    }
  } else {
    DensityOperator rho = apply_sequence_noisy(dyn_, prep(), initial_thermal());
    observe_truncation(cutoff_population(dyn_, rho));
    const auto snaps = hop_snapshots(rho, taus, true);
    const auto map_segments = sequence_segments(map_spec, geom_, mapping, cfg_.hop_during_pulses);
    std::vector<double> map_rates;
    for (const auto& step : mapping.steps) map_rates.push_back(segment_rate(step));
    for (size_t k = 0; k < snaps.size(); ++k) {
      const Eigen::MatrixXd fock = joint_fock_distribution(dyn_, snaps[k]);
      f20.push_back(fock(2, 0));
      f11.push_back(fock(1, 1));
      f02.push_back(fock(0, 2));
      DensityOperator mapped = embed_state(dyn_, map_spec, snaps[k]);
      for (size_t s = 0; s < map_segments.size(); ++s) {
        mapped = propagate_lindblad(map_segments[s],
                                    dephasing_channels(map_spec, map_rates[s]), mapped);
      }
      observe_truncation(cutoff_population(map_spec, mapped));
      record(k, mapped);
    }
  }
  ts.max_cutoff_population = worst_cutoff_;
  return ts;
}

inline TimeSeries ScenarioRun::run_fig3() {
  const std::vector<double> taus = cfg_.time.times();
  PulseSequence mapping;
  mapping.push(std::vector<PulseEvent>{
      PulseEvent{0, Transition::Bsb, constants::pi, 0.0, cfg_.pulse_g},
      PulseEvent{1, Transition::Bsb, constants::pi, 0.0, cfg_.pulse_g}});

  TimeSeries ts;
  ts.times = taus;
  auto& d1e = ts.add_column("P_down_ion1_exact");
  auto& d2e = ts.add_column("P_down_ion2_exact");
  auto& f20 = ts.add_column("phonon_P20");
  auto& f11 = ts.add_column("phonon_P11");
  auto& f02 = ts.add_column("phonon_P02");
  std::vector<double>*d1s = nullptr, *d2s = nullptr, *g1s = nullptr, *g2s = nullptr;
  if (sampling_) {
    d1s = &ts.add_column("P_down_ion1_sampled");
    d2s = &ts.add_column("P_down_ion2_sampled");
    g1s = &ts.add_column("P_down_ion1_sigma");
    g2s = &ts.add_column("P_down_ion2_sigma");
  }

  auto record = [&](std::uint64_t index, const auto& mapped) {
    d1e.push_back(spin_down_probability(dyn_, mapped, 0));
    d2e.push_back(spin_down_probability(dyn_, mapped, 1));
    if (sampling_) {
      // Joint bright/dark sampling: bright means the down manifold.
      const Eigen::Matrix3d m = joint_manifold_distribution(dyn_, mapped);
      const double b0 = m.row(0).sum();
      const double b1 = m.col(0).sum();
      const double b01 = m(0, 0);
      const std::array<double, 4> joint{b01, std::max(b0 - b01, 0.0), std::max(b1 - b01, 0.0),
                                        std::max(1.0 - b0 - b1 + b01, 0.0)};
      ShotRng rng(derived_seed(cfg_.seed, index));
      const auto counts = rng.multinomial(cfg_.shots, joint);
      const double n = static_cast<double>(cfg_.shots);
      const double q1 = (counts[0] + counts[1]) / n;
      const double q2 = (counts[0] + counts[2]) / n;
      d1s->push_back(q1);
      d2s->push_back(q2);
      g1s->push_back(binomial_sigma(q1, cfg_.shots));
      g2s->push_back(binomial_sigma(q2, cfg_.shots));
    }
  };

  if (!noisy_) {
    StateVector prep_state = apply_sequence(dyn_, prep(), initial_pure());
    observe_truncation(cutoff_population(dyn_, prep_state));
    const auto snaps = hop_snapshots(prep_state, taus, false);
    const Operator u_map = sequence_unitary(dyn_, mapping);
    for (size_t k = 0; k < snaps.size(); ++k) {
      const Eigen::MatrixXd fock = joint_fock_distribution(dyn_, snaps[k]);
      f20.push_back(fock(2, 0));
      f11.push_back(fock(1, 1));
      f02.push_back(fock(0, 2));
      const StateVector mapped = u_map * snaps[k];
      observe_truncation(cutoff_population(dyn_, mapped));
      record(k, mapped);
    }
  } else {
    DensityOperator rho = apply_sequence_noisy(dyn_, prep(), initial_thermal());
    observe_truncation(cutoff_population(dyn_, rho));
    const auto snaps = hop_snapshots(rho, taus, true);
    for (size_t k = 0; k < snaps.size(); ++k) {
      const Eigen::MatrixXd fock = joint_fock_distribution(dyn_, snaps[k]);
      f20.push_back(fock(2, 0));
      f11.push_back(fock(1, 1));
      f02.push_back(fock(0, 2));
      const DensityOperator mapped = apply_sequence_noisy(dyn_, mapping, snaps[k]);
      observe_truncation(cutoff_population(dyn_, mapped));
      record(k, mapped);
    }
  }
  ts.max_cutoff_population = worst_cutoff_;
  return ts;
}

inline TimeSeries ScenarioRun::run_fig4() {
  const std::vector<double> taus = cfg_.time.times();
  PulseSequence carrier;
  carrier.push(std::vector<PulseEvent>{
      PulseEvent{0, Transition::CarrierDnUp, constants::pi, 0.0, cfg_.pulse_g},
      PulseEvent{1, Transition::CarrierDnUp, constants::pi, 0.0, cfg_.pulse_g}});

  const double probe_span = cfg_.probe.periods * constants::pi / cfg_.pulse_g;
  std::vector<double> probe_times(cfg_.probe.points);
  for (int i = 0; i < cfg_.probe.points; ++i) {
    probe_times[i] = probe_span * i / (cfg_.probe.points - 1);
  }
  const Segment probe_segment = pulse_segment(
      dyn_, geom_,
      PulseEvent{0, Transition::Bsb, 2.0 * cfg_.pulse_g * probe_span, 0.0, cfg_.pulse_g},
      cfg_.hop_during_pulses);

  TimeSeries ts;
  ts.times = taus;
  auto& p0e = ts.add_column("p0_exact");
  auto& p1e = ts.add_column("p1_exact");
  auto& p2e = ts.add_column("p2_exact");
  auto& p0f = ts.add_column("p0_fit");
  auto& p1f = ts.add_column("p1_fit");
  auto& p2f = ts.add_column("p2_fit");
  auto& fitg = ts.add_column("fit_g");
  auto& fitgamma = ts.add_column("fit_gamma");
  auto& fitrms = ts.add_column("fit_rms");
  auto& fitok = ts.add_column("fit_ok");

  RabiFitOptions fit_options;
  fit_options.g_min = 0.5 * cfg_.pulse_g;  // the drive strength is calibrated
  fit_options.g_max = 2.0 * cfg_.pulse_g;
  fit_options.g_prior = cfg_.pulse_g;

  auto record = [&](std::uint64_t index, const auto& pre_probe) {
    // True phonon distribution of ion 0 before the probe.
    const Eigen::MatrixXd table = partial_populations(dyn_, pre_probe, 0);
    p0e.push_back(table.col(0).sum());
    p1e.push_back(table.col(1).sum());
    p2e.push_back(table.col(2).sum());

    // One continuous probe drive, sampled along the way.
    RabiTrace trace;
    trace.times_s = probe_times;
    if constexpr (std::is_same_v<std::decay_t<decltype(pre_probe)>, StateVector>) {
      const SegmentPropagator prop(probe_segment.hamiltonian);
      for (double t : probe_times) {
        trace.p_down.push_back(spin_down_probability(dyn_, prop.advance(pre_probe, t), 0));
      }
    } else {
      const auto channels = dephasing_channels(dyn_, rate_bsb_);
      Segment seg = probe_segment;
      propagate_lindblad(seg, channels, pre_probe, LindbladOptions{}, probe_times,
                         [&](double, const DensityOperator& r) {
                           trace.p_down.push_back(spin_down_probability(dyn_, r, 0));
                         });
    }
    trace.sigma.assign(probe_times.size(), 0.0);

    if (sampling_) {
      ShotRng rng(derived_seed(cfg_.seed, index));
      trace.shots_per_point = cfg_.shots;
      for (size_t i = 0; i < trace.p_down.size(); ++i) {
        long bright = 0;
        for (long s = 0; s < cfg_.shots; ++s) bright += rng.bernoulli(trace.p_down[i]) ? 1 : 0;
        trace.p_down[i] = static_cast<double>(bright) / static_cast<double>(cfg_.shots);
        trace.sigma[i] = binomial_sigma(trace.p_down[i], cfg_.shots);
      }
    }

    const RabiFitResult fit = rabi_fit(trace, 3, fit_options);
    p0f.push_back(fit.dist.p[0]);
    p1f.push_back(fit.dist.p[1]);
    p2f.push_back(fit.dist.p[2]);
    fitg.push_back(fit.g);
    fitgamma.push_back(fit.gamma);
    fitrms.push_back(fit.rms_residual);
    fitok.push_back(fit.identifiable ? 1.0 : 0.0);
  };

  if (!noisy_) {
    StateVector prep_state = apply_sequence(dyn_, prep(), initial_pure());
    observe_truncation(cutoff_population(dyn_, prep_state));
    const auto snaps = hop_snapshots(prep_state, taus, false);
    const Operator u_carrier = sequence_unitary(dyn_, carrier);
    for (size_t k = 0; k < snaps.size(); ++k) record(k, StateVector(u_carrier * snaps[k]));
  } else {
    DensityOperator rho = apply_sequence_noisy(dyn_, prep(), initial_thermal());
    observe_truncation(cutoff_population(dyn_, rho));
    const auto snaps = hop_snapshots(rho, taus, true);
    for (size_t k = 0; k < snaps.size(); ++k) {
      record(k, apply_sequence_noisy(dyn_, carrier, snaps[k]));
    }
  }
  ts.max_cutoff_population = worst_cutoff_;
  return ts;
}

}  // namespace detail

/// Runs one configured experiment end to end; deterministic given the seed.
inline TimeSeries run_scenario(const ScenarioConfig& config) {
  detail::ScenarioRun run(config);
  return run.run();
}

struct BlockadeSweepPoint {
  double g = 0.0;
  double max_leakage = 0.0;
  double mean_leakage = 0.0;
};

/// Leakage 1 - P(initial Fock configuration) over the configured time window,
/// for a list of blockade drive strengths. Runs fan out across threads with
/// seeds derived per index; output order follows the input order.
inline std::vector<BlockadeSweepPoint> sweep_blockade(const ScenarioConfig& base,
                                                      std::span<const double> g_values) {
  if (g_values.size() < 2) throw ValidationError("sweep_blockade: need at least 2 g values");
  const int family = scenario_family(base.scenario);

  auto one = [&](double g, std::uint64_t index) {
    ScenarioConfig cfg = base;
    cfg.scenario = family == 2 ? ScenarioKind::Fig2Blockade : ScenarioKind::Fig3Blockade;
    cfg.blockade.g = g;
    cfg.seed = base.seed + index;
    const TimeSeries ts = run_scenario(cfg);
    const auto& p = ts.column(family == 2 ? "phonon_P20" : "phonon_P11");
    BlockadeSweepPoint point;
    point.g = g;
    double acc = 0.0;
    for (double v : p) {
      point.max_leakage = std::max(point.max_leakage, 1.0 - v);
      acc += 1.0 - v;
    }
    point.mean_leakage = acc / static_cast<double>(p.size());
    return point;
  };

  std::vector<std::future<BlockadeSweepPoint>> futures;
  futures.reserve(g_values.size());
  for (size_t i = 0; i < g_values.size(); ++i) {
    futures.push_back(std::async(std::launch::async, one, g_values[i], i));
  }
  std::vector<BlockadeSweepPoint> out;
  out.reserve(g_values.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace phonsim
