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
#include <variant>
#include <vector>

#include "phonsim/constants.hpp"
#include "phonsim/dynamics.hpp"
#include "phonsim/hamiltonian.hpp"

namespace phonsim {

enum class Transition { CarrierDnUp, ShelveDnE0, Bsb, Rsb };

inline const char* transition_name(Transition t) {
  switch (t) {
    case Transition::CarrierDnUp: return "carrier_dn_up";
    case Transition::ShelveDnE0: return "shelve_dn_e0";
    case Transition::Bsb: return "bsb";
    case Transition::Rsb: return "rsb";
  }
  return "?";
}

/// One laser pulse. theta is the rotation angle a motional ground-state ion
/// would acquire (it accumulates as 2 g t, so duration = theta / 2g); the
/// sqrt(n+1) speed-up of higher sideband rungs comes from the Hamiltonian,
/// not from duration bookkeeping. phi sets the rotation axis.
struct PulseEvent {
  int ion = 0;
  Transition transition = Transition::Bsb;
  double theta = constants::pi;  // rad
  double phi = 0.0;              // rad
  double g = 0.0;                // rad/s, half-Rabi frequency
  double detuning = 0.0;         // rad/s

  void validate() const {
    if (theta < 0) throw ValidationError("PulseEvent: theta must be >= 0");
    if (theta > 0 && !(g > 0)) throw ValidationError("PulseEvent: g must be > 0 when theta > 0");
    if (g < 0) throw ValidationError("PulseEvent: g must be >= 0");
  }

  double duration() const {
    validate();
    return theta == 0 ? 0.0 : theta / (2.0 * g);
  }
};

/// Drive-free gap in a sequence.
struct WaitEvent {
  double duration = 0.0;

  void validate() const {
    if (!(duration >= 0)) throw ValidationError("WaitEvent: duration must be >= 0");
  }
};

/// One schedule step: either a wait or a set of simultaneous pulses on
/// distinct ions (all sharing one duration).
using SequenceStep = std::variant<WaitEvent, std::vector<PulseEvent>>;

struct PulseSequence {
  std::vector<SequenceStep> steps;

  void push(const PulseEvent& e) { steps.emplace_back(std::vector<PulseEvent>{e}); }
  void push(std::vector<PulseEvent> es) { steps.emplace_back(std::move(es)); }
  void push(const WaitEvent& w) { steps.emplace_back(w); }

  double total_duration() const {
    double t = 0.0;
    for (const auto& step : steps) t += step_duration(step);
    return t;
  }

  static double step_duration(const SequenceStep& step) {
    if (const auto* w = std::get_if<WaitEvent>(&step)) {
      w->validate();
      return w->duration;
    }
    const auto& events = std::get<std::vector<PulseEvent>>(step);
    if (events.empty()) throw ValidationError("PulseSequence: empty pulse step");
    std::set<int> ions;
    const double d = events.front().duration();
    for (const auto& e : events) {
      if (!ions.insert(e.ion).second) {
        throw ValidationError("PulseSequence: simultaneous pulses must target distinct ions");
      }
      if (std::abs(e.duration() - d) > 1e-12 * std::max(d, 1e-30)) {
        throw ValidationError("PulseSequence: simultaneous pulses must share one duration");
      }
    }
    return d;
  }
};

/// Drive Hamiltonian of a single pulse (no hopping term).
inline Operator drive_operator(const HilbertSpec& spec, const PulseEvent& event) {
  event.validate();
  if (event.ion < 0 || event.ion >= spec.ion_count) {
    throw ValidationError("drive_operator: ion out of range");
  }
  const Complex ephase = std::exp(Complex(0.0, event.phi));
  Operator h;
  switch (event.transition) {
    case Transition::Bsb:
      h = sideband_coupling(spec, event.ion, Sideband::Blue, event.g, event.phi);
      if (event.detuning != 0.0) {
        h += event.detuning * internal_projector(spec, event.ion, Internal::Down);
      }
      break;
    case Transition::Rsb:
      h = sideband_coupling(spec, event.ion, Sideband::Red, event.g, event.phi);
      if (event.detuning != 0.0) {
        h += event.detuning * internal_projector(spec, event.ion, Internal::Up);
      }
      break;
    case Transition::CarrierDnUp: {
      const Operator term =
          (event.g * ephase) * internal_transfer_op(spec, event.ion, Internal::Up, Internal::Down);
      h = term + term.adjoint();
      if (event.detuning != 0.0) {
        h += event.detuning * internal_projector(spec, event.ion, Internal::Up);
      }
      break;
    }
    case Transition::ShelveDnE0: {
      if (spec.internal_levels < 3) {
        throw ValidationError("drive_operator: shelving needs a 3-level internal space");
      }
      const Operator term =
          (event.g * ephase) * internal_transfer_op(spec, event.ion, Internal::Aux, Internal::Down);
      h = term + term.adjoint();
      if (event.detuning != 0.0) {
        h += event.detuning * internal_projector(spec, event.ion, Internal::Aux);
      }
      break;
    }
  }
  return h;
}

/// Lowers one pulse to a schedule segment. With include_hopping the chain
/// Hamiltonian (hopping and site shifts) stays on underneath the drive.
inline Segment pulse_segment(const HilbertSpec& spec, const ChainGeometry& geometry,
                             const PulseEvent& event, bool include_hopping = true) {
  Segment s;
  s.hamiltonian = drive_operator(spec, event);
  if (include_hopping) s.hamiltonian += hopping_hamiltonian(spec, geometry);
  s.duration = event.duration();
  return s;
}

/// Lowers one sequence step (wait or simultaneous pulse group).
inline Segment step_segment(const HilbertSpec& spec, const ChainGeometry& geometry,
                            const SequenceStep& step, bool include_hopping = true) {
  Segment s;
  const long dim = spec.dimension();
  s.duration = PulseSequence::step_duration(step);
  if (include_hopping) {
    s.hamiltonian = hopping_hamiltonian(spec, geometry);
  } else {
    s.hamiltonian = Operator::Zero(dim, dim);
  }
  if (const auto* events = std::get_if<std::vector<PulseEvent>>(&step)) {
    for (const auto& e : *events) s.hamiltonian += drive_operator(spec, e);
  }
  return s;
}

inline std::vector<Segment> sequence_segments(const HilbertSpec& spec,
                                              const ChainGeometry& geometry,
                                              const PulseSequence& seq,
                                              bool include_hopping = true) {
  std::vector<Segment> out;
  out.reserve(seq.steps.size());
  for (const auto& step : seq.steps) {
    out.push_back(step_segment(spec, geometry, step, include_hopping));
  }
  return out;
}

/// Composite blue-sideband pulse
///   R_CP = R_BSB(pi/2, 0) . R_BSB(pi/sqrt2, pi/2) . R_BSB(pi/2, 0)
/// (rightmost applied first; steps are listed in application order).
/// Transfers |dn,0> -> |up,1> and |dn,1> -> |up,2> simultaneously: the outer
/// pulses alone give a perfect pi at the sqrt(1) Rabi scale, and the middle
/// rotation reaches a half-turn exactly at the sqrt(2) scale, cancelling the
/// residual amplitude there.
inline PulseSequence composite_cp(int ion, double g) {
  if (!(g > 0)) throw ValidationError("composite_cp: g must be > 0");
  PulseSequence seq;
  seq.push(PulseEvent{ion, Transition::Bsb, constants::pi / 2.0, 0.0, g});
  seq.push(PulseEvent{ion, Transition::Bsb, constants::pi / std::sqrt(2.0),
                      constants::pi / 2.0, g});
  seq.push(PulseEvent{ion, Transition::Bsb, constants::pi / 2.0, 0.0, g});
  return seq;
}

/// Multi-ion variant: the three composite rotations hit all listed ions at
/// the same time.
inline PulseSequence composite_cp(const std::vector<int>& ions, double g) {
  if (!(g > 0)) throw ValidationError("composite_cp: g must be > 0");
  PulseSequence seq;
  auto group = [&](double theta, double phi) {
    std::vector<PulseEvent> events;
    for (int ion : ions) events.push_back(PulseEvent{ion, Transition::Bsb, theta, phi, g});
    return events;
  };
  seq.push(group(constants::pi / 2.0, 0.0));
  seq.push(group(constants::pi / std::sqrt(2.0), constants::pi / 2.0));
  seq.push(group(constants::pi / 2.0, 0.0));
  return seq;
}

enum class PrepKind { Fig2, Fig3 };

/// State-preparation sequences for the two-ion experiments, starting from
/// |dn,0>|dn,0>:
///   Fig2: BSB pi on ion 0, then a carrier pi and a sqrt(2)-calibrated BSB pi
///         on both ions; ends in |up,2>|up,0> when hopping is off.
///   Fig3: BSB pi on both ions; ends in |up,1>|up,1>.
inline PulseSequence prep_sequence(PrepKind kind, const HilbertSpec& spec, double g) {
  if (spec.ion_count != 2) throw ValidationError("prep_sequence: two-ion sequences only");
  if (!(g > 0)) throw ValidationError("prep_sequence: g must be > 0");
  PulseSequence seq;
  const double pi = constants::pi;
  if (kind == PrepKind::Fig3) {
    seq.push(std::vector<PulseEvent>{PulseEvent{0, Transition::Bsb, pi, 0.0, g},
                                     PulseEvent{1, Transition::Bsb, pi, 0.0, g}});
    return seq;
  }
  seq.push(PulseEvent{0, Transition::Bsb, pi, 0.0, g});
  seq.push(std::vector<PulseEvent>{PulseEvent{0, Transition::CarrierDnUp, pi, 0.0, g},
                                   PulseEvent{1, Transition::CarrierDnUp, pi, 0.0, g}});
  // Ground-state angle pi/sqrt(2), i.e. a pi rotation on the n=1 <-> n=2 rung.
  seq.push(std::vector<PulseEvent>{PulseEvent{0, Transition::Bsb, pi / std::sqrt(2.0), 0.0, g},
                                   PulseEvent{1, Transition::Bsb, pi / std::sqrt(2.0), 0.0, g}});
  return seq;
}

}  // namespace phonsim
