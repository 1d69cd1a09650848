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
#include <functional>
#include <span>
#include <vector>

#include "phonsim/core.hpp"

namespace phonsim {

/// One piecewise-constant slice of a schedule.
struct Segment {
  Operator hamiltonian;
  double duration = 0.0;  // s

  void validate() const {
    if (!(duration >= 0)) throw ValidationError("Segment: duration must be >= 0");
    if (!is_hermitian(hamiltonian, 1e-10)) {
      throw ValidationError("Segment: Hamiltonian is not Hermitian (max-norm tol 1e-10)");
    }
  }
};

/// Lindblad collapse operator with its rate.
struct NoiseChannel {
  Operator collapse;
  double rate = 0.0;  // 1/s

  void validate() const {
    if (!(rate >= 0)) throw ValidationError("NoiseChannel: rate must be >= 0");
  }
};

/// Propagator for a constant Hermitian H, exact up to floating point:
/// exp(-iHt) through the eigendecomposition. Reusable across times.
class SegmentPropagator {
 public:
  explicit SegmentPropagator(const Operator& h) {
    if (!is_hermitian(h, 1e-10)) {
      throw ValidationError("SegmentPropagator: Hamiltonian is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Operator> es(h);
    if (es.info() != Eigen::Success) {
      throw NumericalError("SegmentPropagator: eigendecomposition failed");
    }
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
  }

  Eigen::VectorXcd phases(double t) const {
    Eigen::VectorXcd p(eigenvalues_.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = std::polar(1.0, -eigenvalues_[j] * t);
    return p;
  }

  StateVector advance(const StateVector& psi, double t) const {
    return eigenvectors_ * (phases(t).asDiagonal() * (eigenvectors_.adjoint() * psi));
  }

  DensityOperator advance(const DensityOperator& rho, double t) const {
    const Operator u = unitary(t);
    return u * rho * u.adjoint();
  }

  Operator unitary(double t) const {
    return eigenvectors_ * phases(t).asDiagonal() * eigenvectors_.adjoint();
  }

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
};

/// psi(t) = exp(-i H t) psi(0).
inline StateVector propagate_unitary(const Segment& segment, const StateVector& psi) {
  segment.validate();
  if (psi.size() != segment.hamiltonian.rows()) {
    throw ValidationError("propagate_unitary: state dimension mismatch");
  }
  if (segment.duration == 0.0) return psi;
  return SegmentPropagator(segment.hamiltonian).advance(psi, segment.duration);
}

/// rho(t) = U rho U^dag, the closed-system (von Neumann) solution.
inline DensityOperator propagate_unitary(const Segment& segment, const DensityOperator& rho) {
  segment.validate();
  if (rho.rows() != segment.hamiltonian.rows() || rho.cols() != segment.hamiltonian.cols()) {
    throw ValidationError("propagate_unitary: state dimension mismatch");
  }
  if (segment.duration == 0.0) return rho;
  return SegmentPropagator(segment.hamiltonian).advance(rho, segment.duration);
}

/// rtol/atol bound the accumulated error over one segment: acceptance is
/// error-per-unit-step, so local truncation errors sum to about the stated
/// tolerance at the segment end.
struct LindbladOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
};

namespace detail {

/// Right-hand side of the master equation
///   drho/dt = -i[H, rho] + sum_k rate_k (L rho L^dag - 1/2 {L^dag L, rho}).
/// Channels with a diagonal collapse operator (pure dephasing) reduce to an
/// elementwise coefficient mask, which keeps the per-evaluation cost at a
/// single dense matmul. Assumes (and preserves) Hermitian rho.
class LindbladRhs {
 public:
  LindbladRhs(const Operator& h, const std::vector<NoiseChannel>& channels) : h_(h) {
    const long dim = h.rows();
    for (const auto& ch : channels) {
      ch.validate();
      if (ch.collapse.rows() != dim || ch.collapse.cols() != dim) {
        throw ValidationError("LindbladRhs: collapse operator dimension mismatch");
      }
      if (ch.rate == 0.0) continue;
      const double scale = max_abs(ch.collapse);
      const bool diagonal =
          max_abs(ch.collapse - Operator(ch.collapse.diagonal().asDiagonal())) <=
          1e-14 * std::max(scale, 1.0);
      if (diagonal) {
        if (mask_.size() == 0) mask_ = Eigen::ArrayXXcd::Zero(dim, dim);
        const Eigen::VectorXcd d = ch.collapse.diagonal();
        for (long j = 0; j < dim; ++j) {
          for (long k = 0; k < dim; ++k) {
            mask_(j, k) += ch.rate * (d[j] * std::conj(d[k]) -
                                      0.5 * (std::norm(d[j]) + std::norm(d[k])));
          }
        }
      } else {
        DenseChannel dc;
        dc.l = ch.collapse;
        dc.ldl = ch.collapse.adjoint() * ch.collapse;
        dc.rate = ch.rate;
        dense_.push_back(std::move(dc));
      }
    }
  }

  void operator()(const DensityOperator& rho, DensityOperator& out) const {
    tmp_.noalias() = Complex(0.0, -1.0) * (h_ * rho);
    out = tmp_ + tmp_.adjoint();  // -i[H, rho] for Hermitian rho
    if (mask_.size() != 0) out.array() += mask_ * rho.array();
    for (const auto& dc : dense_) {
      tmp_.noalias() = dc.l * rho;
      out.noalias() += dc.rate * (tmp_ * dc.l.adjoint());
      tmp_.noalias() = dc.ldl * rho;
      out -= (0.5 * dc.rate) * (tmp_ + tmp_.adjoint());
    }
  }

 private:
  struct DenseChannel {
    Operator l;
    Operator ldl;
    double rate;
  };

  const Operator& h_;
  Eigen::ArrayXXcd mask_;
  std::vector<DenseChannel> dense_;
  mutable Operator tmp_;
};

inline double scaled_error_norm(const DensityOperator& err, const DensityOperator& a,
                                const DensityOperator& b, double atol, double rtol) {
  double acc = 0.0;
  for (long j = 0; j < err.size(); ++j) {
    const double sc = atol + rtol * std::max(std::abs(a(j)), std::abs(b(j)));
    const double e = std::abs(err(j)) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integrator for the master equation over one
/// constant-Hamiltonian segment. `on_sample` is invoked at every requested
/// sample time (relative to segment start, ascending, within [0, duration]).
inline DensityOperator propagate_lindblad(
    const Segment& segment, const std::vector<NoiseChannel>& channels,
    const DensityOperator& rho0, const LindbladOptions& options = {},
    std::span<const double> sample_times = {},
    const std::function<void(double, const DensityOperator&)>& on_sample = {}) {
  segment.validate();
  if (rho0.rows() != segment.hamiltonian.rows() || rho0.cols() != segment.hamiltonian.cols()) {
    throw ValidationError("propagate_lindblad: state dimension mismatch");
  }
  if (!is_hermitian(rho0, 1e-8 * std::max(1.0, max_abs(rho0)))) {
    throw ValidationError("propagate_lindblad: rho is not Hermitian");
  }

  // Dormand-Prince coefficients.
  static const double kA[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double kB5[7] = {35.0 / 384,     0.0,      500.0 / 1113, 125.0 / 192,
                                -2187.0 / 6784, 11.0 / 84, 0.0};
  static const double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                                -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

  const detail::LindbladRhs rhs(segment.hamiltonian, channels);
  DensityOperator rho = rho0;
  const double duration = segment.duration;

  size_t next_sample = 0;
  auto emit_samples_at = [&](double t) {
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t + 1e-12 * std::max(duration, 1.0)) {
      if (on_sample) on_sample(sample_times[next_sample], rho);
      ++next_sample;
    }
  };

  emit_samples_at(0.0);
  if (duration == 0.0) return rho;

  std::vector<DensityOperator> k(7);
  rhs(rho, k[0]);

  // Initial step from the first derivative's magnitude.
  double h = duration;
  {
    const double d0 = max_abs(rho) + options.atol;
    const double d1 = max_abs(k[0]);
    if (d1 > 0) h = std::min(duration, 0.01 * d0 / d1);
    if (!(h > 0)) h = duration;
  }

  double t = 0.0;
  DensityOperator candidate, err;
  const double min_step = duration * 1e-14;
  while (t < duration * (1.0 - 1e-15)) {
    double target = duration;
    if (next_sample < sample_times.size() && sample_times[next_sample] < target) {
      target = sample_times[next_sample];
    }
    if (h < min_step) {
      throw NumericalError("propagate_lindblad: step size underflow (stiff or invalid input)");
    }
    const bool clamped = h > target - t;
    const double hs = clamped ? target - t : h;

    for (int stage = 1; stage < 7; ++stage) {
      candidate = rho;
      for (int j = 0; j < stage; ++j) {
        if (kA[stage][j] != 0.0) candidate += (hs * kA[stage][j]) * k[j];
      }
      rhs(candidate, k[stage]);
    }
    // Stage 7 input is the 5th-order solution itself (FSAL).
    err = (hs * (kB5[0] - kB4[0])) * k[0];
    for (int j = 1; j < 7; ++j) err += (hs * (kB5[j] - kB4[j])) * k[j];

    // Error per unit step: this step may spend hs/duration of the budget.
    const double budget = std::max(hs / duration, 1e-300);
    const double enorm = detail::scaled_error_norm(err, rho, candidate, options.atol * budget,
                                                   options.rtol * budget);
    if (enorm <= 1.0) {
      t += hs;
      rho.swap(candidate);
      k[0].swap(k[6]);  // FSAL: k7 = f(t+h, y_new)
      emit_samples_at(t);
      // Steps clamped to hit a sample time carry no step-size information.
      if (!clamped) {
        h = enorm > 0 ? hs * std::clamp(0.9 * std::pow(enorm, -0.25), 0.2, 5.0) : hs * 5.0;
      }
    } else {
      h = hs * std::clamp(0.9 * std::pow(enorm, -0.25), 0.2, 1.0);
    }
  }
  emit_samples_at(duration);
  return rho;
}

/// States along a schedule: at every segment boundary, plus at the caller's
/// interior sample times (absolute, measured from schedule start).
template <typename State>
struct ScheduleResult {
  std::vector<double> boundary_times;   // size = segments + 1, starts at 0
  std::vector<State> boundary_states;   // state at each boundary time
  std::vector<double> sample_times;
  std::vector<State> samples;
};

inline ScheduleResult<StateVector> run_schedule(const std::vector<Segment>& segments,
                                                const StateVector& psi0,
                                                std::span<const double> sample_times = {}) {
  if (segments.empty()) throw ValidationError("run_schedule: empty schedule");
  for (size_t i = 1; i < sample_times.size(); ++i) {
    if (sample_times[i] < sample_times[i - 1]) {
      throw ValidationError("run_schedule: sample times must be ascending");
    }
  }
  ScheduleResult<StateVector> result;
  result.boundary_times.push_back(0.0);
  result.boundary_states.push_back(psi0);
  double t0 = 0.0;
  size_t cursor = 0;
  StateVector psi = psi0;
  for (size_t s = 0; s < segments.size(); ++s) {
    segments[s].validate();
    const double t1 = t0 + segments[s].duration;
    const bool last = s + 1 == segments.size();
    const SegmentPropagator prop(segments[s].hamiltonian);
    const double slack = 1e-12 * std::max(t1, 1.0);
    while (cursor < sample_times.size() &&
           (sample_times[cursor] < t1 - slack || (last && sample_times[cursor] <= t1 + slack))) {
      result.sample_times.push_back(sample_times[cursor]);
      result.samples.push_back(prop.advance(psi, std::min(sample_times[cursor], t1) - t0));
      ++cursor;
    }
    psi = prop.advance(psi, segments[s].duration);
    result.boundary_times.push_back(t1);
    result.boundary_states.push_back(psi);
    t0 = t1;
  }
  if (cursor < sample_times.size()) {
    throw ValidationError("run_schedule: sample time beyond schedule end");
  }
  return result;
}

inline ScheduleResult<DensityOperator> run_schedule(const std::vector<Segment>& segments,
                                                    const std::vector<NoiseChannel>& channels,
                                                    const DensityOperator& rho0,
                                                    std::span<const double> sample_times = {},
                                                    const LindbladOptions& options = {}) {
  if (segments.empty()) throw ValidationError("run_schedule: empty schedule");
  for (size_t i = 1; i < sample_times.size(); ++i) {
    if (sample_times[i] < sample_times[i - 1]) {
      throw ValidationError("run_schedule: sample times must be ascending");
    }
  }
  bool active = false;
  for (const auto& ch : channels) {
    ch.validate();
    if (ch.rate > 0) active = true;
  }

  ScheduleResult<DensityOperator> result;
  result.boundary_times.push_back(0.0);
  result.boundary_states.push_back(rho0);
  double t0 = 0.0;
  size_t cursor = 0;
  DensityOperator rho = rho0;
  for (size_t s = 0; s < segments.size(); ++s) {
    segments[s].validate();
    const double t1 = t0 + segments[s].duration;
    const bool last = s + 1 == segments.size();
    const double slack = 1e-12 * std::max(t1, 1.0);

    std::vector<double> local;
    while (cursor < sample_times.size() &&
           (sample_times[cursor] < t1 - slack || (last && sample_times[cursor] <= t1 + slack))) {
      local.push_back(std::clamp(sample_times[cursor] - t0, 0.0, segments[s].duration));
      result.sample_times.push_back(sample_times[cursor]);
      ++cursor;
    }

    if (active) {
      rho = propagate_lindblad(segments[s], channels, rho, options, local,
                               [&](double, const DensityOperator& r) {
                                 result.samples.push_back(r);
                               });
    } else {
      // Closed-system segment: the eigendecomposition solution is exact.
      const SegmentPropagator prop(segments[s].hamiltonian);
      for (double tl : local) result.samples.push_back(prop.advance(rho, tl));
      rho = prop.advance(rho, segments[s].duration);
    }
    result.boundary_times.push_back(t1);
    result.boundary_states.push_back(rho);
    t0 = t1;
  }
  if (cursor < sample_times.size()) {
    throw ValidationError("run_schedule: sample time beyond schedule end");
  }
  return result;
}

}  // namespace phonsim
