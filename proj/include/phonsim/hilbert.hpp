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
#include <span>
#include <utility>
#include <vector>

#include "phonsim/core.hpp"

namespace phonsim {

/// Internal (electronic) levels of one ion. Down/Up form the spin qubit;
/// Aux is the metastable storage level used only during readout emulation.
enum class Internal : int { Down = 0, Up = 1, Aux = 2 };

/// Per-ion label (internal level, Fock number).
struct IonLabel {
  int level = 0;
  int n = 0;
};

/// Truncated tensor-product space of ion_count ions, each carrying
/// internal_levels electronic levels and a Fock ladder cut at n_max
/// (inclusive).
///
/// Basis ordering, fixed everywhere in this library:
///   - ion index is the major digit (ion 0 varies slowest),
///   - within one ion, internal level is major, Fock number minor:
///       local = level * (n_max + 1) + n
///   - global = sum_i local_i * local_dim^(ion_count - 1 - i)
/// Equivalently, full-space operators are kron(op_ion0, op_ion1, ...).
struct HilbertSpec {
  int ion_count = 2;
  int n_max = 4;
  int internal_levels = 2;

  void validate() const {
    if (ion_count < 1) throw ValidationError("HilbertSpec: ion_count must be >= 1");
    if (n_max < 1) throw ValidationError("HilbertSpec: n_max must be >= 1");
    if (internal_levels != 2 && internal_levels != 3) {
      throw ValidationError("HilbertSpec: internal_levels must be 2 or 3");
    }
    if (dimension() > (1 << 22)) {
      throw ValidationError("HilbertSpec: total dimension too large for dense simulation");
    }
  }

  int fock_dim() const { return n_max + 1; }
  int local_dim() const { return internal_levels * fock_dim(); }

  long dimension() const {
    long d = 1;
    for (int i = 0; i < ion_count; ++i) {
      d *= local_dim();
      if (d > (1L << 40)) throw ValidationError("HilbertSpec: dimension overflow");
    }
    return d;
  }

  int local_index(const IonLabel& l) const {
    if (l.level < 0 || l.level >= internal_levels) {
      throw ValidationError("HilbertSpec: internal level out of range");
    }
    if (l.n < 0 || l.n > n_max) throw ValidationError("HilbertSpec: Fock number out of range");
    return l.level * fock_dim() + l.n;
  }

  long basis_index(std::span<const IonLabel> labels) const {
    if (static_cast<int>(labels.size()) != ion_count) {
      throw ValidationError("HilbertSpec: label count must equal ion_count");
    }
    long idx = 0;
    for (const auto& l : labels) idx = idx * local_dim() + local_index(l);
    return idx;
  }

  std::vector<IonLabel> basis_label(long index) const {
    if (index < 0 || index >= dimension()) {
      throw ValidationError("HilbertSpec: basis index out of range");
    }
    std::vector<IonLabel> labels(ion_count);
    for (int i = ion_count - 1; i >= 0; --i) {
      const int local = static_cast<int>(index % local_dim());
      index /= local_dim();
      labels[i] = IonLabel{local / fock_dim(), local % fock_dim()};
    }
    return labels;
  }
};

namespace detail {

inline Eigen::MatrixXcd fock_annihilate(int n_max) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Eigen::MatrixXcd level_transfer(int levels, int to, int from) {
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(levels, levels);
  t(to, from) = 1.0;
  return t;
}

}  // namespace detail

/// Embeds a single-ion operator at `site`, identity elsewhere.
inline Operator site_operator(const HilbertSpec& spec, int site,
                              const Eigen::MatrixXcd& local) {
  spec.validate();
  if (site < 0 || site >= spec.ion_count) throw ValidationError("site_operator: site out of range");
  if (local.rows() != spec.local_dim() || local.cols() != spec.local_dim()) {
    throw ValidationError("site_operator: local operator has wrong dimension");
  }
  Operator out = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < spec.ion_count; ++i) {
    if (i == site) {
      out = kron(out, local);
    } else {
      out = kron(out, Eigen::MatrixXcd::Identity(spec.local_dim(), spec.local_dim()));
    }
  }
  return out;
}

/// a_site: lowers the Fock number, identity on internal levels.
inline Operator annihilation_op(const HilbertSpec& spec, int site) {
  return site_operator(
      spec, site,
      kron(Eigen::MatrixXcd::Identity(spec.internal_levels, spec.internal_levels),
           detail::fock_annihilate(spec.n_max)));
}

/// a_site^dagger. Truncation rule: maps |n_max> to the zero vector, so the
/// matrix stays the exact adjoint of annihilation_op.
inline Operator creation_op(const HilbertSpec& spec, int site) {
  return annihilation_op(spec, site).adjoint();
}

/// sigma^-_site = |down><up|, identity on Fock.
inline Operator spin_lower_op(const HilbertSpec& spec, int site) {
  return site_operator(
      spec, site,
      kron(detail::level_transfer(spec.internal_levels, static_cast<int>(Internal::Down),
                                  static_cast<int>(Internal::Up)),
           Eigen::MatrixXcd::Identity(spec.fock_dim(), spec.fock_dim())));
}

/// sigma^+_site = |up><down|, identity on Fock.
inline Operator spin_raise_op(const HilbertSpec& spec, int site) {
  return spin_lower_op(spec, site).adjoint();
}

/// |level><level| at site, identity on Fock.
inline Operator internal_projector(const HilbertSpec& spec, int site, Internal level) {
  const int l = static_cast<int>(level);
  if (l >= spec.internal_levels) throw ValidationError("internal_projector: level out of range");
  return site_operator(spec, site,
                       kron(detail::level_transfer(spec.internal_levels, l, l),
                            Eigen::MatrixXcd::Identity(spec.fock_dim(), spec.fock_dim())));
}

/// |n><n| at site, identity on internal levels.
inline Operator fock_projector(const HilbertSpec& spec, int site, int n) {
  if (n < 0 || n > spec.n_max) throw ValidationError("fock_projector: n out of range");
  return site_operator(
      spec, site,
      kron(Eigen::MatrixXcd::Identity(spec.internal_levels, spec.internal_levels),
           detail::level_transfer(spec.fock_dim(), n, n)));
}

/// a^dagger a at site.
inline Operator number_op(const HilbertSpec& spec, int site) {
  Eigen::MatrixXcd nloc = Eigen::MatrixXcd::Zero(spec.fock_dim(), spec.fock_dim());
  for (int n = 0; n <= spec.n_max; ++n) nloc(n, n) = n;
  return site_operator(
      spec, site,
      kron(Eigen::MatrixXcd::Identity(spec.internal_levels, spec.internal_levels), nloc));
}

/// |to><from| between two internal levels at site, identity on Fock.
/// Building block for carrier-type drives.
inline Operator internal_transfer_op(const HilbertSpec& spec, int site, Internal to,
                                     Internal from) {
  const int t = static_cast<int>(to), f = static_cast<int>(from);
  if (t >= spec.internal_levels || f >= spec.internal_levels) {
    throw ValidationError("internal_transfer_op: level out of range");
  }
  return site_operator(spec, site,
                       kron(detail::level_transfer(spec.internal_levels, t, f),
                            Eigen::MatrixXcd::Identity(spec.fock_dim(), spec.fock_dim())));
}

/// Unit-norm basis vector for a product of per-ion (level, n) labels.
inline StateVector product_state(const HilbertSpec& spec, std::span<const IonLabel> labels) {
  spec.validate();
  StateVector psi = StateVector::Zero(spec.dimension());
  psi[spec.basis_index(labels)] = 1.0;
  return psi;
}

inline StateVector product_state(const HilbertSpec& spec, std::initializer_list<IonLabel> labels) {
  return product_state(spec, std::span<const IonLabel>(labels.begin(), labels.size()));
}

/// Per-(internal, n) probability table for one ion: the diagonal of its
/// reduced density operator, shaped internal_levels x (n_max + 1).
inline Eigen::MatrixXd partial_populations(const HilbertSpec& spec, const StateVector& psi,
                                           int site) {
  if (psi.size() != spec.dimension()) throw ValidationError("partial_populations: bad dimension");
  if (site < 0 || site >= spec.ion_count) throw ValidationError("partial_populations: bad site");
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(spec.internal_levels, spec.fock_dim());
  long stride = 1;
  for (int i = spec.ion_count - 1; i > site; --i) stride *= spec.local_dim();
  for (long idx = 0; idx < psi.size(); ++idx) {
    const int local = static_cast<int>((idx / stride) % spec.local_dim());
    table(local / spec.fock_dim(), local % spec.fock_dim()) += std::norm(psi[idx]);
  }
  return table;
}

inline Eigen::MatrixXd partial_populations(const HilbertSpec& spec, const DensityOperator& rho,
                                           int site) {
  if (rho.rows() != spec.dimension() || rho.cols() != spec.dimension()) {
    throw ValidationError("partial_populations: bad dimension");
  }
  if (site < 0 || site >= spec.ion_count) throw ValidationError("partial_populations: bad site");
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(spec.internal_levels, spec.fock_dim());
  long stride = 1;
  for (int i = spec.ion_count - 1; i > site; --i) stride *= spec.local_dim();
  for (long idx = 0; idx < rho.rows(); ++idx) {
    const int local = static_cast<int>((idx / stride) % spec.local_dim());
    table(local / spec.fock_dim(), local % spec.fock_dim()) += rho(idx, idx).real();
  }
  return table;
}

/// Joint Fock-number distribution over all ions (internal levels traced out).
/// For two ions the result is indexed [n_ion0][n_ion1].
inline Eigen::MatrixXd joint_fock_distribution(const HilbertSpec& spec, const StateVector& psi) {
  if (spec.ion_count != 2) throw ValidationError("joint_fock_distribution: two-ion only");
  if (psi.size() != spec.dimension()) throw ValidationError("joint_fock_distribution: bad dim");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(spec.fock_dim(), spec.fock_dim());
  for (long idx = 0; idx < psi.size(); ++idx) {
    const int local0 = static_cast<int>(idx / spec.local_dim());
    const int local1 = static_cast<int>(idx % spec.local_dim());
    p(local0 % spec.fock_dim(), local1 % spec.fock_dim()) += std::norm(psi[idx]);
  }
  return p;
}

inline Eigen::MatrixXd joint_fock_distribution(const HilbertSpec& spec,
                                               const DensityOperator& rho) {
  if (spec.ion_count != 2) throw ValidationError("joint_fock_distribution: two-ion only");
  if (rho.rows() != spec.dimension()) throw ValidationError("joint_fock_distribution: bad dim");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(spec.fock_dim(), spec.fock_dim());
  for (long idx = 0; idx < rho.rows(); ++idx) {
    const int local0 = static_cast<int>(idx / spec.local_dim());
    const int local1 = static_cast<int>(idx % spec.local_dim());
    p(local0 % spec.fock_dim(), local1 % spec.fock_dim()) += rho(idx, idx).real();
  }
  return p;
}

namespace detail {

inline void embed_index_map(const HilbertSpec& from, const HilbertSpec& to,
                            std::vector<long>& map) {
  if (from.ion_count != to.ion_count || from.n_max != to.n_max ||
      from.internal_levels > to.internal_levels) {
    throw ValidationError("embed: target space must extend the internal ladder only");
  }
  map.resize(from.dimension());
  for (long idx = 0; idx < from.dimension(); ++idx) {
    const auto labels = from.basis_label(idx);
    map[idx] = to.basis_index(labels);
  }
}

}  // namespace detail

/// Embeds a state into a space with more internal levels (same ions, same
/// Fock cutoff); added levels start unpopulated.
inline StateVector embed_state(const HilbertSpec& from, const HilbertSpec& to,
                               const StateVector& psi) {
  std::vector<long> map;
  detail::embed_index_map(from, to, map);
  StateVector out = StateVector::Zero(to.dimension());
  for (long idx = 0; idx < psi.size(); ++idx) out[map[idx]] = psi[idx];
  return out;
}

inline DensityOperator embed_state(const HilbertSpec& from, const HilbertSpec& to,
                                   const DensityOperator& rho) {
  std::vector<long> map;
  detail::embed_index_map(from, to, map);
  DensityOperator out = DensityOperator::Zero(to.dimension(), to.dimension());
  for (long i = 0; i < rho.rows(); ++i) {
    for (long j = 0; j < rho.cols(); ++j) out(map[i], map[j]) = rho(i, j);
  }
  return out;
}

/// Max population sitting at the Fock cutoff level on any ion; the
/// truncation health figure reported by scenario runs.
inline double cutoff_population(const HilbertSpec& spec, const StateVector& psi) {
  double worst = 0.0;
  for (int ion = 0; ion < spec.ion_count; ++ion) {
    worst = std::max(worst, partial_populations(spec, psi, ion).col(spec.n_max).sum());
  }
  return worst;
}

inline double cutoff_population(const HilbertSpec& spec, const DensityOperator& rho) {
  double worst = 0.0;
  for (int ion = 0; ion < spec.ion_count; ++ion) {
    worst = std::max(worst, partial_populations(spec, rho, ion).col(spec.n_max).sum());
  }
  return worst;
}

}  // namespace phonsim
