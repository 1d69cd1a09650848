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
#include <limits>

#include "phonsim/core.hpp"

namespace phonsim {

struct SimplexLsqResult {
  Eigen::VectorXd p;
  double residual = 0.0;  // ||A p - y||_2
};

/// Least squares constrained to the probability simplex:
///   min ||A p - y||  s.t.  p >= 0, sum(p) = 1.
/// Solved exactly by enumerating candidate supports (active-set elimination):
/// for every support the sum constraint is eliminated and the reduced
/// unconstrained problem solved; the best feasible candidate is the global
/// optimum of this convex problem. Intended for small n (Fock populations).
inline SimplexLsqResult simplex_constrained_lsq(const Eigen::MatrixXd& a,
                                                const Eigen::VectorXd& y) {
  const int n = static_cast<int>(a.cols());
  if (n < 1 || n > 16) throw ValidationError("simplex_constrained_lsq: 1..16 unknowns");
  if (a.rows() != y.size()) throw ValidationError("simplex_constrained_lsq: shape mismatch");

  SimplexLsqResult best;
  best.residual = std::numeric_limits<double>::infinity();

  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> support;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) support.push_back(i);
    }
    const int m = static_cast<int>(support.size());

    Eigen::VectorXd ps(m);
    if (m == 1) {
      ps[0] = 1.0;
    } else {
      // p = p_bar + N z with p_bar uniform and N spanning {z : sum z = 0}.
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m, m - 1);
      for (int j = 0; j < m - 1; ++j) {
        basis(j, j) = 1.0;
        basis(m - 1, j) = -1.0;
      }
      Eigen::MatrixXd as(a.rows(), m);
      for (int j = 0; j < m; ++j) as.col(j) = a.col(support[j]);
      const Eigen::VectorXd pbar = Eigen::VectorXd::Constant(m, 1.0 / m);
      const Eigen::MatrixXd an = as * basis;
      const Eigen::VectorXd rhs = y - as * pbar;
      const Eigen::VectorXd z = an.colPivHouseholderQr().solve(rhs);
      ps = pbar + basis * z;
    }

    bool feasible = true;
    for (int j = 0; j < m; ++j) {
      if (ps[j] < -1e-10) feasible = false;
    }
    if (!feasible) continue;

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < m; ++j) p[support[j]] = std::max(ps[j], 0.0);
    p /= p.sum();
    const double r = (a * p - y).norm();
    if (r < best.residual) {
      best.residual = r;
      best.p = p;
    }
  }
  return best;
}

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
};

/// Plain Nelder-Mead downhill simplex, for the low-dimensional outer fits.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                    int max_iter = 400, double ftol = 1e-12) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  int evals = 0;
  for (int i = 1; i <= n; ++i) xs[i][i - 1] += step[i - 1];
  for (int i = 0; i <= n; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<int> order(n + 1);
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(n + 1);
    std::vector<double> fs2(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs2[i] = xs[order[i]];
      fs2[i] = fs[order[i]];
    }
    xs = std::move(xs2);
    fs = std::move(fs2);

    if (std::abs(fs[n] - fs[0]) <= ftol * (std::abs(fs[0]) + ftol)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[i];
    centroid /= n;

    auto eval = [&](const Eigen::VectorXd& x) {
      ++evals;
      return f(x);
    };

    const Eigen::VectorXd xr = centroid + (centroid - xs[n]);
    const double fr = eval(xr);
    if (fr < fs[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[n]);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (xs[n] - centroid);
      const double fc = eval(xc);
      if (fc < fs[n]) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }

  std::vector<int> order(n + 1);
  for (int i = 0; i <= n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  return {xs[order[0]], fs[order[0]], evals};
}

}  // namespace phonsim
