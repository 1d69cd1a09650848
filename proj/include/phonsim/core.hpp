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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phonsim {

using Complex = std::complex<double>;

/// Dense complex linear map on a truncated Hilbert space.
using Operator = Eigen::MatrixXcd;
/// Pure state, unit norm.
using StateVector = Eigen::VectorXcd;
/// Mixed state, Hermitian, unit trace.
using DensityOperator = Eigen::MatrixXcd;

/// Bad input: dimensions, ranges, invariant violations. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: non-convergence, step underflow, truncation overflow. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Operator& a, double tol = 1e-12) {
  return a.rows() == a.cols() && max_abs(a - a.adjoint()) <= tol;
}

inline void require_hermitian(const Operator& a, double tol, const char* what) {
  if (!is_hermitian(a, tol)) {
    throw ValidationError(std::string(what) + ": operator is not Hermitian within tolerance");
  }
}

/// Kronecker product, row-major convention: index(i,j) = i*cols(b)+j.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace phonsim
