// Copyright 2026 The flolearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLO_COMMON_HPP_
#define FLO_COMMON_HPP_

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace flo {

using Real = double;
using Complex = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Real kPi = 3.14159265358979323846;

// Base class for all library errors so callers can catch broadly.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A caller-supplied argument is malformed (wrong size, out of range, ...).
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(what) {}
};

// Input fails a structural requirement (e.g. a rotation that is not passive).
class StructureError : public Error {
 public:
  explicit StructureError(const std::string& what) : Error(what) {}
};

// A documented mathematical precondition does not hold (e.g. matrix root with
// an eigenvalue on the branch cut). Signals a contract breach upstream.
class PreconditionViolation : public Error {
 public:
  explicit PreconditionViolation(const std::string& what) : Error(what) {}
};

// Computation hit a degeneracy that makes the answer ill-defined (singular
// alignment factor, conditioning that broke state purity, ...).
class NumericalDegeneracy : public Error {
 public:
  explicit NumericalDegeneracy(const std::string& what) : Error(what) {}
};

// A configured resource ceiling was exceeded (dense simulation size, ...).
class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& what) : Error(what) {}
};

// Operator (spectral) norm of a complex or real matrix.
inline Real operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

inline Real operator_norm(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

}  // namespace flo

#endif  // FLO_COMMON_HPP_
