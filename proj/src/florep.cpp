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

#include "flo/florep.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace flo {
namespace florep {

namespace {

constexpr Real kStructureTol = 1e-9;
constexpr Real kSymplecticTol = 1e-8;
constexpr Real kPolarDegeneracyTol = 1e-10;
// Entries already below this magnitude need no elimination step.
constexpr Real kEliminationSkipTol = 1e-14;

void check_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InvalidInput(std::string(who) + ": matrix must be square, nonempty");
  }
}

}  // namespace

PassiveFlo make_passive(const ComplexMatrix& u) {
  check_square(u, "make_passive");
  const int n = static_cast<int>(u.rows());
  if ((u.adjoint() * u - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() >
      kStructureTol) {
    throw InvalidInput("make_passive: matrix is not unitary within 1e-9");
  }
  return PassiveFlo{u};
}

ActiveFlo make_active(const RealMatrix& q) {
  const int dim = static_cast<int>(q.rows());
  if (dim == 0 || q.cols() != dim || dim % 2 != 0) {
    throw InvalidInput("make_active: matrix must be 2n x 2n");
  }
  if ((q * q.transpose() - RealMatrix::Identity(dim, dim))
          .cwiseAbs()
          .maxCoeff() > kStructureTol) {
    throw InvalidInput("make_active: matrix is not orthogonal within 1e-9");
  }
  ActiveFlo result;
  result.Q = q;
  result.det_sign = (q.determinant() >= 0.0) ? 1 : -1;
  return result;
}

BogoliubovForm make_bogoliubov(const ComplexMatrix& alpha,
                               const ComplexMatrix& beta) {
  check_square(alpha, "make_bogoliubov");
  const int n = static_cast<int>(alpha.rows());
  if (beta.rows() != n || beta.cols() != n) {
    throw InvalidInput("make_bogoliubov: alpha/beta size mismatch");
  }
  ComplexMatrix block(2 * n, 2 * n);
  block.topLeftCorner(n, n) = alpha;
  block.topRightCorner(n, n) = beta.conjugate();
  block.bottomLeftCorner(n, n) = beta;
  block.bottomRightCorner(n, n) = alpha.conjugate();
  if ((block.adjoint() * block - ComplexMatrix::Identity(2 * n, 2 * n))
          .cwiseAbs()
          .maxCoeff() > kStructureTol) {
    throw InvalidInput("make_bogoliubov: block matrix is not unitary");
  }
  return BogoliubovForm{alpha, beta};
}

ComplexMatrix omega_matrix(int n) {
  if (n < 1) throw InvalidInput("omega_matrix: n must be >= 1");
  const Real inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ComplexMatrix omega = ComplexMatrix::Zero(2 * n, 2 * n);
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  omega.topLeftCorner(n, n) = inv_sqrt2 * eye;
  omega.topRightCorner(n, n) = Complex(0.0, inv_sqrt2) * eye;
  omega.bottomLeftCorner(n, n) = inv_sqrt2 * eye;
  omega.bottomRightCorner(n, n) = Complex(0.0, -inv_sqrt2) * eye;
  return omega;
}

RealMatrix symplectic_form(int n) {
  if (n < 1) throw InvalidInput("symplectic_form: n must be >= 1");
  RealMatrix j = RealMatrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = RealMatrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = -RealMatrix::Identity(n, n);
  return j;
}

ActiveFlo embed_passive(const PassiveFlo& p) {
  const int n = p.n();
  RealMatrix q(2 * n, 2 * n);
  q.topLeftCorner(n, n) = p.U.real();
  q.topRightCorner(n, n) = -p.U.imag();
  q.bottomLeftCorner(n, n) = p.U.imag();
  q.bottomRightCorner(n, n) = p.U.real();
  ActiveFlo result;
  result.Q = q;
  result.det_sign = 1;
  return result;
}

PassiveFlo extract_passive(const ActiveFlo& q) {
  const int n = q.n();
  const RealMatrix j = symplectic_form(n);
  if ((q.Q * j - j * q.Q).cwiseAbs().maxCoeff() > kSymplecticTol) {
    throw StructureError("extract_passive: rotation is not symplectic");
  }
  ComplexMatrix u = q.Q.topLeftCorner(n, n).cast<Complex>() +
                    Complex(0.0, 1.0) * q.Q.bottomLeftCorner(n, n).cast<Complex>();
  return PassiveFlo{u};
}

BogoliubovForm to_bogoliubov(const ActiveFlo& z) {
  const int n = z.n();
  const ComplexMatrix z11 = z.Q.topLeftCorner(n, n).cast<Complex>();
  const ComplexMatrix z12 = z.Q.topRightCorner(n, n).cast<Complex>();
  const ComplexMatrix z21 = z.Q.bottomLeftCorner(n, n).cast<Complex>();
  const ComplexMatrix z22 = z.Q.bottomRightCorner(n, n).cast<Complex>();
  const Complex img(0.0, 1.0);
  BogoliubovForm form;
  form.alpha = 0.5 * (z11 + z22 - img * (z12 - z21));
  form.beta = 0.5 * (z11 - z22 - img * (z12 + z21));
  return form;
}

ActiveFlo from_bogoliubov(const BogoliubovForm& form) {
  const int n = static_cast<int>(form.alpha.rows());
  ComplexMatrix block(2 * n, 2 * n);
  block.topLeftCorner(n, n) = form.alpha;
  block.topRightCorner(n, n) = form.beta.conjugate();
  block.bottomLeftCorner(n, n) = form.beta;
  block.bottomRightCorner(n, n) = form.alpha.conjugate();
  const ComplexMatrix omega = omega_matrix(n);
  const ComplexMatrix z = omega.adjoint() * block * omega;
  return make_active(z.real());
}

AlignmentResult passive_alignment(const ActiveFlo& q1, const ActiveFlo& q2) {
  const int n = q1.n();
  if (q2.n() != n) throw InvalidInput("passive_alignment: size mismatch");
  const ComplexMatrix omega = omega_matrix(n);
  const ComplexMatrix w = omega.conjugate() *
                          (q1.Q.transpose() * q2.Q).cast<Complex>() *
                          omega.transpose();
  const ComplexMatrix w11 = w.topLeftCorner(n, n);

  Eigen::JacobiSVD<ComplexMatrix> svd(w11,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(n - 1) < kPolarDegeneracyTol) {
    throw NumericalDegeneracy(
        "passive_alignment: polar factor of the ladder block is singular");
  }
  const ComplexMatrix z = svd.matrixU() * svd.matrixV().adjoint();

  AlignmentResult result;
  result.R = embed_passive(PassiveFlo{z.transpose()});
  result.gap = operator_norm(RealMatrix(q1.Q - q2.Q * result.R.Q));
  return result;
}

PassiveFlo dft_matrix(int n) {
  if (n < 1) throw InvalidInput("dft_matrix: n must be >= 1");
  ComplexMatrix f(n, n);
  const Real norm = 1.0 / std::sqrt(static_cast<Real>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      f(j, k) = norm * std::polar(1.0, 2.0 * kPi * j * k / n);
    }
  }
  return PassiveFlo{f};
}

RealMatrix gate_majorana_action(const Gate& gate, int n) {
  if (n < 1) throw InvalidInput("gate_majorana_action: n must be >= 1");
  RealMatrix m = RealMatrix::Identity(2 * n, 2 * n);
  const Real c = std::cos(gate.angle);
  const Real s = std::sin(gate.angle);
  switch (gate.kind) {
    case Gate::Kind::kMajoranaRotation: {
      if (gate.p < 0 || gate.q < 0 || gate.p >= 2 * n || gate.q >= 2 * n ||
          gate.p == gate.q) {
        throw InvalidInput("gate_majorana_action: bad Majorana indices");
      }
      m(gate.p, gate.p) = c;
      m(gate.p, gate.q) = -s;
      m(gate.q, gate.p) = s;
      m(gate.q, gate.q) = c;
      break;
    }
    case Gate::Kind::kModePhase: {
      if (gate.q < 0 || gate.q >= n) {
        throw InvalidInput("gate_majorana_action: bad mode index");
      }
      // exp(-i alpha n_q) rotates the (q, q+n) Majorana plane by -alpha.
      m(gate.q, gate.q) = c;
      m(gate.q, gate.q + n) = s;
      m(gate.q + n, gate.q) = -s;
      m(gate.q + n, gate.q + n) = c;
      break;
    }
    case Gate::Kind::kPassiveGivens: {
      if (gate.q < 0 || gate.q + 1 >= n) {
        throw InvalidInput("gate_majorana_action: Givens needs adjacent modes");
      }
      // Same plane rotation on both Majorana species.
      for (int offset : {0, n}) {
        const int a = gate.q + offset;
        const int b = gate.q + 1 + offset;
        m(a, a) = c;
        m(a, b) = -s;
        m(b, a) = s;
        m(b, b) = c;
      }
      break;
    }
    case Gate::Kind::kReflection: {
      m = -RealMatrix::Identity(2 * n, 2 * n);
      m(0, 0) = 1.0;
      break;
    }
  }
  return m;
}

ActiveFlo recompose_gates(const GateList& gates, int n) {
  RealMatrix q = RealMatrix::Identity(2 * n, 2 * n);
  for (const Gate& gate : gates) {
    q = gate_majorana_action(gate, n) * q;
  }
  return make_active(q);
}

GateList compile_to_gates(const PassiveFlo& p) {
  const int n = p.n();
  ComplexMatrix m = p.U;
  // Eliminations E_1, ..., E_L with E_L ... E_1 U = I; the returned list is
  // their inverses in reverse, so the recomposition reproduces U.
  GateList eliminations;

  for (int j = 0; j < n - 1; ++j) {
    for (int i = n - 1; i > j; --i) {
      const Complex x = m(i - 1, j);
      const Complex y = m(i, j);
      if (std::abs(y) <= kEliminationSkipTol) continue;
      // Align the phase of row i with row i-1, then rotate the pair.
      const Real phi = std::arg(x) - std::arg(y);
      if (std::abs(phi) > 0.0) {
        Gate phase;
        phase.kind = Gate::Kind::kModePhase;
        phase.q = i;
        phase.angle = -phi;
        m.row(i) *= std::polar(1.0, phi);
        eliminations.push_back(phase);
      }
      Gate givens;
      givens.kind = Gate::Kind::kPassiveGivens;
      givens.q = i - 1;
      givens.angle = std::atan2(-std::abs(y), std::abs(x));
      const Real c = std::cos(givens.angle);
      const Real s = std::sin(givens.angle);
      const Eigen::RowVectorXcd top = m.row(i - 1);
      const Eigen::RowVectorXcd bot = m.row(i);
      m.row(i - 1) = c * top - s * bot;
      m.row(i) = s * top + c * bot;
      eliminations.push_back(givens);
    }
  }
  // Remaining diagonal phases.
  for (int k = 0; k < n; ++k) {
    const Real delta = std::arg(m(k, k));
    if (std::abs(delta) <= kEliminationSkipTol) continue;
    Gate phase;
    phase.kind = Gate::Kind::kModePhase;
    phase.q = k;
    phase.angle = delta;
    m.row(k) *= std::polar(1.0, -delta);
    eliminations.push_back(phase);
  }

  GateList gates;
  gates.reserve(eliminations.size());
  for (auto it = eliminations.rbegin(); it != eliminations.rend(); ++it) {
    Gate inverse = *it;
    inverse.angle = -inverse.angle;
    gates.push_back(inverse);
  }
  return gates;
}

GateList compile_to_gates(const ActiveFlo& q) {
  const int n = q.n();
  const int dim = 2 * n;
  RealMatrix m = q.Q;

  const bool needs_reflection = (q.det_sign < 0);
  if (needs_reflection) {
    // Split off gamma_1: its Majorana action X = diag(1, -1, ..., -1) squares
    // to I, so Q = X (X Q) with X Q in SO(2n).
    m = -m;
    m.row(0) = -m.row(0);
  }

  GateList eliminations;
  for (int j = 0; j < dim - 1; ++j) {
    for (int i = dim - 1; i > j; --i) {
      const Real x = m(i - 1, j);
      const Real y = m(i, j);
      const Real r = std::hypot(x, y);
      if (std::abs(y) <= kEliminationSkipTol || r <= kEliminationSkipTol) {
        continue;
      }
      Gate rot;
      rot.kind = Gate::Kind::kMajoranaRotation;
      rot.p = i - 1;
      rot.q = i;
      rot.angle = std::atan2(-y / r, x / r);
      const Real c = std::cos(rot.angle);
      const Real s = std::sin(rot.angle);
      const Eigen::RowVectorXd top = m.row(i - 1);
      const Eigen::RowVectorXd bot = m.row(i);
      m.row(i - 1) = c * top - s * bot;
      m.row(i) = s * top + c * bot;
      eliminations.push_back(rot);
    }
  }
  // The residue is diag(+-1) with an even number of -1 entries (det = +1);
  // clear them pairwise with angle-pi rotations.
  std::vector<int> negatives;
  for (int k = 0; k < dim; ++k) {
    if (m(k, k) < 0.0) negatives.push_back(k);
  }
  for (std::size_t z = 0; z + 1 < negatives.size(); z += 2) {
    Gate rot;
    rot.kind = Gate::Kind::kMajoranaRotation;
    rot.p = negatives[z];
    rot.q = negatives[z + 1];
    rot.angle = kPi;
    eliminations.push_back(rot);
  }

  GateList gates;
  gates.reserve(eliminations.size() + 1);
  for (auto it = eliminations.rbegin(); it != eliminations.rend(); ++it) {
    Gate inverse = *it;
    inverse.angle = -inverse.angle;
    gates.push_back(inverse);
  }
  if (needs_reflection) {
    Gate reflection;
    reflection.kind = Gate::Kind::kReflection;
    gates.push_back(reflection);
  }
  return gates;
}

}  // namespace florep
}  // namespace flo
