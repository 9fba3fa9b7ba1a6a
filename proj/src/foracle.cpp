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

#include "flo/foracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace flo {
namespace foracle {

namespace {

constexpr Real kNormTol = 1e-10;

// Bit position (from the least significant end) of 0-based mode j.
inline int bit_of_mode(int j, int n) { return n - 1 - j; }

inline int occupation(std::size_t basis, int j, int n) {
  return static_cast<int>((basis >> bit_of_mode(j, n)) & 1u);
}

// Parity of the modes strictly before mode j (the Jordan-Wigner string).
inline int string_parity(std::size_t basis, int j, int n) {
  // Modes 0..j-1 occupy the bits above bit_of_mode(j, n).
  const std::size_t mask = ~((std::size_t{1} << (bit_of_mode(j, n) + 1)) - 1);
  return static_cast<int>(std::popcount(basis & mask) & 1u);
}

void check_cap(int n, int cap, const char* who) {
  if (n > cap) {
    throw CapExceeded(std::string(who) + ": mode count exceeds the dense cap");
  }
}

// In-place gamma_j (x-type, p < n) or gamma_{j+n} (y-type) application.
void apply_majorana_inplace(ComplexVector& amp, int p, int n) {
  const bool y_type = (p >= n);
  const int mode = y_type ? p - n : p;
  const std::size_t dim = static_cast<std::size_t>(amp.size());
  const std::size_t mask = std::size_t{1} << bit_of_mode(mode, n);
  ComplexVector out(amp.size());
  for (std::size_t i = 0; i < dim; ++i) {
    const Real sign = string_parity(i, mode, n) ? -1.0 : 1.0;
    if (!y_type) {
      out[i ^ mask] = sign * amp[i];
    } else {
      // Y|0> = i|1>, Y|1> = -i|0>.
      const Complex factor =
          (i & mask) ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
      out[i ^ mask] = sign * factor * amp[i];
    }
  }
  amp.swap(out);
}

void apply_gate_inplace(ComplexVector& amp, const florep::Gate& gate, int n) {
  const std::size_t dim = static_cast<std::size_t>(amp.size());
  switch (gate.kind) {
    case florep::Gate::Kind::kModePhase: {
      const Complex phase = std::polar(1.0, -gate.angle);
      const std::size_t mask = std::size_t{1} << bit_of_mode(gate.q, n);
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & mask) amp[i] *= phase;
      }
      break;
    }
    case florep::Gate::Kind::kPassiveGivens: {
      // Mixes |01> and |10> on the adjacent pair (q, q+1); the Jordan-Wigner
      // strings cancel for neighbors.
      const Real c = std::cos(gate.angle);
      const Real s = std::sin(gate.angle);
      const std::size_t hi = std::size_t{1} << bit_of_mode(gate.q, n);
      const std::size_t lo = std::size_t{1} << bit_of_mode(gate.q + 1, n);
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & hi) || !(i & lo)) continue;  // visit each |01> once
        const std::size_t i01 = i;            // mode q empty, q+1 occupied
        const std::size_t i10 = (i ^ lo) | hi;
        const Complex a01 = amp[i01];
        const Complex a10 = amp[i10];
        amp[i01] = c * a01 + s * a10;
        amp[i10] = -s * a01 + c * a10;
      }
      break;
    }
    case florep::Gate::Kind::kMajoranaRotation: {
      // exp(-(theta/2) g_p g_q) = cos(theta/2) - sin(theta/2) g_p g_q.
      ComplexVector rotated = amp;
      apply_majorana_inplace(rotated, gate.q, n);
      apply_majorana_inplace(rotated, gate.p, n);
      const Real c = std::cos(0.5 * gate.angle);
      const Real s = std::sin(0.5 * gate.angle);
      for (std::size_t i = 0; i < dim; ++i) {
        amp[i] = c * amp[i] - s * rotated[i];
      }
      break;
    }
    case florep::Gate::Kind::kReflection: {
      apply_majorana_inplace(amp, 0, n);
      break;
    }
  }
}

}  // namespace

DenseState make_dense(int n, const ComplexVector& amplitudes) {
  if (n < 1) throw InvalidInput("make_dense: n must be >= 1");
  if (amplitudes.size() != (Eigen::Index{1} << n)) {
    throw InvalidInput("make_dense: amplitude count must be 2^n");
  }
  if (std::abs(amplitudes.norm() - 1.0) > kNormTol) {
    throw InvalidInput("make_dense: state is not normalized");
  }
  return DenseState{n, amplitudes};
}

DenseState dense_fock_state(const std::vector<int>& bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1) throw InvalidInput("dense_fock_state: empty bitstring");
  std::size_t index = 0;
  for (int j = 0; j < n; ++j) {
    if (bits[j] != 0 && bits[j] != 1) {
      throw InvalidInput("dense_fock_state: bits must be 0 or 1");
    }
    if (bits[j]) index |= std::size_t{1} << bit_of_mode(j, n);
  }
  ComplexVector amp = ComplexVector::Zero(Eigen::Index{1} << n);
  amp[static_cast<Eigen::Index>(index)] = 1.0;
  return DenseState{n, amp};
}

Complex inner_product(const DenseState& lhs, const DenseState& rhs) {
  if (lhs.n != rhs.n) throw InvalidInput("inner_product: size mismatch");
  return lhs.amplitudes.dot(rhs.amplitudes);
}

DenseState apply_majorana(const DenseState& s, int p) {
  if (p < 0 || p >= 2 * s.n) {
    throw InvalidInput("apply_majorana: index out of range");
  }
  DenseState out = s;
  apply_majorana_inplace(out.amplitudes, p, s.n);
  return out;
}

DenseState dense_apply(const florep::GateList& gates, const DenseState& s,
                       int cap) {
  check_cap(s.n, cap, "dense_apply");
  DenseState out = s;
  for (const florep::Gate& gate : gates) {
    apply_gate_inplace(out.amplitudes, gate, s.n);
  }
  return out;
}

DenseState dense_apply_flo(const florep::ActiveFlo& q, const DenseState& s,
                           int cap) {
  if (q.n() != s.n) throw InvalidInput("dense_apply_flo: dimension mismatch");
  return dense_apply(florep::compile_to_gates(q), s, cap);
}

ComplexMatrix dense_unitary(const florep::ActiveFlo& q, int cap) {
  const int n = q.n();
  check_cap(n, cap, "dense_unitary");
  const florep::GateList gates = florep::compile_to_gates(q);
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix u(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    ComplexVector amp = ComplexVector::Zero(dim);
    amp[col] = 1.0;
    for (const florep::Gate& gate : gates) {
      apply_gate_inplace(amp, gate, n);
    }
    u.col(col) = amp;
  }
  return u;
}

ExactQuantities exact_quantities(const DenseState& s) {
  const int n = s.n;
  const std::size_t dim = static_cast<std::size_t>(s.amplitudes.size());
  ExactQuantities out;

  out.fock_probabilities = s.amplitudes.cwiseAbs2();

  Real num1 = 0.0;
  Real num2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const Real p = std::norm(s.amplitudes[static_cast<Eigen::Index>(i)]);
    const Real count = static_cast<Real>(std::popcount(i));
    num1 += p * count;
    num2 += p * count * count;
  }
  out.num_mean = num1;
  out.num_second_moment = num2;

  // Cache gamma_p |psi> for all p; then <gamma_p gamma_q> = <v_p | v_q>.
  std::vector<ComplexVector> majorana_images(2 * n);
  for (int p = 0; p < 2 * n; ++p) {
    ComplexVector v = s.amplitudes;
    apply_majorana_inplace(v, p, n);
    majorana_images[p] = std::move(v);
  }
  RealMatrix gamma = RealMatrix::Zero(2 * n, 2 * n);
  for (int p = 0; p < 2 * n; ++p) {
    for (int q = p + 1; q < 2 * n; ++q) {
      const Complex pq = majorana_images[p].dot(majorana_images[q]);
      const Real entry = (Complex(0.0, -1.0) * pq).real();
      gamma(p, q) = entry;
      gamma(q, p) = -entry;
    }
  }
  out.covariance = gamma;

  // a_j = (gamma_j + i gamma_{j+n}) / 2, so D_jk = <a_j psi | a_k psi>.
  std::vector<ComplexVector> lowered(n);
  for (int j = 0; j < n; ++j) {
    lowered[j] = 0.5 * (majorana_images[j] +
                        Complex(0.0, 1.0) * majorana_images[j + n]);
  }
  ComplexMatrix rdm(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      rdm(j, k) = lowered[j].dot(lowered[k]);
    }
  }
  out.rdm = 0.5 * (rdm + rdm.adjoint()).eval();
  return out;
}

TwoPointTable wick_two_point(const florep::ActiveFlo& z,
                             const ComplexMatrix& c_slater) {
  const int n = z.n();
  if (c_slater.rows() != n || c_slater.cols() != n) {
    throw InvalidInput("wick_two_point: reference RDM size mismatch");
  }
  const florep::BogoliubovForm form = florep::to_bogoliubov(z);
  const ComplexMatrix& alpha = form.alpha;
  const ComplexMatrix& beta = form.beta;
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  const ComplexMatrix& c = c_slater;

  TwoPointTable table;
  table.bdag_b = alpha.conjugate() * c * alpha.transpose() +
                 beta * (eye - c.transpose()) * beta.adjoint();
  table.bdag_bdag = alpha.conjugate() * c * beta.transpose() +
                    beta * (eye - c.transpose()) * alpha.adjoint();
  table.b_bdag = eye - alpha * c.transpose() * alpha.adjoint() -
                 beta.conjugate() * (eye - c) * beta.transpose();
  table.b_b = beta.conjugate() * c * alpha.transpose() +
              alpha * (eye - c.transpose()) * beta.adjoint();
  return table;
}

Complex wick_four_point(const TwoPointTable& table, int j, int k) {
  const int n = static_cast<int>(table.bdag_b.rows());
  if (j < 0 || k < 0 || j >= n || k >= n) {
    throw InvalidInput("wick_four_point: index out of range");
  }
  return table.bdag_b(j, j) * table.bdag_b(k, k) -
         table.bdag_bdag(j, k) * table.b_b(j, k) +
         table.bdag_b(j, k) * table.b_bdag(j, k);
}

MomentBounds moment_bounds_check(const florep::ActiveFlo& z,
                                 const ComplexVector& orbital) {
  const int n = z.n();
  if (orbital.size() != n) {
    throw InvalidInput("moment_bounds_check: orbital size mismatch");
  }
  if (std::abs(orbital.norm() - 1.0) > 1e-9) {
    throw InvalidInput("moment_bounds_check: orbital must be normalized");
  }
  // 1-RDM of the single-particle state sum_j u_j a_j^dag |vac>.
  const ComplexMatrix c = orbital.conjugate() * orbital.transpose();
  const TwoPointTable table = wick_two_point(z, c);

  MomentBounds out;
  out.num1 = table.bdag_b.trace().real();
  Complex num2(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      num2 += wick_four_point(table, j, k);
    }
  }
  out.num2 = num2.real();

  const Real beta_sq = florep::to_bogoliubov(z).beta.squaredNorm();
  out.bound1 = 1.0 + beta_sq;
  out.bound2 = 2.0 + 7.0 * beta_sq + beta_sq * beta_sq;
  return out;
}

Real trace_distance(const DenseState& s1, const DenseState& s2) {
  const Real overlap_sq = std::norm(inner_product(s1, s2));
  return std::sqrt(std::max(0.0, 1.0 - overlap_sq));
}

Real diamond_distance(const florep::ActiveFlo& q1, const florep::ActiveFlo& q2,
                      int cap) {
  const int n = q1.n();
  if (q2.n() != n) throw InvalidInput("diamond_distance: size mismatch");
  check_cap(n, cap, "diamond_distance");
  if ((q1.Q - q2.Q).cwiseAbs().maxCoeff() == 0.0) return 0.0;

  const ComplexMatrix relative =
      dense_unitary(q1, cap).adjoint() * dense_unitary(q2, cap);
  Eigen::ComplexEigenSolver<ComplexMatrix> eig(relative, false);
  const ComplexVector lambda = eig.eigenvalues();

  // Distance from the origin to the convex hull of unit-circle points: zero
  // unless some arc of length > pi is empty, in which case it is the
  // distance to the chord closing the occupied arc, -cos(gap / 2).
  std::vector<Real> angles(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    angles[static_cast<std::size_t>(i)] = std::arg(lambda(i));
  }
  std::sort(angles.begin(), angles.end());
  Real largest_gap = 2.0 * kPi - (angles.back() - angles.front());
  for (std::size_t i = 1; i < angles.size(); ++i) {
    largest_gap = std::max(largest_gap, angles[i] - angles[i - 1]);
  }
  const Real hull_distance = std::max(0.0, -std::cos(0.5 * largest_gap));
  const Real value = std::sqrt(std::max(0.0, 1.0 - hull_distance * hull_distance));
  return std::min(1.0, value);
}

}  // namespace foracle
}  // namespace flo
