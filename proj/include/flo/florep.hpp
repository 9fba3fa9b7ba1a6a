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
//
// One-body representations of fermionic linear optics (FLO):
//
//   PassiveFlo    U in U(n), particle-number conserving,
//                 Phi_pas(U)^dag a_j Phi_pas(U) = sum_k U_jk a_k.
//   ActiveFlo     Q in O(2n) acting on Majorana operators,
//                 Phi(Q)^dag gamma_p Phi(Q) = sum_q Q_pq gamma_q.
//   Bogoliubov    (alpha, beta) ladder-basis blocks of an active rotation.
//
// Majorana convention: gamma_j = a_j + a_j^dag and
// gamma_{j+n} = -i (a_j - a_j^dag), with gamma^2 = I. Indices in code are
// 0-based: mode j in [0, n), its second Majorana at j + n.

#ifndef FLO_FLOREP_HPP_
#define FLO_FLOREP_HPP_

#include <vector>

#include "flo/common.hpp"

namespace flo {
namespace florep {

// Particle-number-conserving FLO, represented by its one-body unitary.
struct PassiveFlo {
  ComplexMatrix U;
  int n() const { return static_cast<int>(U.rows()); }
};

// General FLO, represented by its orthogonal one-body Majorana action.
// det_sign caches sign(det Q): +1 for the even (SO) component.
struct ActiveFlo {
  RealMatrix Q;
  int det_sign = 1;
  int n() const { return static_cast<int>(Q.rows()) / 2; }
};

// Ladder-basis blocks: Phi^dag a_j Phi = sum_k alpha_jk a_k + beta*_jk a_k^dag
// with [[alpha, beta*], [beta, alpha*]] unitary.
struct BogoliubovForm {
  ComplexMatrix alpha;
  ComplexMatrix beta;
};

// Elementary gates. Angles are radians; indices 0-based.
//   kPassiveGivens   exp(-theta (a_q^dag a_{q+1} - a_{q+1}^dag a_q)),
//                    stored index = q (acts on adjacent modes q, q+1).
//   kMajoranaRotation exp(-(theta/2) gamma_p gamma_q), indices (p, q).
//   kModePhase       exp(-i alpha a_q^dag a_q), index q, angle alpha.
//   kReflection      gamma_1 (first Majorana), no parameters.
struct Gate {
  enum class Kind { kPassiveGivens, kMajoranaRotation, kModePhase, kReflection };
  Kind kind = Kind::kMajoranaRotation;
  int p = 0;
  int q = 0;
  Real angle = 0.0;
};

using GateList = std::vector<Gate>;

// Validating factories. Both throw InvalidInput when the matrix fails the
// structural tolerance (1e-9) or has inconsistent dimensions.
PassiveFlo make_passive(const ComplexMatrix& u);
ActiveFlo make_active(const RealMatrix& q);
BogoliubovForm make_bogoliubov(const ComplexMatrix& alpha,
                               const ComplexMatrix& beta);

// The ladder <-> Majorana basis change Omega = (1/sqrt 2) [[I, iI], [I, -iI]]
// (2n x 2n). Single builder so the convention cannot drift.
ComplexMatrix omega_matrix(int n);

// The standard symplectic form J = [[0, I], [-I, 0]], which is also the
// covariance matrix of the vacuum.
RealMatrix symplectic_form(int n);

// Q = [[Re U, -Im U], [Im U, Re U]] in SO(2n).
ActiveFlo embed_passive(const PassiveFlo& p);

// Inverse of embed_passive on the symplectic subgroup. Throws StructureError
// when Q fails to commute with J within 1e-8.
PassiveFlo extract_passive(const ActiveFlo& q);

// Closed-form blocks alpha = (Z11 + Z22 - i(Z12 - Z21))/2,
// beta = (Z11 - Z22 - i(Z12 + Z21))/2 of [[alpha, beta*],[beta, alpha*]] =
// Omega Z Omega^dag.
BogoliubovForm to_bogoliubov(const ActiveFlo& z);

// Inverse conversion: Z = Re(Omega^dag [[alpha, beta*],[beta, alpha*]] Omega).
ActiveFlo from_bogoliubov(const BogoliubovForm& form);

// Best symplectic right-factor aligning Q2 to Q1, computed from the left
// polar decomposition of the top-left ladder block of Q1^T Q2. The gap
// ‖Q1 - Q2 R‖ is bounded by the covariance distance ‖Q1 J Q1^T - Q2 J Q2^T‖.
struct AlignmentResult {
  ActiveFlo R;
  Real gap = 0.0;
};
AlignmentResult passive_alignment(const ActiveFlo& q1, const ActiveFlo& q2);

// F_jk = exp(2 pi i j k / n) / sqrt(n) (0-based j, k).
PassiveFlo dft_matrix(int n);

// One-body Majorana action of a single gate on n modes (2n x 2n orthogonal).
RealMatrix gate_majorana_action(const Gate& gate, int n);

// Product of the gates' one-body actions, last gate leftmost: a list
// (g_1, ..., g_L) applied in order implements Q = M(g_L) ... M(g_1).
ActiveFlo recompose_gates(const GateList& gates, int n);

// Givens-style decomposition into elementary gates. The passive overload
// emits adjacent-mode Givens rotations and mode phases; the active overload
// emits Majorana-pair rotations, with a det = -1 input split off as a single
// trailing reflection. Gate count is at most (2n choose 2) + n + 1 (active)
// or n^2 (passive); identity inputs give an empty list.
GateList compile_to_gates(const PassiveFlo& p);
GateList compile_to_gates(const ActiveFlo& q);

}  // namespace florep
}  // namespace flo

#endif  // FLO_FLOREP_HPP_
