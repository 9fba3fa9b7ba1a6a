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
// Dense Fock-space oracle. Represents states by their full 2^n amplitude
// vector under the Jordan-Wigner encoding (mode 1 = most significant bit,
// gamma_j = X_j Z_{<j}, gamma_{j+n} = Y_j Z_{<j}) and evaluates everything
// by direct operator application. Slow and exact; every fast path in the
// library is tested against it.
//
// The projective phase of Phi(Q) is fixed canonically: Phi is DEFINED as the
// product of the gates emitted by florep::compile_to_gates in its
// deterministic order.

#ifndef FLO_FORACLE_HPP_
#define FLO_FORACLE_HPP_

#include <vector>

#include "flo/common.hpp"
#include "flo/florep.hpp"

namespace flo {
namespace foracle {

// Default mode-count ceiling for dense work (2^10 amplitudes plus headroom
// for an ancilla).
inline constexpr int kDefaultModeCap = 10;

struct DenseState {
  int n = 0;
  ComplexVector amplitudes;
};

// The four two-point correlation tables of rotated modes b_j = Phi^dag a_j
// Phi in a reference state: entries (j, k) hold <b_j^dag b_k>,
// <b_j^dag b_k^dag>, <b_j b_k^dag>, <b_j b_k>.
struct TwoPointTable {
  ComplexMatrix bdag_b;
  ComplexMatrix bdag_bdag;
  ComplexMatrix b_bdag;
  ComplexMatrix b_b;
};

struct ExactQuantities {
  RealVector fock_probabilities;  // length 2^n
  ComplexMatrix rdm;              // <a_j^dag a_k>
  RealMatrix covariance;          // -(i/2) <[gamma_p, gamma_q]>
  Real num_mean = 0.0;            // <Num>
  Real num_second_moment = 0.0;   // <Num^2>
};

struct MomentBounds {
  Real num1 = 0.0;    // <Num> via Wick sums
  Real num2 = 0.0;    // <Num^2> via Wick sums
  Real bound1 = 0.0;  // 1 + ||beta||_F^2
  Real bound2 = 0.0;  // 2 + 7 ||beta||_F^2 + ||beta||_F^4
};

// Validating constructors.
DenseState make_dense(int n, const ComplexVector& amplitudes);
DenseState dense_fock_state(const std::vector<int>& bits);

Complex inner_product(const DenseState& lhs, const DenseState& rhs);

// |psi> -> gamma_p |psi| for a single Majorana operator (0-based index
// p < 2n).
DenseState apply_majorana(const DenseState& s, int p);

// Applies a compiled gate sequence exactly. Throws CapExceeded when the mode
// count exceeds the cap.
DenseState dense_apply(const florep::GateList& gates, const DenseState& s,
                       int cap = kDefaultModeCap);

// Canonical dense representative of Phi(Q) applied to a state / assembled as
// a full 2^n x 2^n matrix.
DenseState dense_apply_flo(const florep::ActiveFlo& q, const DenseState& s,
                           int cap = kDefaultModeCap);
ComplexMatrix dense_unitary(const florep::ActiveFlo& q,
                            int cap = kDefaultModeCap);

ExactQuantities exact_quantities(const DenseState& s);

// Two-point tables of b_j = Phi(Z)^dag a_j Phi(Z) in the Slater state with
// 1-RDM C (a projector), evaluated by Wick closed forms through the
// Bogoliubov blocks of Z.
TwoPointTable wick_two_point(const florep::ActiveFlo& z,
                             const ComplexMatrix& c_slater);

// <b_j^dag b_j b_k^dag b_k> from the three-term Wick expansion.
Complex wick_four_point(const TwoPointTable& table, int j, int k);

// First and second moments of the particle number in Phi(Z)|phi> for a
// single-particle orbital phi, together with their closed-form bounds.
MomentBounds moment_bounds_check(const florep::ActiveFlo& z,
                                 const ComplexVector& orbital);

// sqrt(1 - |<psi|phi>|^2).
Real trace_distance(const DenseState& s1, const DenseState& s2);

// Worst-case output trace distance between Phi(Q1) and Phi(Q2), computed
// from the distance of the origin to the convex hull of the eigenvalues of
// the relative unitary. Invariant under a global phase on either argument.
Real diamond_distance(const florep::ActiveFlo& q1, const florep::ActiveFlo& q2,
                      int cap = kDefaultModeCap);

}  // namespace foracle
}  // namespace flo

#endif  // FLO_FORACLE_HPP_
