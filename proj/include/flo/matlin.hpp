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
// Matrix primitives: Haar sampling, the skew-symmetric normal form, rounding
// of nearly-structured matrices, principal matrix roots, and the projective
// distance between unitaries.

#ifndef FLO_MATLIN_HPP_
#define FLO_MATLIN_HPP_

#include "flo/common.hpp"
#include "flo/rng.hpp"

namespace flo {
namespace matlin {

// Shared numerical tolerances. Structural input checks sit at 1e-10..1e-9,
// reconstructions at 1e-9; all knobs live here so tests can pin them.
struct Tolerances {
  Real skew_input = 1e-10;        // ‖A + Aᵀ‖ bound for normal-form input
  Real reconstruction = 1e-9;     // relative residual of reassembled forms
  Real root_branch_gap = 1e-6;    // eigenvalue-argument distance from ±π
  Real imag_truncation = 1e-10;   // allowed imaginary residue on real roots
  Real phase_distance_abs = 1e-7; // absolute accuracy of phase_distance
  Real degeneracy = 1e-12;        // generic "too close to singular" guard
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol;
  return tol;
}

// Pair (W, lambda) with W real orthogonal and lambda >= 0 non-increasing,
// such that the decomposed matrix equals W * [[0, diag(lambda)],
// [-diag(lambda), 0]] * W^T.
struct SkewNormalForm {
  RealMatrix W;
  RealVector lambda;
};

// Assembles [[0, diag(lambda)], [-diag(lambda), 0]].
RealMatrix skew_block_form(const RealVector& lambda);

// Haar-random n x n unitary via complex Ginibre + QR with the R-diagonal
// phase correction. Throws InvalidInput for n < 1.
ComplexMatrix haar_unitary(int n, rng::Stream& stream);

// Haar-random d x d special orthogonal (det = +1) via real Ginibre + QR with
// sign correction; a det = -1 draw is fixed by flipping the last column.
// Throws InvalidInput for odd or nonpositive d.
RealMatrix haar_special_orthogonal(int d, rng::Stream& stream);

// Canonical form of a real skew-symmetric matrix, computed from the real
// Schur decomposition: 2x2 blocks are normalized so the top-right entry is
// nonnegative, zero modes are padded in, and pairs are sorted by descending
// lambda. Throws InvalidInput on odd dimension or a non-skew input.
SkewNormalForm skew_normal_form(const RealMatrix& a,
                                const Tolerances& tol = default_tolerances());

// Nearest unitary XY^dagger from the SVD A = X Sigma Y^dagger.
ComplexMatrix svd_round_unitary(const ComplexMatrix& a);

// Nearest (special-structure-free) orthogonal for real input.
RealMatrix svd_round_orthogonal(const RealMatrix& a);

// Top-k eigenprojector of a Hermitian matrix. Throws InvalidInput when a is
// not square/Hermitian or k is out of range.
ComplexMatrix svd_round_rank_projector(const ComplexMatrix& a, int k);

// Principal p-th root of a unitary matrix: eigenvalue arguments are divided
// by p on the branch (-pi, pi). Eigenvalues within tol.root_branch_gap of the
// cut throw PreconditionViolation. p = 1 returns the input unchanged.
ComplexMatrix principal_root(const ComplexMatrix& w, int p,
                             const Tolerances& tol = default_tolerances());

// Real-orthogonal overload: computes the complex root and truncates the
// imaginary residue, which must stay below tol.imag_truncation.
RealMatrix principal_root(const RealMatrix& w, int p,
                          const Tolerances& tol = default_tolerances());

// min over theta of ‖U - e^{i theta} V‖, accurate to tol.phase_distance_abs.
// Evaluated through the eigenphases of V^dagger U on a 1024-point grid with
// golden-section refinement (the objective need not be unimodal in theta).
Real phase_distance(const ComplexMatrix& u, const ComplexMatrix& v,
                    const Tolerances& tol = default_tolerances());

}  // namespace matlin
}  // namespace flo

#endif  // FLO_MATLIN_HPP_
