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
// Covariance-matrix simulator for pure fermionic Gaussian states.
//
// A state on n modes is the 2n x 2n real skew-symmetric matrix
// Gamma_pq = -(i/2) <psi| [gamma_p, gamma_q] |psi>, with the interleaved
// Majorana layout: index j < n is gamma_j (the "x" Majorana of mode j),
// index j + n its partner. Pure states satisfy Gamma Gamma^T = I. The vacuum
// is J = [[0, I], [-I, 0]].
//
// The fermionic-EPR helpers at the bottom use a different, register-paired
// layout (both Majoranas of the system register first, then the auxiliary
// register) because the EPR covariance is block off-diagonal exactly in that
// layout; explicit converters bridge the two.

#ifndef FLO_GSIM_HPP_
#define FLO_GSIM_HPP_

#include <vector>

#include "flo/common.hpp"
#include "flo/florep.hpp"
#include "flo/rng.hpp"

namespace flo {
namespace gsim {

struct GaussianState {
  int n = 0;
  RealMatrix gamma;
};

// One-body reduced density matrix D_jk = <a_j^dag a_k>.
struct Rdm {
  ComplexMatrix D;
};

// One term coeff * (i gamma_p gamma_q) of a quadratic observable, p != q.
struct QuadraticTerm {
  int p = 0;
  int q = 0;
  Real coeff = 0.0;
};
using QuadraticObservable = std::vector<QuadraticTerm>;

// Validating constructor: checks skewness (1e-9) and purity (1e-8).
GaussianState make_state(int n, const RealMatrix& gamma);

GaussianState vacuum_state(int n);

// Computational-basis state |b>; bits are 0/1, bits.size() = n.
GaussianState fock_basis_state(const std::vector<int>& bits);

// Gamma -> Q Gamma Q^T.
GaussianState apply_flo(const GaussianState& s, const florep::ActiveFlo& q);

// Tensor product with |0^k>, re-interleaving the Majorana layout so the
// result follows the (x_1..x_{n+k}, y_1..y_{n+k}) convention.
GaussianState append_vacuum_modes(const GaussianState& s, int k);

// Samples a Fock-basis outcome mode by mode: the marginal of mode j on the
// conditioned state is p(1) = (1 - gamma_{j,j+n})/2, followed by the rank-two
// conditional update. The input is not mutated. Throws NumericalDegeneracy
// when a marginal leaves [-1e-9, 1 + 1e-9].
std::vector<int> measure_fock(const GaussianState& s, rng::Stream& stream);

// Exact probability of the full Fock outcome `bits`, computed through the
// same sequential conditioning used by measure_fock.
Real fock_probability(const GaussianState& s, const std::vector<int>& bits);

// The linear map T([[A,B],[C,D]]) = (C - B + i(A + D))/2 underlying the
// covariance -> RDM conversion; exposed for its operator-norm contract.
ComplexMatrix t_map(const RealMatrix& x);

// D = (I + T(Gamma))/2, symmetrized to remove the O(1e-16) Hermiticity
// residue.
Rdm rdm_from_covariance(const GaussianState& s);

// Expectation of sum_k coeff_k * (i gamma_p_k gamma_q_k), which equals
// -sum_k coeff_k Gamma_{p_k, q_k}. Rejects p = q terms.
Real quadratic_expectation(const GaussianState& s,
                           const QuadraticObservable& observable);

// --- Fermionic EPR / Choi machinery (register-paired layout) ---------------

// Permutation P_sigma P_pi with det = +1 that maps the 2n-mode vacuum to the
// fermionic EPR state, expressed in the register-paired Majorana layout
// (system x_1..x_n, y_1..y_n, then auxiliary x, y).
RealMatrix fepr_permutation(int n);

// EPR state of n system + n auxiliary modes; covariance [[0, S], [-S, 0]]
// with S = diag(-1, 1, -1, ..., 1), in the register-paired layout.
GaussianState fepr_state(int n);

// Choi covariance of Phi(Q): [[0, QS], [-(QS)^T, 0]] in the register-paired
// layout. Equals fepr_state(n) evolved by choi_system_embedding(q).
GaussianState fepr_covariance_of(const florep::ActiveFlo& q);

// blockdiag(Q, I_2n): Q acting on the system register only, expressed in the
// register-paired layout of the 2n-mode space.
florep::ActiveFlo choi_system_embedding(const florep::ActiveFlo& q);

// The same embedding expressed in the standard interleaved layout of the
// 2n-mode space, i.e. directly usable with apply_flo on states produced by
// choi_register_to_interleaved.
florep::ActiveFlo choi_system_embedding_interleaved(const florep::ActiveFlo& q);

// Layout converters between the register-paired covariance (2n modes, system
// register first) and the standard interleaved layout used by measure_fock
// and apply_flo with generic rotations.
GaussianState choi_register_to_interleaved(const GaussianState& s);
GaussianState choi_interleaved_to_register(const GaussianState& s);

}  // namespace gsim
}  // namespace flo

#endif  // FLO_GSIM_HPP_
