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

#include "flo/gsim.hpp"

#include <algorithm>
#include <cmath>

namespace flo {
namespace gsim {

namespace {

constexpr Real kSkewTol = 1e-9;
constexpr Real kPurityTol = 1e-8;
constexpr Real kMarginSlack = 1e-9;    // tolerated excursion of marginals
constexpr Real kDeterministic = 1e-12; // marginal treated as exactly 0 or 1

void check_mode_count(int n, const char* who) {
  if (n < 1) throw InvalidInput(std::string(who) + ": n must be >= 1");
}

// Conditions `gamma` on observing `outcome` for mode j and returns the
// marginal probability that outcome had. Shared by sampling and by exact
// outcome-probability evaluation so both follow the identical chain rule.
Real condition_on_outcome(RealMatrix& gamma, int n, int j, int outcome) {
  const Real pair_entry = gamma(j, j + n);
  Real p_one = 0.5 * (1.0 - pair_entry);
  if (p_one < -kMarginSlack || p_one > 1.0 + kMarginSlack) {
    throw NumericalDegeneracy("measure_fock: conditional marginal left [0, 1]");
  }
  p_one = std::clamp(p_one, 0.0, 1.0);
  const Real probability = (outcome == 1) ? p_one : 1.0 - p_one;
  const Real sigma = (outcome == 1) ? 1.0 : -1.0;

  const bool deterministic =
      (p_one < kDeterministic) || (p_one > 1.0 - kDeterministic);
  if (!deterministic) {
    // Rank-two conditional update: project onto the observed outcome of
    // mode j and renormalize; u, v are the two Majorana columns of mode j
    // with the measured 2x2 block removed.
    RealVector u = gamma.col(j);
    RealVector v = gamma.col(j + n);
    u(j) = 0.0;
    u(j + n) = 0.0;
    v(j) = 0.0;
    v(j + n) = 0.0;
    const Real denom = 1.0 - sigma * pair_entry;
    gamma.noalias() +=
        (sigma / denom) * (u * v.transpose() - v * u.transpose());
  }
  gamma.row(j).setZero();
  gamma.col(j).setZero();
  gamma.row(j + n).setZero();
  gamma.col(j + n).setZero();
  gamma(j, j + n) = -sigma;
  gamma(j + n, j) = sigma;
  return probability;
}

}  // namespace

GaussianState make_state(int n, const RealMatrix& gamma) {
  check_mode_count(n, "make_state");
  if (gamma.rows() != 2 * n || gamma.cols() != 2 * n) {
    throw InvalidInput("make_state: covariance must be 2n x 2n");
  }
  if ((gamma + gamma.transpose()).cwiseAbs().maxCoeff() > kSkewTol) {
    throw InvalidInput("make_state: covariance is not skew-symmetric");
  }
  if ((gamma * gamma.transpose() - RealMatrix::Identity(2 * n, 2 * n))
          .cwiseAbs()
          .maxCoeff() > kPurityTol) {
    throw InvalidInput("make_state: covariance fails the purity condition");
  }
  return GaussianState{n, gamma};
}

GaussianState vacuum_state(int n) {
  check_mode_count(n, "vacuum_state");
  return GaussianState{n, florep::symplectic_form(n)};
}

GaussianState fock_basis_state(const std::vector<int>& bits) {
  const int n = static_cast<int>(bits.size());
  check_mode_count(n, "fock_basis_state");
  RealMatrix gamma = RealMatrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    if (bits[j] != 0 && bits[j] != 1) {
      throw InvalidInput("fock_basis_state: bits must be 0 or 1");
    }
    const Real sign = (bits[j] == 1) ? -1.0 : 1.0;
    gamma(j, j + n) = sign;
    gamma(j + n, j) = -sign;
  }
  return GaussianState{n, gamma};
}

GaussianState apply_flo(const GaussianState& s, const florep::ActiveFlo& q) {
  if (q.n() != s.n) throw InvalidInput("apply_flo: dimension mismatch");
  return GaussianState{s.n, q.Q * s.gamma * q.Q.transpose()};
}

GaussianState append_vacuum_modes(const GaussianState& s, int k) {
  if (k < 1) throw InvalidInput("append_vacuum_modes: k must be >= 1");
  const int n = s.n;
  const int m = n + k;
  RealMatrix gamma = RealMatrix::Zero(2 * m, 2 * m);
  // Old index p maps to p (x-type) or p + k (y-type, shifted by the new
  // modes inserted between the two Majorana blocks).
  const auto remap = [n, k](int p) { return (p < n) ? p : p + k; };
  for (int p = 0; p < 2 * n; ++p) {
    for (int q = 0; q < 2 * n; ++q) {
      gamma(remap(p), remap(q)) = s.gamma(p, q);
    }
  }
  for (int j = n; j < m; ++j) {
    gamma(j, j + m) = 1.0;
    gamma(j + m, j) = -1.0;
  }
  return GaussianState{m, gamma};
}

std::vector<int> measure_fock(const GaussianState& s, rng::Stream& stream) {
  const int n = s.n;
  RealMatrix gamma = s.gamma;
  std::vector<int> bits(n, 0);
  for (int j = 0; j < n; ++j) {
    const Real p_one = std::clamp(0.5 * (1.0 - gamma(j, j + n)), 0.0, 1.0);
    bits[j] = stream.bernoulli(p_one) ? 1 : 0;
    condition_on_outcome(gamma, n, j, bits[j]);
  }
  return bits;
}

Real fock_probability(const GaussianState& s, const std::vector<int>& bits) {
  const int n = s.n;
  if (static_cast<int>(bits.size()) != n) {
    throw InvalidInput("fock_probability: outcome length must equal n");
  }
  RealMatrix gamma = s.gamma;
  Real probability = 1.0;
  for (int j = 0; j < n; ++j) {
    if (bits[j] != 0 && bits[j] != 1) {
      throw InvalidInput("fock_probability: bits must be 0 or 1");
    }
    probability *= condition_on_outcome(gamma, n, j, bits[j]);
    if (probability == 0.0) break;
  }
  return probability;
}

ComplexMatrix t_map(const RealMatrix& x) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0 || x.rows() == 0) {
    throw InvalidInput("t_map: input must be square with even dimension");
  }
  const int n = static_cast<int>(x.rows()) / 2;
  const ComplexMatrix a = x.topLeftCorner(n, n).cast<Complex>();
  const ComplexMatrix b = x.topRightCorner(n, n).cast<Complex>();
  const ComplexMatrix c = x.bottomLeftCorner(n, n).cast<Complex>();
  const ComplexMatrix d = x.bottomRightCorner(n, n).cast<Complex>();
  return 0.5 * (c - b + Complex(0.0, 1.0) * (a + d));
}

Rdm rdm_from_covariance(const GaussianState& s) {
  const int n = s.n;
  ComplexMatrix rdm =
      0.5 * (ComplexMatrix::Identity(n, n) + t_map(s.gamma));
  rdm = 0.5 * (rdm + rdm.adjoint()).eval();
  return Rdm{rdm};
}

Real quadratic_expectation(const GaussianState& s,
                           const QuadraticObservable& observable) {
  const int dim = 2 * s.n;
  Real value = 0.0;
  for (const QuadraticTerm& term : observable) {
    if (term.p < 0 || term.q < 0 || term.p >= dim || term.q >= dim ||
        term.p == term.q) {
      throw InvalidInput(
          "quadratic_expectation: terms must pair distinct Majorana indices");
    }
    // <i gamma_p gamma_q> = i * (i Gamma_pq) = -Gamma_pq for p != q.
    value -= term.coeff * s.gamma(term.p, term.q);
  }
  return value;
}

RealMatrix fepr_permutation(int n) {
  check_mode_count(n, "fepr_permutation");
  const int dim = 4 * n;
  // pi swaps the system y-block with the auxiliary x-block.
  std::vector<int> pi(dim);
  for (int p = 0; p < dim; ++p) pi[p] = p;
  for (int j = 0; j < n; ++j) std::swap(pi[n + j], pi[2 * n + j]);
  // sigma swaps index j with j + 2n for every even 0-based j < 2n.
  std::vector<int> sigma(dim);
  for (int p = 0; p < dim; ++p) sigma[p] = p;
  for (int j = 0; j < 2 * n; j += 2) std::swap(sigma[j], sigma[j + 2 * n]);

  RealMatrix p_pi = RealMatrix::Zero(dim, dim);
  RealMatrix p_sigma = RealMatrix::Zero(dim, dim);
  for (int p = 0; p < dim; ++p) {
    p_pi(p, pi[p]) = 1.0;
    p_sigma(p, sigma[p]) = 1.0;
  }
  return p_sigma * p_pi;
}

namespace {

// Vacuum of 2n modes in the register-paired layout: system pairs (j, j+n),
// auxiliary pairs (2n+j, 3n+j).
RealMatrix register_vacuum(int n) {
  RealMatrix gamma = RealMatrix::Zero(4 * n, 4 * n);
  for (int j = 0; j < n; ++j) {
    gamma(j, j + n) = 1.0;
    gamma(j + n, j) = -1.0;
    gamma(2 * n + j, 3 * n + j) = 1.0;
    gamma(3 * n + j, 2 * n + j) = -1.0;
  }
  return gamma;
}

RealMatrix alternating_signs(int dim) {
  RealMatrix s = RealMatrix::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) s(j, j) = (j % 2 == 0) ? -1.0 : 1.0;
  return s;
}

// Register index of a global (interleaved) Majorana index, for 2n modes.
int register_index_of(int g, int n) {
  const int m = 2 * n;
  const bool y_type = (g >= m);
  const int mode = y_type ? g - m : g;
  if (mode < n) return mode + (y_type ? n : 0);
  return 2 * n + (mode - n) + (y_type ? n : 0);
}

}  // namespace

GaussianState fepr_state(int n) {
  check_mode_count(n, "fepr_state");
  const RealMatrix p = fepr_permutation(n);
  return GaussianState{2 * n, p * register_vacuum(n) * p.transpose()};
}

GaussianState fepr_covariance_of(const florep::ActiveFlo& q) {
  const int n = q.n();
  const RealMatrix qs = q.Q * alternating_signs(2 * n);
  RealMatrix gamma = RealMatrix::Zero(4 * n, 4 * n);
  gamma.topRightCorner(2 * n, 2 * n) = qs;
  gamma.bottomLeftCorner(2 * n, 2 * n) = -qs.transpose();
  return GaussianState{2 * n, gamma};
}

florep::ActiveFlo choi_system_embedding(const florep::ActiveFlo& q) {
  const int n = q.n();
  RealMatrix big = RealMatrix::Identity(4 * n, 4 * n);
  big.topLeftCorner(2 * n, 2 * n) = q.Q;
  florep::ActiveFlo result;
  result.Q = big;
  result.det_sign = q.det_sign;
  return result;
}

florep::ActiveFlo choi_system_embedding_interleaved(const florep::ActiveFlo& q) {
  const florep::ActiveFlo reg = choi_system_embedding(q);
  const int n = q.n();
  const int dim = 4 * n;
  RealMatrix out(dim, dim);
  for (int p = 0; p < dim; ++p) {
    for (int r = 0; r < dim; ++r) {
      out(p, r) = reg.Q(register_index_of(p, n), register_index_of(r, n));
    }
  }
  return florep::make_active(out);
}

GaussianState choi_register_to_interleaved(const GaussianState& s) {
  if (s.n % 2 != 0) {
    throw InvalidInput("choi_register_to_interleaved: needs 2n modes");
  }
  const int n = s.n / 2;
  const int dim = 4 * n;
  RealMatrix gamma(dim, dim);
  for (int p = 0; p < dim; ++p) {
    for (int q = 0; q < dim; ++q) {
      gamma(p, q) = s.gamma(register_index_of(p, n), register_index_of(q, n));
    }
  }
  return GaussianState{s.n, gamma};
}

GaussianState choi_interleaved_to_register(const GaussianState& s) {
  if (s.n % 2 != 0) {
    throw InvalidInput("choi_interleaved_to_register: needs 2n modes");
  }
  const int n = s.n / 2;
  const int dim = 4 * n;
  RealMatrix gamma(dim, dim);
  for (int p = 0; p < dim; ++p) {
    for (int q = 0; q < dim; ++q) {
      gamma(register_index_of(p, n), register_index_of(q, n)) = s.gamma(p, q);
    }
  }
  return GaussianState{s.n, gamma};
}

}  // namespace gsim
}  // namespace flo
