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

#include "flo/matlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace flo {
namespace matlin {

namespace {

ComplexMatrix complex_ginibre(int rows, int cols, rng::Stream& stream) {
  ComplexMatrix g(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      g(i, j) = Complex(stream.gaussian(), stream.gaussian());
    }
  }
  return g;
}

RealMatrix real_ginibre(int rows, int cols, rng::Stream& stream) {
  RealMatrix g(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      g(i, j) = stream.gaussian();
    }
  }
  return g;
}

}  // namespace

RealMatrix skew_block_form(const RealVector& lambda) {
  const int n = static_cast<int>(lambda.size());
  RealMatrix form = RealMatrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    form(k, k + n) = lambda(k);
    form(k + n, k) = -lambda(k);
  }
  return form;
}

ComplexMatrix haar_unitary(int n, rng::Stream& stream) {
  if (n < 1) throw InvalidInput("haar_unitary: n must be >= 1");
  const ComplexMatrix g = complex_ginibre(n, n, stream);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Multiply column j by the phase of R_jj to make the distribution Haar.
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const Real mag = std::abs(d);
    q.col(j) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
  }
  return q;
}

RealMatrix haar_special_orthogonal(int d, rng::Stream& stream) {
  if (d < 2 || d % 2 != 0) {
    throw InvalidInput("haar_special_orthogonal: d must be even and >= 2");
  }
  const RealMatrix g = real_ginibre(d, d, stream);
  Eigen::HouseholderQR<RealMatrix> qr(g);
  RealMatrix q = qr.householderQ();
  const RealMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(d - 1) = -q.col(d - 1);
  return q;
}

SkewNormalForm skew_normal_form(const RealMatrix& a, const Tolerances& tol) {
  const int dim = static_cast<int>(a.rows());
  if (a.cols() != dim || dim % 2 != 0 || dim == 0) {
    throw InvalidInput("skew_normal_form: dimension must be even and > 0");
  }
  const Real scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > tol.skew_input * scale) {
    throw InvalidInput("skew_normal_form: input is not skew-symmetric");
  }
  const int n = dim / 2;

  SkewNormalForm result;
  if (a.cwiseAbs().maxCoeff() <= tol.degeneracy) {
    result.W = RealMatrix::Identity(dim, dim);
    result.lambda = RealVector::Zero(n);
    return result;
  }

  Eigen::RealSchur<RealMatrix> schur(a);
  const RealMatrix& t = schur.matrixT();
  const RealMatrix& u = schur.matrixU();

  // Walk the quasi-triangular T: 2x2 blocks carry a rotation pair, 1x1
  // blocks are (numerically) zero modes paired up afterwards.
  struct Pair {
    Real lambda;
    int x_col;  // column of W holding the "x" vector of the pair
    int y_col;
  };
  std::vector<Pair> pairs;
  std::vector<int> zero_cols;
  int i = 0;
  while (i < dim) {
    const bool has_block = (i + 1 < dim) && (std::abs(t(i + 1, i)) >
                                             tol.degeneracy * scale);
    if (has_block) {
      const Real top_right = t(i, i + 1);
      if (top_right >= 0.0) {
        pairs.push_back({top_right, i, i + 1});
      } else {
        pairs.push_back({-top_right, i + 1, i});
      }
      i += 2;
    } else {
      zero_cols.push_back(i);
      i += 1;
    }
  }
  // Pad zero modes into lambda = 0 pairs (zero_cols has even length because
  // dim is even and each 2x2 block consumes two columns).
  for (std::size_t z = 0; z + 1 < zero_cols.size(); z += 2) {
    pairs.push_back({0.0, zero_cols[z], zero_cols[z + 1]});
  }

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& lhs, const Pair& rhs) {
                     return lhs.lambda > rhs.lambda;
                   });

  result.W = RealMatrix(dim, dim);
  result.lambda = RealVector(n);
  for (int k = 0; k < n; ++k) {
    result.lambda(k) = pairs[k].lambda;
    result.W.col(k) = u.col(pairs[k].x_col);
    result.W.col(k + n) = u.col(pairs[k].y_col);
  }
  return result;
}

ComplexMatrix svd_round_unitary(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidInput("svd_round_unitary: input must be square");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

RealMatrix svd_round_orthogonal(const RealMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidInput("svd_round_orthogonal: input must be square");
  }
  Eigen::JacobiSVD<RealMatrix> svd(a,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

ComplexMatrix svd_round_rank_projector(const ComplexMatrix& a, int k) {
  const int dim = static_cast<int>(a.rows());
  if (a.cols() != dim || dim == 0) {
    throw InvalidInput("svd_round_rank_projector: input must be square");
  }
  if (k < 0 || k > dim) {
    throw InvalidInput("svd_round_rank_projector: rank target out of range");
  }
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw InvalidInput("svd_round_rank_projector: input must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(a);
  // Eigen sorts eigenvalues in increasing order; the top-k eigenvectors are
  // the trailing columns.
  const ComplexMatrix top = eig.eigenvectors().rightCols(k);
  return top * top.adjoint();
}

ComplexMatrix principal_root(const ComplexMatrix& w, int p,
                             const Tolerances& tol) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw InvalidInput("principal_root: input must be square");
  }
  if (p < 1) throw InvalidInput("principal_root: p must be >= 1");
  if (p == 1) return w;

  // The input is unitary (normal), so its complex Schur form is diagonal up
  // to roundoff; rooting the diagonal and conjugating back is exact enough.
  Eigen::ComplexSchur<ComplexMatrix> schur(w);
  const ComplexMatrix& q = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();
  const int dim = static_cast<int>(w.rows());
  ComplexMatrix root_diag = ComplexMatrix::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const Complex lam = t(j, j);
    const Real arg = std::arg(lam);
    if (std::abs(arg) > kPi - tol.root_branch_gap) {
      throw PreconditionViolation(
          "principal_root: eigenvalue argument too close to the branch cut");
    }
    const Real mag = std::pow(std::abs(lam), 1.0 / static_cast<Real>(p));
    root_diag(j, j) = std::polar(mag, arg / static_cast<Real>(p));
  }
  return q * root_diag * q.adjoint();
}

RealMatrix principal_root(const RealMatrix& w, int p, const Tolerances& tol) {
  const ComplexMatrix root = principal_root(ComplexMatrix(w.cast<Complex>()),
                                            p, tol);
  const Real imag_residue = root.imag().cwiseAbs().maxCoeff();
  if (imag_residue > tol.imag_truncation) {
    throw NumericalDegeneracy(
        "principal_root: real input produced a complex root");
  }
  return root.real();
}

Real phase_distance(const ComplexMatrix& u, const ComplexMatrix& v,
                    const Tolerances& tol) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols() ||
      u.rows() == 0) {
    throw InvalidInput("phase_distance: size mismatch");
  }
  // ‖U - e^{i theta} V‖ = max_k |mu_k - e^{i theta}| over the eigenvalues
  // mu_k of V^dagger U (a normal matrix).
  Eigen::ComplexEigenSolver<ComplexMatrix> eig(v.adjoint() * u, false);
  const ComplexVector mu = eig.eigenvalues();

  const auto objective = [&mu](Real theta) {
    const Complex point = std::polar(1.0, theta);
    Real worst = 0.0;
    for (int k = 0; k < mu.size(); ++k) {
      worst = std::max(worst, std::abs(mu(k) - point));
    }
    return worst;
  };

  constexpr int kGrid = 1024;
  Real best_theta = 0.0;
  Real best_value = objective(0.0);
  for (int g = 1; g < kGrid; ++g) {
    const Real theta = -kPi + 2.0 * kPi * static_cast<Real>(g) / kGrid;
    const Real value = objective(theta);
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  }

  // Golden-section refinement inside the bracketing grid cell.
  const Real step = 2.0 * kPi / kGrid;
  Real lo = best_theta - step;
  Real hi = best_theta + step;
  const Real golden = 0.5 * (std::sqrt(5.0) - 1.0);
  Real x1 = hi - golden * (hi - lo);
  Real x2 = lo + golden * (hi - lo);
  Real f1 = objective(x1);
  Real f2 = objective(x2);
  while (hi - lo > tol.phase_distance_abs * 0.5) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = objective(x2);
    }
  }
  return std::min({best_value, f1, f2, objective(0.5 * (lo + hi))});
}

}  // namespace matlin
}  // namespace flo
