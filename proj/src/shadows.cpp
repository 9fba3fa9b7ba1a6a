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

#include "flo/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "flo/matlin.hpp"

namespace flo {
namespace shadows {

namespace {

constexpr std::int64_t kBlockSize = 1024;
constexpr Real kIntegerCeiling = 9.0e18;  // largest sample count representable

template <typename Matrix>
Matrix blocked_mean_impl(
    std::int64_t count, std::uint64_t seed, int rows, int cols,
    const std::function<Matrix(std::int64_t, rng::Stream&)>& item,
    bool parallel) {
  if (count < 1) throw InvalidInput("blocked_mean: count must be >= 1");
  if (rows < 1 || cols < 1) {
    throw InvalidInput("blocked_mean: dimensions must be positive");
  }
  const std::int64_t blocks = (count + kBlockSize - 1) / kBlockSize;
  std::vector<Matrix> partial(static_cast<std::size_t>(blocks));
  std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t block = 0; block < blocks; ++block) {
    try {
      Matrix local = Matrix::Zero(rows, cols);
      const std::int64_t begin = block * kBlockSize;
      const std::int64_t end = std::min(count, begin + kBlockSize);
      for (std::int64_t i = begin; i < end; ++i) {
        rng::Stream stream(seed, static_cast<std::uint64_t>(i));
        local += item(i, stream);
      }
      partial[static_cast<std::size_t>(block)] = std::move(local);
    } catch (...) {
#pragma omp critical(flo_shadows_failure)
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  Matrix total = Matrix::Zero(rows, cols);
  for (const Matrix& p : partial) total += p;
  return total / static_cast<Real>(count);
}

void check_rate(Real value, const char* name) {
  if (!(value > 0.0) || !(value < 1.0)) {
    throw InvalidInput(std::string("sample_size: ") + name +
                       " must lie in (0, 1)");
  }
}

void check_modes(int n) {
  if (n < 1) throw InvalidInput("sample_size: n must be >= 1");
}

}  // namespace

UnShadowSample draw_un_sample(const gsim::GaussianState& state,
                              rng::Stream& stream) {
  const int n = state.n;
  UnShadowSample sample;
  sample.V = matlin::haar_unitary(n, stream);
  const gsim::GaussianState rotated = gsim::apply_flo(
      state,
      florep::embed_passive(florep::make_passive(sample.V.conjugate())));
  sample.b = gsim::measure_fock(rotated, stream);
  return sample;
}

SoShadowSample draw_so_sample(const gsim::GaussianState& state,
                              rng::Stream& stream) {
  const int n = state.n;
  SoShadowSample sample;
  sample.R = matlin::haar_special_orthogonal(2 * n, stream);
  const gsim::GaussianState rotated =
      gsim::apply_flo(state, florep::make_active(sample.R));
  sample.b = gsim::measure_fock(rotated, stream);
  return sample;
}

ComplexMatrix un_estimate(const UnShadowSample& sample) {
  const int n = static_cast<int>(sample.V.rows());
  if (sample.V.cols() != n || static_cast<int>(sample.b.size()) != n) {
    throw InvalidInput("un_estimate: inconsistent sample dimensions");
  }
  int weight = 0;
  for (int bit : sample.b) {
    if (bit != 0 && bit != 1) {
      throw InvalidInput("un_estimate: bits must be 0 or 1");
    }
    weight += bit;
  }
  RealVector diagonal(n);
  for (int j = 0; j < n; ++j) {
    diagonal(j) = static_cast<Real>((n + 1) * sample.b[j] - weight);
  }
  return sample.V.adjoint() * diagonal.asDiagonal() * sample.V;
}

RealMatrix so_estimate(const SoShadowSample& sample) {
  const int dim = static_cast<int>(sample.R.rows());
  if (sample.R.cols() != dim || dim % 2 != 0 ||
      static_cast<int>(sample.b.size()) != dim / 2) {
    throw InvalidInput("so_estimate: inconsistent sample dimensions");
  }
  const RealMatrix j_of_b = gsim::fock_basis_state(sample.b).gamma;
  return static_cast<Real>(dim - 1) * sample.R.transpose() * j_of_b * sample.R;
}

ComplexMatrix blocked_mean(
    std::int64_t count, std::uint64_t seed, int rows, int cols,
    const std::function<ComplexMatrix(std::int64_t, rng::Stream&)>& item,
    bool parallel) {
  return blocked_mean_impl<ComplexMatrix>(count, seed, rows, cols, item,
                                          parallel);
}

RealMatrix blocked_mean_real(
    std::int64_t count, std::uint64_t seed, int rows, int cols,
    const std::function<RealMatrix(std::int64_t, rng::Stream&)>& item,
    bool parallel) {
  return blocked_mean_impl<RealMatrix>(count, seed, rows, cols, item,
                                       parallel);
}

ComplexMatrix collect_un_mean(const gsim::GaussianState& state,
                              std::int64_t count, std::uint64_t seed,
                              bool parallel) {
  const int n = state.n;
  return blocked_mean(
      count, seed, n, n,
      [&state](std::int64_t, rng::Stream& stream) {
        return un_estimate(draw_un_sample(state, stream));
      },
      parallel);
}

RealMatrix collect_so_mean(const gsim::GaussianState& state,
                           std::int64_t count, std::uint64_t seed,
                           bool parallel) {
  const int dim = 2 * state.n;
  return blocked_mean_real(
      count, seed, dim, dim,
      [&state](std::int64_t, rng::Stream& stream) {
        return so_estimate(draw_so_sample(state, stream));
      },
      parallel);
}

std::int64_t sample_size(SampleKind kind, const SampleParams& params) {
  check_rate(params.eps, "eps");
  check_rate(params.delta, "delta");
  if (!(params.constant_scale > 0.0)) {
    throw InvalidInput("sample_size: constant_scale must be positive");
  }
  const Real inv_eps2 = 1.0 / (params.eps * params.eps);
  const int n = params.n;

  Real copies = 0.0;
  switch (kind) {
    case SampleKind::kSlaterRdm:
    case SampleKind::kSlaterTomo: {
      check_modes(n);
      if (params.eta < 1 || params.eta > n) {
        throw InvalidInput("sample_size: eta must lie in [1, n]");
      }
      const Real eta = static_cast<Real>(params.eta);
      const Real log_term = std::log(2.0 * n / params.delta);
      copies = (kind == SampleKind::kSlaterRdm)
                   ? 12.0 * n * eta * log_term * inv_eps2
                   : 48.0 * n * eta * eta * log_term * inv_eps2;
      break;
    }
    case SampleKind::kSingleParticle: {
      check_modes(n);
      if (!(params.single_particle_constant > 0.0)) {
        throw InvalidInput(
            "sample_size: single_particle_constant must be positive");
      }
      copies = params.single_particle_constant *
               (11.0 * n + 5.0 * std::log(4.0 * n / params.delta)) * inv_eps2;
      break;
    }
    case SampleKind::kCovariance:
      check_modes(n);
      copies = 8.0 * n * n * std::log(4.0 * n / params.delta) * inv_eps2;
      break;
    case SampleKind::kGaussianTomo:
      check_modes(n);
      copies = 9.0 * std::pow(n, 3) * std::log(4.0 * n / params.delta) *
               inv_eps2;
      break;
    case SampleKind::kVacuumStage:
      check_modes(n);
      copies = 32.0 * n * n * std::log(4.0 * n / params.delta) * inv_eps2;
      break;
    case SampleKind::kPerturbedRdm: {
      check_modes(n);
      if (params.c < 0.0) {
        throw InvalidInput("sample_size: c must be nonnegative");
      }
      const Real c2 = params.c * params.c;
      const Real c4 = c2 * c2;
      const Real c1 = 2.0 * (std::sqrt(2.0 + 7.0 * c2 + c4) + 1.0) + c2;
      const Real c2_bound = 5.0 + 8.0 * c2 + c4;
      const Real c1_prime = 2.0 * (c1 + 1.0 / 3.0);
      const Real c2_prime = 2.0 * (c2_bound + 1.0 / 3.0);
      copies = (c1_prime * n + c2_prime) *
               std::log(2.0 * n / params.delta) * inv_eps2;
      break;
    }
    case SampleKind::kPhase:
      copies = (6.0 + 4.0 * std::sqrt(2.0)) * std::log(2.0 / params.delta) *
               inv_eps2;
      break;
    case SampleKind::kPhaseAlg5:
      copies = 572.0 * std::log(8.0 / params.delta) * inv_eps2;
      break;
    case SampleKind::kChoi:
      check_modes(n);
      copies = 128.0 * n * n * std::log(8.0 * n / params.delta) * inv_eps2;
      break;
    case SampleKind::kActiveBase:
      check_modes(n);
      copies = 2.2e8 * std::pow(n, 3) * std::log(12.0 * n / params.delta) *
               inv_eps2;
      break;
  }

  copies *= params.constant_scale;
  if (copies > kIntegerCeiling) {
    throw CapExceeded("sample_size: copy count exceeds integer range");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(copies)));
}

}  // namespace shadows
}  // namespace flo
