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
// Randomized-measurement estimators over fermionic Gaussian states:
//
//   U(n)-shadows    draw V ~ Haar(U(n)), rotate by the passive FLO of
//                   conj(V), measure in the Fock basis; the estimate
//                   V^dag E(b) V with E(b) = (n+1) diag(b) - |b| I is an
//                   unbiased estimator of the 1-RDM.
//   SO(2n)-shadows  draw R ~ Haar(SO(2n)), rotate by Phi(R), measure; the
//                   estimate (2n-1) R^T J(b) R is unbiased for the
//                   covariance matrix.
//
// Collection is deterministic regardless of thread count: sample i uses the
// stream derived from (seed, i), samples are summed in fixed blocks of 1024,
// and blocks are reduced in ascending order. The serial path follows the
// identical block structure, so parallel and serial means agree bitwise.

#ifndef FLO_SHADOWS_HPP_
#define FLO_SHADOWS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "flo/common.hpp"
#include "flo/gsim.hpp"
#include "flo/rng.hpp"

namespace flo {
namespace shadows {

// One single-copy randomized measurement: the applied basis rotation and the
// observed Fock outcome.
struct UnShadowSample {
  ComplexMatrix V;
  std::vector<int> b;
};

struct SoShadowSample {
  RealMatrix R;
  std::vector<int> b;
};

// Streaming mean with an associative merge. Items are summed into segments
// of at most 1024; merging concatenates segment lists and mean() reduces
// them left to right, so merge(merge(a,b),c) and merge(a,merge(b,c)) agree
// bit for bit.
template <typename Matrix>
class MeanAccumulator {
 public:
  static constexpr std::int64_t kSegmentCapacity = 1024;

  MeanAccumulator(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) {
      throw InvalidInput("MeanAccumulator: dimensions must be positive");
    }
  }

  void add(const Matrix& item) {
    if (item.rows() != rows_ || item.cols() != cols_) {
      throw InvalidInput("MeanAccumulator: item dimension mismatch");
    }
    if (segments_.empty() || !segments_.back().open) {
      segments_.push_back(Segment{Matrix::Zero(rows_, cols_), 0, true});
    }
    Segment& tail = segments_.back();
    tail.sum += item;
    if (++tail.count == kSegmentCapacity) tail.open = false;
  }

  void merge(const MeanAccumulator& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_) {
      throw InvalidInput("MeanAccumulator: merge dimension mismatch");
    }
    segments_.insert(segments_.end(), other.segments_.begin(),
                     other.segments_.end());
  }

  std::int64_t count() const {
    std::int64_t total = 0;
    for (const Segment& segment : segments_) total += segment.count;
    return total;
  }

  Matrix mean() const {
    const std::int64_t total = count();
    if (total == 0) {
      throw PreconditionViolation("MeanAccumulator: mean of zero items");
    }
    Matrix sum = Matrix::Zero(rows_, cols_);
    for (const Segment& segment : segments_) sum += segment.sum;
    return sum / static_cast<Real>(total);
  }

 private:
  struct Segment {
    Matrix sum;
    std::int64_t count = 0;
    bool open = true;
  };

  int rows_;
  int cols_;
  std::vector<Segment> segments_;
};

// One protocol step: rotate the prepared state, measure, record the pair.
UnShadowSample draw_un_sample(const gsim::GaussianState& state,
                              rng::Stream& stream);
SoShadowSample draw_so_sample(const gsim::GaussianState& state,
                              rng::Stream& stream);

// V^dag E(b) V with E(b) = (n+1) diag(b) - |b| I. Hermitian; operator norm
// max{n+1-|b|, |b|} for 1 <= |b| <= n-1 (0 at b = 0^n, 1 at b = 1^n).
ComplexMatrix un_estimate(const UnShadowSample& sample);

// (2n-1) R^T J(b) R with J(b) the covariance of the Fock state b.
// Skew-symmetric with operator norm exactly 2n-1.
RealMatrix so_estimate(const SoShadowSample& sample);

// Deterministic blocked means of `count` per-index items; item i receives a
// stream derived from (seed, i). Parallelized over blocks when `parallel`.
ComplexMatrix blocked_mean(
    std::int64_t count, std::uint64_t seed, int rows, int cols,
    const std::function<ComplexMatrix(std::int64_t, rng::Stream&)>& item,
    bool parallel = true);
RealMatrix blocked_mean_real(
    std::int64_t count, std::uint64_t seed, int rows, int cols,
    const std::function<RealMatrix(std::int64_t, rng::Stream&)>& item,
    bool parallel = true);

// Mean of `count` U(n)- / SO(2n)-shadow estimates of the given state.
ComplexMatrix collect_un_mean(const gsim::GaussianState& state,
                              std::int64_t count, std::uint64_t seed,
                              bool parallel = true);
RealMatrix collect_so_mean(const gsim::GaussianState& state,
                           std::int64_t count, std::uint64_t seed,
                           bool parallel = true);

// Sample-size calculators, one per estimation task. Each evaluates its
// closed-form copy count, multiplied by params.constant_scale, and returns
// the ceiling as a positive integer.
enum class SampleKind {
  kSlaterRdm,        // ceil(12 n eta ln(2n/delta) / eps^2)
  kSlaterTomo,       // ceil(48 n eta^2 ln(2n/delta) / eps^2)
  kSingleParticle,   // ceil(C (11 n + 5 ln(4n/delta)) / eps^2)
  kCovariance,       // ceil(8 n^2 ln(4n/delta) / eps^2)
  kGaussianTomo,     // ceil(9 n^3 ln(4n/delta) / eps^2)
  kVacuumStage,      // ceil(32 n^2 ln(4n/delta) / eps^2)
  kPerturbedRdm,     // ceil((C1' n + C2') ln(2n/delta) / eps^2), C_i'(c)
  kPhase,            // ceil((6 + 4 sqrt 2) ln(2/delta) / eps^2)
  kPhaseAlg5,        // ceil(572 ln(8/delta) / eps^2)
  kChoi,             // ceil(128 n^2 ln(8n/delta) / eps^2)
  kActiveBase,       // ceil(2.2e8 n^3 ln(12n/delta) / eps^2)
};

struct SampleParams {
  int n = 0;       // mode count (kinds that use it)
  int eta = 0;     // particle number (Slater kinds)
  Real eps = 0.0;  // target precision, in (0, 1)
  Real delta = 0.0;  // failure probability, in (0, 1)
  Real c = 0.0;    // perturbation strength bound (perturbed_rdm)
  Real constant_scale = 1.0;  // caller calibration factor, > 0
  Real single_particle_constant = 5.6e6;  // absolute constant C
};

std::int64_t sample_size(SampleKind kind, const SampleParams& params);

}  // namespace shadows
}  // namespace flo

#endif  // FLO_SHADOWS_HPP_
