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
// Deterministic random-number streams.
//
// Every stochastic routine in the library derives its randomness from a
// Stream keyed by (seed, stream id). Independent samples use independent
// stream ids, so results are reproducible bit-for-bit regardless of thread
// count or iteration order. Gaussian variates use an explicit Box-Muller
// transform rather than std::normal_distribution, whose output sequence is
// not pinned down by the standard.

#ifndef FLO_RNG_HPP_
#define FLO_RNG_HPP_

#include <cmath>
#include <cstdint>

#include "flo/common.hpp"

namespace flo {
namespace rng {

// SplitMix64 step; used both as a generator and to derive child keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a2ca9d1575dbULL;
  return z ^ (z >> 31);
}

// Counter-based stream: a small xoshiro256** generator seeded via SplitMix64
// from (seed, stream). Cheap to construct, so per-sample streams are fine.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t key = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    for (auto& word : s_) word = splitmix64(key);
    has_cached_gaussian_ = false;
    cached_gaussian_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  Real uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in {0, 1, ..., bound-1} via rejection (exact, unbiased).
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw InvalidInput("uniform_below: bound must be positive");
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller; caches the second variate.
  Real gaussian() {
    if (has_cached_gaussian_) {
      has_cached_gaussian_ = false;
      return cached_gaussian_;
    }
    Real u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const Real u2 = uniform();
    const Real radius = std::sqrt(-2.0 * std::log(u1));
    const Real angle = 2.0 * kPi * u2;
    cached_gaussian_ = radius * std::sin(angle);
    has_cached_gaussian_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(Real p) { return uniform() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  bool has_cached_gaussian_;
  Real cached_gaussian_;
};

// Derive a child seed for a named stage, so nested routines never share
// streams with their callers.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t key = seed ^ (0xd1342543de82ef95ULL * (salt + 1));
  return splitmix64(key);
}

}  // namespace rng
}  // namespace flo

#endif  // FLO_RNG_HPP_
