/*
 * Copyright 2026 The maxwent authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MAXWENT_RANDOM_HPP_
#define MAXWENT_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "maxwent/common.hpp"

namespace maxwent {

/// Sampling law for the reparameterization variable z: both have mean 0 and
/// unit variance. UniformSym is uniform on [-sqrt(3), sqrt(3)].
enum class SampleLaw { StandardNormal, UniformSym };

inline constexpr double kSqrt3 = 1.7320508075688772;

/// SplitMix64 stream (Steele/Lea/Flood constants). Counter-based, bit-exact
/// across platforms, which makes every fit and report reproducible from
/// (seed, law, call sequence) alone.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, SampleLaw law = SampleLaw::StandardNormal)
      : state_(seed), law_(law) {}

  SampleLaw law() const { return law_; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 bits of precision.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound) via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw ContractViolation("next_below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal draw (Marsaglia polar, spare cached in the stream).
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double v1, v2, s;
    do {
      v1 = 2.0 * next_unit() - 1.0;
      v2 = 2.0 * next_unit() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v2 * f;
    has_spare_ = true;
    return v1 * f;
  }

  double next_uniform_sym() { return kSqrt3 * (2.0 * next_unit() - 1.0); }

  /// One draw from the stream's law.
  double next() {
    return law_ == SampleLaw::StandardNormal ? next_normal() : next_uniform_sym();
  }

  template <typename It>
  void fill(It first, It last) {
    for (; first != last; ++first) *first = next();
  }

 private:
  std::uint64_t state_;
  SampleLaw law_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// d fresh independent draws from the stream's law; empty vector for d = 0.
inline std::vector<double> sample_z(RandomStream& stream, std::size_t d) {
  std::vector<double> z(d);
  stream.fill(z.begin(), z.end());
  return z;
}

/// Deterministic child-seed derivation so independent tasks (ensemble
/// members, batch shuffling vs. z-sampling, per-input scoring) never share
/// a stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  s = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9ull;
  s = (s ^ (s >> 27)) * 0x94D049BB133111EBull;
  return s ^ (s >> 31);
}

}  // namespace maxwent

#endif  // MAXWENT_RANDOM_HPP_
