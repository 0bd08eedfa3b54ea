// Copyright 2026 The STERA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Portable seeded randomness for the synthetic generators.
//
// The standard <random> distributions are implementation-defined, so the
// generators use a fully specified stack instead:
//   * state: xoshiro256** (Blackman & Vigna), seeded by four successive
//     SplitMix64 outputs of the 64-bit seed;
//   * Uniform01: (next() >> 11) * 2^-53, in [0, 1);
//   * UniformIndex(n): high 64 bits of the 128-bit product next() * n;
//   * Gaussian: Box-Muller on (1 - Uniform01(), Uniform01()), returning the
//     cosine branch first and caching the sine branch for the next call.
// Any implementation following these steps reproduces the same streams.

#ifndef STERA_RNG_H_
#define STERA_RNG_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace stera {

std::uint64_t SplitMix64(std::uint64_t& state);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t Next();
  double Uniform01();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
  // Uniform integer in [0, n); n must be positive.
  std::uint64_t UniformIndex(std::uint64_t n);
  double Gaussian();
  double Gaussian(double mean, double sigma) { return mean + sigma * Gaussian(); }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_;
};

}  // namespace stera

#endif  // STERA_RNG_H_
