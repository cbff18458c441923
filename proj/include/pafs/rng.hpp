// Copyright 2026 The pafs Authors.
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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pafs/errors.hpp"

namespace pafs {

/// Advances a splitmix64 state and returns the next output word.
/// Used for seeding and for deriving independent stream keys; the generator
/// itself is xoshiro256++ below.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Hash-combines stream identifiers into one 64-bit seed. Every RNG stream in
/// the project is keyed as mix_seed(global_seed, purpose_tag, index...), so
/// parallel order can never change results.
inline std::uint64_t mix_seed(std::uint64_t a) {
  std::uint64_t s = a;
  return splitmix64_next(s);
}
template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) {
  std::uint64_t s = a + 0x632be59bd9b4e019ull;
  std::uint64_t h = splitmix64_next(s) ^ b;
  return mix_seed(h, rest...);
}

/// Stream purpose tags (arbitrary distinct constants).
namespace rng_stream {
inline constexpr std::uint64_t kInit = 0x01;
inline constexpr std::uint64_t kTrainEpisode = 0x02;
inline constexpr std::uint64_t kAugment = 0x03;
inline constexpr std::uint64_t kCplNegatives = 0x04;
inline constexpr std::uint64_t kValidation = 0x05;
inline constexpr std::uint64_t kEvalTask = 0x06;
inline constexpr std::uint64_t kSynth = 0x07;
}  // namespace rng_stream

/// Deterministic, platform-independent PRNG (xoshiro256++). The standard
/// library distributions are implementation-defined, so all integer/real
/// draws are derived here explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Unbiased draw from {0, ..., bound-1}; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw ContractError("uniform_below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % bound;
  }

  /// Uniform draw from the inclusive range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform_below(span));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (two fresh uniforms per call).
  double normal() {
    const double u1 = uniform_real();
    const double u2 = uniform_real();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Draws k distinct indices from {0, ..., n-1} by partial Fisher-Yates;
  /// order of the result is the draw order.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k < 0 || k > n)
      throw ContractError("sample_without_replacement: need 0 <= k <= n");
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const auto j =
          i + static_cast<int>(uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace pafs
