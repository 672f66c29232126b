/*
 * Copyright 2026 The DDG Authors.
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

#ifndef DDG_RANDOM_H_
#define DDG_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ddg {

// SplitMix64 output function. Used as a keyed counter-mode PRF for every
// piece of derived randomness (shared sign vectors, per-client streams), so
// that two processes holding the same seed reproduce identical bits.
constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Block `counter` of the PRF keyed by `seed`.
constexpr uint64_t PrfBlock(uint64_t seed, uint64_t counter) {
  return SplitMix64(SplitMix64(seed) ^ (counter * 0xd1b54a32d192ed03ULL));
}

// Derives a child seed from a parent seed and a path of labels, e.g.
// DeriveSeed(master, {kClientStream, client, round}).
constexpr uint64_t DeriveSeed(uint64_t seed,
                              std::initializer_list<uint64_t> path) {
  uint64_t s = seed;
  uint64_t depth = 0;
  for (uint64_t label : path) s = PrfBlock(s ^ ++depth, label);
  return s;
}

// Labels for seed derivation; values are part of the reproducibility
// contract and must not change.
inline constexpr uint64_t kSignLabel = 0x5349474e;      // "SIGN"
inline constexpr uint64_t kClientLabel = 0x434c4e54;    // "CLNT"
inline constexpr uint64_t kMaskLabel = 0x4d41534b;      // "MASK"
inline constexpr uint64_t kDataLabel = 0x44415441;      // "DATA"
inline constexpr uint64_t kBaselineLabel = 0x42415345;  // "BASE"

// The random stream type used throughout. std::mt19937_64 is fully specified
// by the standard, so raw outputs are identical across platforms. We never
// use std::uniform_*_distribution on it where bit-exactness matters.
using RandomStream = std::mt19937_64;

inline RandomStream MakeStream(uint64_t seed) { return RandomStream(seed); }

// Uniform double in [0, 1) with 53 random bits.
inline double UniformUnit(RandomStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound), bound > 0, by rejection (no modulo bias).
inline uint64_t UniformBelow(RandomStream& rng, uint64_t bound) {
  const uint64_t limit = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const uint64_t r = rng();
    if (r >= limit) return r % bound;
  }
}

// Uniform integer in [0, bound) for 128-bit bounds.
inline unsigned __int128 UniformBelow128(RandomStream& rng,
                                         unsigned __int128 bound) {
  if (bound >> 64 == 0) return UniformBelow(rng, static_cast<uint64_t>(bound));
  int bits = 128 - __builtin_clzll(static_cast<uint64_t>(bound >> 64));
  const unsigned __int128 mask =
      bits == 128 ? ~static_cast<unsigned __int128>(0)
                  : ((static_cast<unsigned __int128>(1) << bits) - 1);
  for (;;) {
    unsigned __int128 r = (static_cast<unsigned __int128>(rng()) << 64) | rng();
    r &= mask;
    if (r < bound) return r;
  }
}

}  // namespace ddg

#endif  // DDG_RANDOM_H_
