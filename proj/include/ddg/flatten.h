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

#ifndef DDG_FLATTEN_H_
#define DDG_FLATTEN_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace ddg {

// Original dimension and the power of two it is zero-padded to.
class PaddedDim {
 public:
  static absl::StatusOr<PaddedDim> Create(int64_t original);

  int64_t original() const { return original_; }
  int64_t padded() const { return padded_; }

 private:
  PaddedDim(int64_t original, int64_t padded)
      : original_(original), padded_(padded) {}

  int64_t original_;
  int64_t padded_;
};

// Public random signs xi in {-1, +1}^d, expanded from a 64-bit seed with the
// SplitMix64 counter-mode PRF (bit j of block i/64 gives coordinate i).
class SignVector {
 public:
  // `dim` must be a power of two.
  static absl::StatusOr<SignVector> FromSeed(uint64_t seed, int64_t dim);

  uint64_t seed() const { return seed_; }
  int64_t size() const { return static_cast<int64_t>(signs_.size()); }
  std::span<const int8_t> signs() const { return signs_; }

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  SignVector(uint64_t seed, std::vector<int8_t> signs)
      : seed_(seed), signs_(std::move(signs)) {}

  uint64_t seed_;
  std::vector<int8_t> signs_;
};

// Flattening quality constant of the Walsh-Hadamard construction: entries of
// H_d are +-1/sqrt(d), so each coordinate of H D x is subgaussian with
// variance proxy rho ||x||^2 / d with rho = 1.
inline constexpr double kHadamardFlatness = 1.0;

enum class TransformDirection { kForward, kInverse };

bool IsPowerOfTwo(int64_t n);

// In-place orthonormal Walsh-Hadamard transform (Sylvester ordering). The
// matrix is symmetric and orthogonal, so both directions apply the same map.
absl::Status Wht(std::span<double> x,
                 TransformDirection direction = TransformDirection::kForward);

// H (xi .* x).
absl::StatusOr<std::vector<double>> Flatten(std::span<const double> x,
                                            const SignVector& xi);

// xi .* (H^T y), the inverse of Flatten.
absl::StatusOr<std::vector<double>> Unflatten(std::span<const double> y,
                                              const SignVector& xi);

}  // namespace ddg

#endif  // DDG_FLATTEN_H_
