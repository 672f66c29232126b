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

#ifndef DDG_ROUNDING_H_
#define DDG_ROUNDING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "ddg/random.h"

namespace ddg {

struct RoundingParams {
  double gamma = 1.0;  // grid granularity
  double beta = 0.0;   // conditioning parameter; 0 means unconditional
  int64_t dim = 1;

  // Requires gamma > 0, 0 <= beta < 1, dim >= 1.
  static absl::StatusOr<RoundingParams> Create(double gamma, double beta,
                                               int64_t dim);
};

enum class SensitivityBranch { kConditional, kWorstCase };

// l2 sensitivity of one client's rounded contribution.
struct SensitivityBound {
  double delta2 = 0;       // original units
  double delta2_grid = 0;  // delta2 / gamma
  SensitivityBranch branch = SensitivityBranch::kWorstCase;
};

// Delta_2 = sqrt(min{c^2 + gamma^2 d/4 + sqrt(2 log(1/beta)) gamma
// (c + gamma sqrt(d)/2), (c + gamma sqrt(d))^2}). With beta = 0 the first
// branch is infinite and the worst case applies. Requires c > 0.
absl::StatusOr<SensitivityBound> Delta2Bound(double c,
                                             const RoundingParams& params);

// Bound on ||R(x)||_1 holding with probability >= 1 - beta for an input with
// l1 norm `x_l1`. Only used by the three-branch accountant.
double L1NormBound(double x_l1, const RoundingParams& params);

// Unbiased randomized rounding of a grid-units vector to Z^d: coordinate i
// becomes floor(x_i) + 1 with probability x_i - floor(x_i).
std::vector<int64_t> RoundToIntegers(std::span<const double> x_grid,
                                     RandomStream& rng);

// Randomized rounding of `x` to gamma Z^d, returned in original units.
std::vector<double> RandomizedRound(std::span<const double> x, double gamma,
                                    RandomStream& rng);

struct ConditionalRoundResult {
  std::vector<int64_t> grid;  // the rounded vector in grid units
  int retries = 0;            // attempts beyond the first
};

// Conditional randomized rounding: repeats RoundToIntegers until the squared
// norm is at most delta2_grid^2 from Delta2Bound(c, params). `x_grid` must
// already be clipped and rescaled, ||x_grid|| <= c / gamma. With beta = 0 the
// norm test is skipped. Fails with ResourceExhausted after kMaxAttempts.
inline constexpr int kMaxRoundingAttempts = 1000;
absl::StatusOr<ConditionalRoundResult> ConditionalRound(
    std::span<const double> x_grid, double c, const RoundingParams& params,
    RandomStream& rng);

}  // namespace ddg

#endif  // DDG_ROUNDING_H_
