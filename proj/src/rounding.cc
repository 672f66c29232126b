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

#include "ddg/rounding.h"

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ddg/status_macros.h"

namespace ddg {

absl::StatusOr<RoundingParams> RoundingParams::Create(double gamma,
                                                      double beta,
                                                      int64_t dim) {
  if (!(gamma > 0) || !std::isfinite(gamma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("gamma must be positive, got ", gamma));
  }
  if (!(beta >= 0 && beta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("beta must lie in [0, 1), got ", beta));
  }
  if (dim < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension must be positive, got ", dim));
  }
  return RoundingParams{gamma, beta, dim};
}

absl::StatusOr<SensitivityBound> Delta2Bound(double c,
                                             const RoundingParams& params) {
  if (!(c > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip bound c must be positive, got ", c));
  }
  const double g = params.gamma;
  const double d = static_cast<double>(params.dim);
  const double sqrt_d = std::sqrt(d);
  const double worst = (c + g * sqrt_d) * (c + g * sqrt_d);
  double conditional = std::numeric_limits<double>::infinity();
  if (params.beta > 0) {
    conditional = c * c + g * g * d / 4 +
                  std::sqrt(2 * std::log(1 / params.beta)) * g *
                      (c + g * sqrt_d / 2);
  }
  SensitivityBound bound;
  if (conditional < worst) {
    bound.branch = SensitivityBranch::kConditional;
    bound.delta2 = std::sqrt(conditional);
  } else {
    bound.branch = SensitivityBranch::kWorstCase;
    bound.delta2 = c + g * sqrt_d;
  }
  bound.delta2_grid = bound.delta2 / g;
  return bound;
}

double L1NormBound(double x_l1, const RoundingParams& params) {
  if (params.beta <= 0) {
    return x_l1 + params.gamma * static_cast<double>(params.dim);
  }
  return x_l1 + params.gamma * std::sqrt(0.5 * static_cast<double>(params.dim) *
                                         std::log(1 / params.beta));
}

std::vector<int64_t> RoundToIntegers(std::span<const double> x_grid,
                                     RandomStream& rng) {
  std::vector<int64_t> out(x_grid.size());
  for (size_t i = 0; i < x_grid.size(); ++i) {
    const double lower = std::floor(x_grid[i]);
    const double frac = x_grid[i] - lower;
    int64_t v = static_cast<int64_t>(lower);
    // frac == 0 never rounds up, so grid points are fixed.
    if (UniformUnit(rng) < frac) ++v;
    out[i] = v;
  }
  return out;
}

std::vector<double> RandomizedRound(std::span<const double> x, double gamma,
                                    RandomStream& rng) {
  std::vector<double> scaled(x.size());
  for (size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] / gamma;
  const std::vector<int64_t> grid = RoundToIntegers(scaled, rng);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = gamma * static_cast<double>(grid[i]);
  }
  return out;
}

absl::StatusOr<ConditionalRoundResult> ConditionalRound(
    std::span<const double> x_grid, double c, const RoundingParams& params,
    RandomStream& rng) {
  if (static_cast<int64_t>(x_grid.size()) != params.dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("input has dimension ", x_grid.size(), ", expected ",
                     params.dim));
  }
  ASSIGN_OR_RETURN(const SensitivityBound bound, Delta2Bound(c, params));
  ConditionalRoundResult result;
  if (params.beta == 0) {
    result.grid = RoundToIntegers(x_grid, rng);
    return result;
  }
  const double limit = bound.delta2_grid * bound.delta2_grid;
  for (int attempt = 0; attempt < kMaxRoundingAttempts; ++attempt) {
    std::vector<int64_t> candidate = RoundToIntegers(x_grid, rng);
    double norm_sq = 0;
    for (int64_t v : candidate) {
      norm_sq += static_cast<double>(v) * static_cast<double>(v);
    }
    if (norm_sq <= limit) {
      result.grid = std::move(candidate);
      result.retries = attempt;
      return result;
    }
  }
  return absl::ResourceExhaustedError(absl::StrCat(
      "conditional rounding rejected all ", kMaxRoundingAttempts,
      " attempts (empirical acceptance rate 0/", kMaxRoundingAttempts,
      "); beta = ", params.beta, " and gamma = ", params.gamma,
      " are inconsistent with the input norm"));
}

}  // namespace ddg
