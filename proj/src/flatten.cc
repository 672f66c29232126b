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

#include "ddg/flatten.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ddg/random.h"
#include "ddg/status_macros.h"

namespace ddg {

bool IsPowerOfTwo(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

absl::StatusOr<PaddedDim> PaddedDim::Create(int64_t original) {
  if (original < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension must be positive, got ", original));
  }
  if (original > (int64_t{1} << 40)) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension ", original, " is too large"));
  }
  int64_t padded = 1;
  while (padded < original) padded <<= 1;
  return PaddedDim(original, padded);
}

absl::StatusOr<SignVector> SignVector::FromSeed(uint64_t seed, int64_t dim) {
  if (!IsPowerOfTwo(dim)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sign vector length ", dim, " is not a power of two"));
  }
  std::vector<int8_t> signs(static_cast<size_t>(dim));
  uint64_t block = 0;
  for (int64_t i = 0; i < dim; ++i) {
    if (i % 64 == 0) block = PrfBlock(seed, static_cast<uint64_t>(i / 64));
    signs[static_cast<size_t>(i)] = ((block >> (i % 64)) & 1) ? -1 : 1;
  }
  return SignVector(seed, std::move(signs));
}

absl::Status Wht(std::span<double> x, TransformDirection /*direction*/) {
  const int64_t n = static_cast<int64_t>(x.size());
  if (!IsPowerOfTwo(n)) {
    return absl::InvalidArgumentError(
        absl::StrCat("transform length ", n, " is not a power of two"));
  }
  for (int64_t half = 1; half < n; half <<= 1) {
    for (int64_t block = 0; block < n; block += 2 * half) {
      for (int64_t j = block; j < block + half; ++j) {
        const double a = x[j];
        const double b = x[j + half];
        x[j] = a + b;
        x[j + half] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : x) v *= scale;
  return absl::OkStatus();
}

namespace {

absl::Status CheckLengths(size_t input, const SignVector& xi) {
  if (static_cast<int64_t>(input) != xi.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("vector length ", input, " does not match sign vector "
                     "length ", xi.size()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::vector<double>> Flatten(std::span<const double> x,
                                            const SignVector& xi) {
  RETURN_IF_ERROR(CheckLengths(x.size(), xi));
  std::vector<double> out(x.begin(), x.end());
  const auto signs = xi.signs();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= signs[i];
  RETURN_IF_ERROR(Wht(out, TransformDirection::kForward));
  return out;
}

absl::StatusOr<std::vector<double>> Unflatten(std::span<const double> y,
                                              const SignVector& xi) {
  RETURN_IF_ERROR(CheckLengths(y.size(), xi));
  std::vector<double> out(y.begin(), y.end());
  RETURN_IF_ERROR(Wht(out, TransformDirection::kInverse));
  const auto signs = xi.signs();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= signs[i];
  return out;
}

}  // namespace ddg
