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

#include "ddg/modular.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ddg/status_macros.h"

namespace ddg {

absl::StatusOr<Modulus> Modulus::FromBits(int bit_width) {
  if (bit_width < 1 || bit_width > kMaxBits) {
    return absl::InvalidArgumentError(absl::StrCat(
        "bit width must lie in [1, ", kMaxBits, "], got ", bit_width));
  }
  return Modulus(int64_t{1} << bit_width, bit_width);
}

absl::StatusOr<Modulus> Modulus::FromValue(int64_t m) {
  if (m < 2 || m % 2 != 0 || m > (int64_t{1} << kMaxBits)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "modulus must be even and in [2, 2^", kMaxBits, "], got ", m));
  }
  int bits = 0;
  while ((int64_t{1} << bits) < m) ++bits;
  return Modulus(m, bits);
}

absl::StatusOr<ResidueVector> ResidueVector::Create(
    std::vector<int64_t> residues, Modulus modulus) {
  for (size_t i = 0; i < residues.size(); ++i) {
    if (residues[i] < 0 || residues[i] >= modulus.value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("residue ", residues[i], " at index ", i,
                       " outside [0, ", modulus.value(), ")"));
    }
  }
  return ResidueVector(std::move(residues), modulus);
}

ResidueVector ResidueVector::Zeros(int64_t dim, Modulus modulus) {
  return ResidueVector(std::vector<int64_t>(static_cast<size_t>(dim), 0),
                       modulus);
}

ResidueVector ModReduce(std::span<const int64_t> v, const Modulus& modulus) {
  const int64_t m = modulus.value();
  std::vector<int64_t> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    int64_t r = v[i] % m;
    if (r < 0) r += m;
    out[i] = r;
  }
  return ResidueVector(std::move(out), modulus);
}

std::vector<int64_t> Center(const ResidueVector& z) {
  const int64_t m = z.modulus().value();
  const int64_t half = m / 2;
  std::vector<int64_t> out(z.residues().begin(), z.residues().end());
  for (int64_t& v : out) {
    if (v > half) v -= m;
  }
  return out;
}

double ModClipReal(double x, double a, double b) {
  const double width = b - a;
  double y = x - std::floor((x - a) / width) * width;
  // Guard against the quotient rounding across an integer.
  if (y < a) y += width;
  if (y >= b) y -= width;
  return y;
}

namespace {

absl::Status CheckCompatible(std::span<const ResidueVector> messages) {
  if (messages.empty()) {
    return absl::InvalidArgumentError("no messages to aggregate");
  }
  const ResidueVector& first = messages.front();
  for (size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].size() != first.size() ||
        !(messages[i].modulus() == first.modulus())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "message ", i, " has shape (d = ", messages[i].size(), ", m = ",
          messages[i].modulus().value(), "), expected (d = ", first.size(),
          ", m = ", first.modulus().value(), ")"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::vector<ResidueVector>> MaskMessages(
    std::span<const ResidueVector> messages, RandomStream& rng) {
  RETURN_IF_ERROR(CheckCompatible(messages));
  const Modulus modulus = messages.front().modulus();
  const int64_t m = modulus.value();
  const size_t d = static_cast<size_t>(messages.front().size());
  // The last client's mask is minus the sum of the others, so masks sum to 0.
  std::vector<int64_t> running(d, 0);
  std::vector<ResidueVector> out;
  out.reserve(messages.size());
  for (size_t i = 0; i < messages.size(); ++i) {
    std::vector<int64_t> blinded(d);
    for (size_t j = 0; j < d; ++j) {
      int64_t mask;
      if (i + 1 < messages.size()) {
        mask = static_cast<int64_t>(UniformBelow(rng, static_cast<uint64_t>(m)));
        running[j] = (running[j] + mask) % m;
      } else {
        mask = (m - running[j]) % m;
      }
      blinded[j] = (messages[i].residues()[j] + mask) % m;
    }
    ASSIGN_OR_RETURN(ResidueVector v,
                     ResidueVector::Create(std::move(blinded), modulus));
    out.push_back(std::move(v));
  }
  return out;
}

absl::StatusOr<SecAggResult> SecAggSum(std::span<const ResidueVector> messages,
                                       bool masked, RandomStream& rng) {
  RETURN_IF_ERROR(CheckCompatible(messages));
  std::vector<ResidueVector> blinded;
  if (masked) {
    ASSIGN_OR_RETURN(blinded, MaskMessages(messages, rng));
    messages = blinded;
  }
  const Modulus modulus = messages.front().modulus();
  const int64_t m = modulus.value();
  std::vector<int64_t> sum(static_cast<size_t>(messages.front().size()), 0);
  for (const ResidueVector& msg : messages) {
    const auto r = msg.residues();
    for (size_t j = 0; j < sum.size(); ++j) sum[j] = (sum[j] + r[j]) % m;
  }
  ASSIGN_OR_RETURN(ResidueVector total,
                   ResidueVector::Create(std::move(sum), modulus));
  return SecAggResult(std::move(total),
                      static_cast<int64_t>(messages.size()));
}

absl::StatusOr<ModClipError> ModClipErrorBound(double r, double proxy_sigma,
                                               double log_omega) {
  if (!(r > 0) || !(proxy_sigma > 0)) {
    return absl::InvalidArgumentError("range and proxy sigma must be positive");
  }
  if (proxy_sigma > r) {
    return absl::InvalidArgumentError(absl::StrCat(
        "proxy sigma ", proxy_sigma, " exceeds the clipping range ", r));
  }
  // Symmetric range [-r, r]: b - a = 2r and the a^2 - b^2 terms vanish,
  // leaving a factor 2 from the two exponentials.
  const double log_tail = log_omega - r * r / (2 * proxy_sigma * proxy_sigma);
  ModClipError bound;
  bound.abs_bound = std::exp(std::log(4 * r) + log_tail);
  bound.sq_bound = std::exp(std::log(8 * r * r) + log_tail);
  return bound;
}

}  // namespace ddg
