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

#ifndef DDG_MODULAR_H_
#define DDG_MODULAR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ddg/random.h"

namespace ddg {

// Group size m of Z_m. Protocol moduli are m = 2^B with 1 <= B <= 62 so that
// sums of two residues never overflow int64.
class Modulus {
 public:
  static constexpr int kMaxBits = 62;

  // 2^16.
  Modulus() : Modulus(int64_t{1} << 16, 16) {}

  static absl::StatusOr<Modulus> FromBits(int bit_width);
  // Any even m in [2, 2^62]; bit_width() is then ceil(log2 m).
  static absl::StatusOr<Modulus> FromValue(int64_t m);

  int64_t value() const { return m_; }
  int bit_width() const { return bits_; }
  int64_t half() const { return m_ / 2; }

  friend bool operator==(const Modulus&, const Modulus&) = default;

 private:
  Modulus(int64_t m, int bits) : m_(m), bits_(bits) {}

  int64_t m_;
  int bits_;
};

// A vector of residues in [0, m).
class ResidueVector {
 public:
  // Fails if any entry lies outside [0, m).
  static absl::StatusOr<ResidueVector> Create(std::vector<int64_t> residues,
                                              Modulus modulus);
  static ResidueVector Zeros(int64_t dim, Modulus modulus);

  std::span<const int64_t> residues() const { return residues_; }
  const Modulus& modulus() const { return modulus_; }
  int64_t size() const { return static_cast<int64_t>(residues_.size()); }

  friend bool operator==(const ResidueVector&, const ResidueVector&) = default;

 private:
  friend ResidueVector ModReduce(std::span<const int64_t>, const Modulus&);

  ResidueVector(std::vector<int64_t> residues, Modulus modulus)
      : residues_(std::move(residues)), modulus_(modulus) {}

  std::vector<int64_t> residues_;
  Modulus modulus_;
};

// Entrywise nonnegative residue of `v` mod m.
ResidueVector ModReduce(std::span<const int64_t> v, const Modulus& modulus);

// Maps each residue to its representative in {1 - m/2, ..., m/2}.
std::vector<int64_t> Center(const ResidueVector& z);

// Modular clipping of a real into [a, b): x + (b - a) n for the unique
// integer n landing in [a, b). A value congruent to both endpoints maps to
// a. Requires a < b.
double ModClipReal(double x, double a, double b);

// The only view of client data the server receives: the modular sum.
// Instances come exclusively from SecAggSum.
class SecAggResult {
 public:
  const ResidueVector& sum() const { return sum_; }
  int64_t num_messages() const { return num_messages_; }

 private:
  friend absl::StatusOr<SecAggResult> SecAggSum(
      std::span<const ResidueVector>, bool, RandomStream&);

  SecAggResult(ResidueVector sum, int64_t num_messages)
      : sum_(std::move(sum)), num_messages_(num_messages) {}

  ResidueVector sum_;
  int64_t num_messages_;
};

// Adds uniform masks in Z_m^d that sum to zero mod m. Each returned message
// is marginally uniform; their sum equals the sum of the inputs.
absl::StatusOr<std::vector<ResidueVector>> MaskMessages(
    std::span<const ResidueVector> messages, RandomStream& rng);

// Simulated secure aggregation: the sum of `messages` mod m. With `masked`,
// messages are first blinded by MaskMessages; the result is identical.
// Fails on an empty input or mismatched dimensions/moduli.
absl::StatusOr<SecAggResult> SecAggSum(std::span<const ResidueVector> messages,
                                       bool masked, RandomStream& rng);

struct ModClipError {
  double abs_bound = 0;  // bound on E|M(X) - X|
  double sq_bound = 0;   // bound on E(M(X) - X)^2
};

// Expected modular-clipping error on [-r, r] for a centered X with
// E[exp(tX)] <= exp(log_omega) exp(t^2 proxy_sigma^2 / 2). Requires
// 0 < proxy_sigma <= r.
absl::StatusOr<ModClipError> ModClipErrorBound(double r, double proxy_sigma,
                                               double log_omega);

}  // namespace ddg

#endif  // DDG_MODULAR_H_
