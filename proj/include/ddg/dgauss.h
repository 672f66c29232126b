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

#ifndef DDG_DGAUSS_H_
#define DDG_DGAUSS_H_

#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "absl/status/statusor.h"
#include "ddg/random.h"

namespace ddg {

// Floating type for pmf and convolution work. 60 decimal digits leaves ample
// headroom below the ~1e-38 log-ratios that appear at s^2 = 9.
using HighPrecision = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<60>,
    boost::multiprecision::et_off>;

// Scale parameter s of the discrete Gaussian N_Z(0, s^2), in integer (grid)
// units. The variance parameter s^2 is the primary representation so that
// values such as s^2 = 3 are held exactly.
class NoiseScale {
 public:
  // Requires s > 0.
  static absl::StatusOr<NoiseScale> FromStddev(double s);
  static absl::StatusOr<NoiseScale> FromVariance(double s_squared);
  // As FromStddev, but also enforces s >= 1/2, the regime in which the
  // sum-of-discrete-Gaussians privacy bounds hold.
  static absl::StatusOr<NoiseScale> ForProtocol(double s);

  double stddev() const { return stddev_; }
  double variance() const { return variance_; }

 private:
  explicit NoiseScale(double variance);

  double variance_;
  double stddev_;
};

// Exact sampler for N_Z(0, s^2): rejection from a discrete Laplace proposal
// with every Bernoulli trial decided in integer arithmetic, so no floating
// point approximation of the target law enters. The variance is held as the
// dyadic rational nearest to s^2 with 40 significant bits.
class DiscreteGaussianSampler {
 public:
  static constexpr int kMaxRejections = 1'000'000;

  explicit DiscreteGaussianSampler(NoiseScale scale);

  // Fails only if kMaxRejections consecutive proposals are rejected.
  absl::StatusOr<int64_t> Sample(RandomStream& rng) const;

  // Fills `out` with iid samples.
  absl::Status SampleInto(RandomStream& rng, std::span<int64_t> out) const;

  const NoiseScale& scale() const { return scale_; }

 private:
  NoiseScale scale_;
  // s^2 = var_num_ / var_den_, var_den_ a power of two.
  unsigned __int128 var_num_;
  unsigned __int128 var_den_;
  // Discrete Laplace proposal parameter, floor(s) + 1.
  uint64_t laplace_t_;
};

absl::StatusOr<int64_t> SampleDiscreteGaussian(const NoiseScale& scale,
                                               RandomStream& rng);

// Probability masses of N_Z(0, s^2) on [-support_radius, support_radius],
// each normalized by the full (untruncated) normalizer.
struct TruncatedPmf {
  int64_t support_radius = 0;
  // masses[x + support_radius] = P[X = x].
  std::vector<HighPrecision> masses;
  // Upper bound on the probability outside the support.
  HighPrecision tail_bound = 0;

  const HighPrecision& ExactMass(int64_t x) const {
    return masses[static_cast<size_t>(x + support_radius)];
  }
  // Zero outside the support.
  double Mass(int64_t x) const;
};

// Requires support_radius >= ceil(12 s) and tolerance > 0. Fails with
// OutOfRange when the tail mass beyond the radius exceeds `tolerance`.
absl::StatusOr<TruncatedPmf> ExactPmf(const NoiseScale& scale,
                                      int64_t support_radius,
                                      double tolerance);

// The normalizer sum_{y in Z} exp(-y^2 / 2 s^2), summed to full precision.
HighPrecision Normalizer(const HighPrecision& variance);

struct ConvolutionCloseness {
  // sup_z |log(P[Z_n = z] / P[W_n = z])| over the compared window.
  HighPrecision max_log_ratio = 0;
  // Integers with |z| <= window_radius were compared. Beyond it both masses
  // are below kRelativeCutoff times their mode.
  int64_t window_radius = 0;
  static constexpr double kRelativeCutoff = 1e-300;
};

// Compares the n-fold convolution of N_Z(0, s^2) with N_Z(0, n s^2) by
// exact repeated convolution in extended precision. `support_radius` is the
// per-summand truncation radius; it must hold all but 1e-15 of the mass and
// be wide enough that truncation perturbs the compared window by less than
// 1e-24 relative (see RequiredSupportRadius). count == 1 yields 0.
absl::StatusOr<ConvolutionCloseness> ConvolutionMaxLogRatio(
    int count, const NoiseScale& scale, int64_t support_radius);

// Smallest per-summand radius ConvolutionMaxLogRatio accepts for these
// arguments.
int64_t RequiredSupportRadius(int count, const NoiseScale& scale);

// 5 * sum_{k=1}^{n-1} exp(-2 pi^2 s^2 k / (k + 1)), the bound on the max
// divergence between the n-fold sum and a single discrete Gaussian.
double ConvolutionDivergenceBound(int count, double variance);

}  // namespace ddg

#endif  // DDG_DGAUSS_H_
