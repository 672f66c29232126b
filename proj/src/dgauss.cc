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

#include "ddg/dgauss.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ddg/status_macros.h"

namespace ddg {

namespace {

using u128 = unsigned __int128;

// Largest variance the exact sampler represents without 128-bit overflow.
constexpr double kMaxVariance = 0x1.0p60;
// Significant bits kept when snapping s^2 to a dyadic rational.
constexpr int kVarianceBits = 40;
constexpr int kMaxDenominatorLog2 = 60;

// Bernoulli(num / den), den > 0, num <= den.
bool BernoulliRational(RandomStream& rng, u128 num, u128 den) {
  return UniformBelow128(rng, den) < num;
}

// Bernoulli(exp(-num / den)) for num <= den.
bool BernoulliExpNegSmall(RandomStream& rng, u128 num, u128 den) {
  u128 k = 1;
  while (BernoulliRational(rng, num, den * k)) ++k;
  return (k & 1) == 1;
}

// Bernoulli(exp(-num / den)) for any num >= 0.
bool BernoulliExpNeg(RandomStream& rng, u128 num, u128 den) {
  u128 whole = num / den;
  for (; whole > 0; --whole) {
    if (!BernoulliExpNegSmall(rng, 1, 1)) return false;
  }
  return BernoulliExpNegSmall(rng, num % den, den);
}

// Discrete Laplace with P[X = x] proportional to exp(-|x| / t).
int64_t SampleDiscreteLaplace(RandomStream& rng, uint64_t t) {
  for (;;) {
    const uint64_t u = UniformBelow(rng, t);
    if (!BernoulliExpNeg(rng, u, t)) continue;
    uint64_t v = 0;
    while (BernoulliExpNegSmall(rng, 1, 1)) ++v;
    const uint64_t x = u + t * v;
    const bool negative = (rng() >> 63) != 0;
    if (negative && x == 0) continue;
    return negative ? -static_cast<int64_t>(x) : static_cast<int64_t>(x);
  }
}

HighPrecision ExpNegSquare(int64_t x, const HighPrecision& variance) {
  const HighPrecision hx = x;
  return exp(-(hx * hx) / (2 * variance));
}

}  // namespace

NoiseScale::NoiseScale(double variance)
    : variance_(variance), stddev_(std::sqrt(variance)) {}

absl::StatusOr<NoiseScale> NoiseScale::FromVariance(double s_squared) {
  if (!(s_squared > 0) || !std::isfinite(s_squared)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise scale must be positive, got s^2 = ", s_squared));
  }
  if (s_squared > kMaxVariance) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise scale too large for exact sampling: s^2 = ",
                     s_squared));
  }
  return NoiseScale(s_squared);
}

absl::StatusOr<NoiseScale> NoiseScale::FromStddev(double s) {
  if (!(s > 0) || !std::isfinite(s)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise scale must be positive, got s = ", s));
  }
  return FromVariance(s * s);
}

absl::StatusOr<NoiseScale> NoiseScale::ForProtocol(double s) {
  if (!(s >= 0.5)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "noise scale s = ", s, " is below 1/2 (grid units); the privacy "
        "bounds for sums of discrete Gaussians do not apply"));
  }
  return FromStddev(s);
}

DiscreteGaussianSampler::DiscreteGaussianSampler(NoiseScale scale)
    : scale_(scale) {
  const double v = scale.variance();
  int k = kVarianceBits - std::ilogb(v);
  k = std::clamp(k, 0, kMaxDenominatorLog2);
  var_den_ = static_cast<u128>(1) << k;
  var_num_ = static_cast<u128>(std::llround(std::ldexp(v, k)));
  laplace_t_ = static_cast<uint64_t>(std::floor(std::sqrt(v))) + 1;
}

absl::StatusOr<int64_t> DiscreteGaussianSampler::Sample(
    RandomStream& rng) const {
  // s^2 below 2^-61: the law is a point mass at 0 to within exp(-2^59).
  if (var_num_ == 0) return 0;
  const u128 t = laplace_t_;
  const u128 qt = var_den_ * t;
  // Beyond this |y| the integer arithmetic would overflow; the acceptance
  // probability there is below exp(-2^40).
  const u128 max_abs = (static_cast<u128>(1) << 62) / qt;
  const u128 den = 2 * var_num_ * var_den_ * t * t;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const int64_t y = SampleDiscreteLaplace(rng, laplace_t_);
    const u128 abs_y = static_cast<u128>(y < 0 ? -y : y);
    if (abs_y > max_abs) continue;
    // Accept with probability exp(-(|y| - s^2/t)^2 / (2 s^2)), written over
    // the common denominator 2 p q t^2 where s^2 = p / q.
    const u128 scaled = abs_y * qt;
    const u128 diff =
        scaled >= var_num_ ? scaled - var_num_ : var_num_ - scaled;
    if (BernoulliExpNeg(rng, diff * diff, den)) return y;
  }
  return absl::InternalError(absl::StrCat(
      "discrete Gaussian sampler rejected ", kMaxRejections,
      " consecutive proposals at s^2 = ", scale_.variance()));
}

absl::Status DiscreteGaussianSampler::SampleInto(RandomStream& rng,
                                                 std::span<int64_t> out) const {
  for (int64_t& v : out) {
    ASSIGN_OR_RETURN(v, Sample(rng));
  }
  return absl::OkStatus();
}

absl::StatusOr<int64_t> SampleDiscreteGaussian(const NoiseScale& scale,
                                               RandomStream& rng) {
  return DiscreteGaussianSampler(scale).Sample(rng);
}

double TruncatedPmf::Mass(int64_t x) const {
  if (x < -support_radius || x > support_radius) return 0.0;
  return static_cast<double>(ExactMass(x));
}

HighPrecision Normalizer(const HighPrecision& variance) {
  const HighPrecision eps = std::numeric_limits<HighPrecision>::epsilon();
  const HighPrecision pi = boost::math::constants::pi<HighPrecision>();
  if (variance >= 1) {
    // Poisson summation: sum_y exp(-y^2/2v) = sqrt(2 pi v) *
    // sum_k exp(-2 pi^2 v k^2), which converges after a handful of terms.
    HighPrecision sum = 1;
    for (int64_t k = 1;; ++k) {
      const HighPrecision kk = k;
      const HighPrecision term = 2 * exp(-2 * pi * pi * variance * kk * kk);
      sum += term;
      if (term < eps * sum) break;
    }
    return sqrt(2 * pi * variance) * sum;
  }
  HighPrecision sum = 1;
  for (int64_t y = 1;; ++y) {
    const HighPrecision term = 2 * ExpNegSquare(y, variance);
    sum += term;
    if (term < eps * sum) break;
  }
  return sum;
}

absl::StatusOr<TruncatedPmf> ExactPmf(const NoiseScale& scale,
                                      int64_t support_radius,
                                      double tolerance) {
  const int64_t min_radius =
      static_cast<int64_t>(std::ceil(12 * scale.stddev()));
  if (support_radius < min_radius) {
    return absl::InvalidArgumentError(
        absl::StrCat("support radius ", support_radius,
                     " is below ceil(12 s) = ", min_radius));
  }
  if (!(tolerance > 0)) {
    return absl::InvalidArgumentError("tolerance must be positive");
  }
  const HighPrecision variance = scale.variance();
  const HighPrecision z = Normalizer(variance);

  TruncatedPmf pmf;
  pmf.support_radius = support_radius;
  pmf.masses.resize(static_cast<size_t>(2 * support_radius + 1));
  for (int64_t x = 0; x <= support_radius; ++x) {
    const HighPrecision m = ExpNegSquare(x, variance) / z;
    pmf.masses[static_cast<size_t>(support_radius + x)] = m;
    pmf.masses[static_cast<size_t>(support_radius - x)] = m;
  }
  // Consecutive unnormalized terms beyond R shrink at least geometrically
  // with ratio exp(-(2R + 3) / 2 s^2).
  const HighPrecision first = ExpNegSquare(support_radius + 1, variance);
  const HighPrecision ratio = exp(-HighPrecision(2 * support_radius + 3) /
                                  (2 * variance));
  pmf.tail_bound = 2 * first / (1 - ratio) / z;
  if (pmf.tail_bound > tolerance) {
    return absl::OutOfRangeError(absl::StrCat(
        "tail mass beyond radius ", support_radius, " is ",
        static_cast<double>(pmf.tail_bound), ", above tolerance ",
        tolerance));
  }
  return pmf;
}

namespace {

constexpr double kPmfTailTolerance = 1e-15;
// Truncating each summand at R perturbs P[Z_n = z] by less than the
// returned factor when R - |z|/n exceeds this many conditional standard
// deviations. The factor sits well below the divergence being measured.
double TruncationSigmas(int count, const NoiseScale& scale) {
  const double expected = ConvolutionDivergenceBound(count, scale.variance());
  const double relative_error =
      std::clamp(1e-6 * expected, 1e-55, 1e-24);
  return std::sqrt(2 * std::log(1 / relative_error));
}

// Standard deviation of one summand given the total, ~ s sqrt((n-1)/n).
double ConditionalStddev(int count, const NoiseScale& scale) {
  return scale.stddev() * std::sqrt(static_cast<double>(count - 1) / count);
}

int64_t ReferenceWindow(int count, const NoiseScale& scale) {
  const double total_variance = count * scale.variance();
  return static_cast<int64_t>(std::floor(std::sqrt(
      2 * total_variance *
      std::log(1 / ConvolutionCloseness::kRelativeCutoff))));
}

std::vector<HighPrecision> Convolve(const std::vector<HighPrecision>& a,
                                    const std::vector<HighPrecision>& b) {
  std::vector<HighPrecision> out(a.size() + b.size() - 1, HighPrecision(0));
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace

int64_t RequiredSupportRadius(int count, const NoiseScale& scale) {
  const int64_t min_radius =
      static_cast<int64_t>(std::ceil(12 * scale.stddev()));
  if (count <= 1) return min_radius;
  const double needed =
      static_cast<double>(ReferenceWindow(count, scale) + 1) / count +
      TruncationSigmas(count, scale) * ConditionalStddev(count, scale);
  return std::max(min_radius, static_cast<int64_t>(std::ceil(needed)));
}

absl::StatusOr<ConvolutionCloseness> ConvolutionMaxLogRatio(
    int count, const NoiseScale& scale, int64_t support_radius) {
  if (count < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("count must be positive, got ", count));
  }
  ASSIGN_OR_RETURN(TruncatedPmf pmf,
                   ExactPmf(scale, support_radius, kPmfTailTolerance));
  ConvolutionCloseness result;
  if (count == 1) {
    result.window_radius = support_radius;
    return result;
  }

  const int64_t total_radius = count * support_radius;
  const HighPrecision total_variance =
      HighPrecision(count) * HighPrecision(scale.variance());
  const HighPrecision w_tail = [&] {
    const HighPrecision first = ExpNegSquare(total_radius + 1, total_variance);
    const HighPrecision ratio = exp(-HighPrecision(2 * total_radius + 3) /
                                    (2 * total_variance));
    return 2 * first / (1 - ratio) / Normalizer(total_variance);
  }();
  if (w_tail > kPmfTailTolerance) {
    return absl::FailedPreconditionError(absl::StrCat(
        "N_Z(0, n s^2) carries more than 1e-15 mass outside radius ",
        total_radius));
  }

  std::vector<HighPrecision> conv = pmf.masses;
  for (int i = 1; i < count; ++i) conv = Convolve(conv, pmf.masses);
  auto conv_at = [&](int64_t z) -> const HighPrecision& {
    return conv[static_cast<size_t>(z + total_radius)];
  };

  // Window: every z where either mass is at least kRelativeCutoff of its
  // mode. Outside it the ratio of two negligible tails carries no signal.
  int64_t window = std::min(ReferenceWindow(count, scale), total_radius);
  const HighPrecision conv_floor =
      conv_at(0) * HighPrecision(ConvolutionCloseness::kRelativeCutoff);
  for (int64_t z = total_radius; z > window; --z) {
    if (conv_at(z) >= conv_floor) {
      window = z;
      break;
    }
  }
  const double reliable =
      count * (static_cast<double>(support_radius) -
               TruncationSigmas(count, scale) * ConditionalStddev(count, scale));
  if (static_cast<double>(window) > reliable) {
    return absl::FailedPreconditionError(absl::StrCat(
        "support radius ", support_radius, " too small to compare out to |z| = ",
        window, "; need at least ", RequiredSupportRadius(count, scale)));
  }

  const HighPrecision w_norm = Normalizer(total_variance);
  HighPrecision worst = 0;
  for (int64_t z = 0; z <= window; ++z) {
    const HighPrecision w = ExpNegSquare(z, total_variance) / w_norm;
    const HighPrecision ratio = abs(log(conv_at(z) / w));
    if (ratio > worst) worst = ratio;
  }
  result.max_log_ratio = worst;
  result.window_radius = window;
  return result;
}

double ConvolutionDivergenceBound(int count, double variance) {
  constexpr double kPi = std::numbers::pi;
  double sum = 0;
  for (int k = 1; k < count; ++k) {
    sum += std::exp(-2 * kPi * kPi * variance * k / (k + 1.0));
  }
  return 5 * sum;
}

}  // namespace ddg
