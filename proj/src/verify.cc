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

#include "ddg/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ddg/dgauss.h"
#include "ddg/flatten.h"
#include "ddg/random.h"
#include "ddg/rounding.h"
#include "ddg/status_macros.h"

namespace ddg {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const VerifyCheck& c) { return c.passed; });
}

const std::vector<std::string>& VerifySuiteNames() {
  static const auto* names = new std::vector<std::string>{
      "convolution", "sampler", "transform", "rounding"};
  return *names;
}

namespace {

constexpr uint64_t kVerifySeed = 0x5eed'0f'7e57ULL;

// s^2 minus the exact variance of N_Z(0, s^2), at 100 digits.
double VarianceDeficit(double variance) {
  using Float100 = boost::multiprecision::cpp_bin_float_100;
  const int64_t radius =
      static_cast<int64_t>(std::ceil(60 * std::sqrt(variance))) + 10;
  const Float100 v(variance);
  Float100 total = 0;
  Float100 second = 0;
  for (int64_t x = -radius; x <= radius; ++x) {
    const Float100 w = exp(-Float100(x * x) / (2 * v));
    total += w;
    second += w * x * x;
  }
  return static_cast<double>(v - second / total);
}

VerifyCheck AtMost(std::string name, double measured, double threshold) {
  return {std::move(name), measured, threshold, measured <= threshold};
}

absl::Status ConvolutionSuite(VerifyReport& report) {
  ASSIGN_OR_RETURN(const NoiseScale three, NoiseScale::FromVariance(3));
  ASSIGN_OR_RETURN(const ConvolutionCloseness pair,
                   ConvolutionMaxLogRatio(2, three, 60));
  report.checks.push_back(AtMost("max_log_ratio n=2 s2=3 R=60",
                                 static_cast<double>(pair.max_log_ratio),
                                 1e-12));
  for (double s2 : {3.0, 9.0}) {
    ASSIGN_OR_RETURN(const NoiseScale scale, NoiseScale::FromVariance(s2));
    for (int count : {2, 3, 5, 10}) {
      const int64_t radius = RequiredSupportRadius(count, scale);
      ASSIGN_OR_RETURN(const ConvolutionCloseness c,
                       ConvolutionMaxLogRatio(count, scale, radius));
      report.checks.push_back(AtMost(
          absl::StrCat("max_log_ratio n=", count, " s2=", s2),
          static_cast<double>(c.max_log_ratio),
          ConvolutionDivergenceBound(count, s2)));
    }
  }
  return absl::OkStatus();
}

absl::Status SamplerSuite(VerifyReport& report) {
  constexpr int kSamples = 1'000'000;
  for (double s : {1.0, 3.0}) {
    ASSIGN_OR_RETURN(const NoiseScale scale, NoiseScale::FromStddev(s));
    const DiscreteGaussianSampler sampler(scale);
    RandomStream rng = MakeStream(DeriveSeed(
        kVerifySeed, {static_cast<uint64_t>(s * 1000)}));
    std::map<int64_t, int64_t> counts;
    double sum = 0;
    double sum_sq = 0;
    for (int i = 0; i < kSamples; ++i) {
      ASSIGN_OR_RETURN(const int64_t x, sampler.Sample(rng));
      ++counts[x];
      sum += static_cast<double>(x);
      sum_sq += static_cast<double>(x) * static_cast<double>(x);
    }
    const int64_t radius = static_cast<int64_t>(std::ceil(20 * s));
    ASSIGN_OR_RETURN(const TruncatedPmf pmf, ExactPmf(scale, radius, 1e-15));
    double tv = 0;
    for (int64_t x = -radius; x <= radius; ++x) {
      const auto it = counts.find(x);
      const double empirical =
          it == counts.end() ? 0.0 : static_cast<double>(it->second) / kSamples;
      tv += std::abs(empirical - pmf.Mass(x));
    }
    for (const auto& [x, count] : counts) {
      if (x < -radius || x > radius) tv += static_cast<double>(count) / kSamples;
    }
    tv /= 2;
    report.checks.push_back(
        AtMost(absl::StrCat("tv s=", s), tv, 0.005));

    const double mean = sum / kSamples;
    const double var = sum_sq / kSamples - mean * mean;
    const double deficit = VarianceDeficit(s * s);
    report.checks.push_back({absl::StrCat("s^2 - exact variance > 0, s=", s),
                             deficit, 0, deficit > 0});
    // Sampling error of the empirical variance is about s^2 sqrt(2/N).
    const double slack = 4 * s * s * std::sqrt(2.0 / kSamples);
    report.checks.push_back(AtMost(absl::StrCat("empirical variance s=", s),
                                   var, s * s + slack));
  }
  return absl::OkStatus();
}

absl::Status TransformSuite(VerifyReport& report) {
  RandomStream rng = MakeStream(DeriveSeed(kVerifySeed, {1}));
  std::normal_distribution<double> normal;
  double worst_norm = 0;
  double worst_roundtrip = 0;
  for (int64_t dim : {1, 2, 64, 1024, 4096}) {
    ASSIGN_OR_RETURN(const SignVector xi,
                     SignVector::FromSeed(rng(), dim));
    std::vector<double> x(static_cast<size_t>(dim));
    for (double& v : x) v = normal(rng);
    ASSIGN_OR_RETURN(const std::vector<double> y, Flatten(x, xi));
    ASSIGN_OR_RETURN(const std::vector<double> back, Unflatten(y, xi));
    double nx = 0;
    double ny = 0;
    double err = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      nx += x[i] * x[i];
      ny += y[i] * y[i];
      err = std::max(err, std::abs(back[i] - x[i]));
    }
    worst_norm = std::max(worst_norm, std::abs(std::sqrt(ny) - std::sqrt(nx)) /
                                          std::sqrt(nx));
    worst_roundtrip = std::max(worst_roundtrip, err);
  }
  report.checks.push_back(AtMost("norm preservation (relative)", worst_norm,
                                 1e-12));
  report.checks.push_back(AtMost("round trip (max abs)", worst_roundtrip,
                                 1e-12));

  // Columns of the normalized transform are orthonormal.
  constexpr int64_t kDim = 64;
  std::vector<std::vector<double>> columns;
  for (int64_t j = 0; j < kDim; ++j) {
    std::vector<double> e(kDim, 0.0);
    e[static_cast<size_t>(j)] = 1;
    RETURN_IF_ERROR(Wht(e));
    columns.push_back(std::move(e));
  }
  double gram_err = 0;
  for (int64_t a = 0; a < kDim; ++a) {
    for (int64_t b = 0; b < kDim; ++b) {
      double dot = 0;
      for (int64_t i = 0; i < kDim; ++i) dot += columns[a][i] * columns[b][i];
      gram_err = std::max(gram_err, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  report.checks.push_back(AtMost("gram matrix deviation d=64", gram_err,
                                 1e-12));
  return absl::OkStatus();
}

absl::Status RoundingSuite(VerifyReport& report) {
  RandomStream rng = MakeStream(DeriveSeed(kVerifySeed, {2}));
  constexpr int kDim = 128;
  constexpr int kReps = 10'000;
  constexpr double kGamma = 0.5;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(kDim);
  for (double& v : x) v = unit(rng);
  std::vector<double> mean(kDim, 0.0);
  double max_step = 0;
  for (int r = 0; r < kReps; ++r) {
    const std::vector<double> y = RandomizedRound(x, kGamma, rng);
    for (int i = 0; i < kDim; ++i) {
      mean[i] += y[i] / kReps;
      max_step = std::max(max_step, std::abs(y[i] - x[i]));
    }
  }
  double bias = 0;
  for (int i = 0; i < kDim; ++i) bias = std::max(bias, std::abs(mean[i] - x[i]));
  report.checks.push_back(AtMost("unbiasedness (max coordinate)", bias,
                                 4 * (kGamma / 2) / std::sqrt(kReps)));
  report.checks.push_back({"per-coordinate step < gamma", max_step, kGamma,
                           max_step < kGamma});

  constexpr double kC = 10;
  const double beta = std::exp(-0.5);
  ASSIGN_OR_RETURN(const RoundingParams params,
                   RoundingParams::Create(kGamma, beta, kDim));
  ASSIGN_OR_RETURN(const SensitivityBound bound, Delta2Bound(kC, params));
  std::normal_distribution<double> normal;
  double worst_norm = 0;
  int64_t retries = 0;
  constexpr int kCalls = 10'000;
  for (int r = 0; r < kCalls; ++r) {
    std::vector<double> g(kDim);
    double nn = 0;
    for (double& v : g) {
      v = normal(rng);
      nn += v * v;
    }
    for (double& v : g) v *= (kC / kGamma) / std::sqrt(nn);
    ASSIGN_OR_RETURN(const ConditionalRoundResult out,
                     ConditionalRound(g, kC, params, rng));
    double norm_sq = 0;
    for (int64_t v : out.grid) norm_sq += static_cast<double>(v * v);
    worst_norm = std::max(worst_norm, std::sqrt(norm_sq));
    retries += out.retries;
  }
  report.checks.push_back(AtMost("conditional norm (grid units)", worst_norm,
                                 bound.delta2_grid));
  report.checks.push_back(AtMost("mean retries",
                                 static_cast<double>(retries) / kCalls,
                                 1 / (1 - beta) - 1));
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<VerifyReport> RunVerifySuite(std::string_view suite) {
  VerifyReport report;
  report.suite = std::string(suite);
  if (suite == "convolution") {
    RETURN_IF_ERROR(ConvolutionSuite(report));
  } else if (suite == "sampler") {
    RETURN_IF_ERROR(SamplerSuite(report));
  } else if (suite == "transform") {
    RETURN_IF_ERROR(TransformSuite(report));
  } else if (suite == "rounding") {
    RETURN_IF_ERROR(RoundingSuite(report));
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown suite '", std::string(suite),
                     "'; expected one of convolution, sampler, transform, "
                     "rounding"));
  }
  return report;
}

}  // namespace ddg
