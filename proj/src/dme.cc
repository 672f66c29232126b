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

#include "ddg/dme.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <utility>

#include <boost/math/distributions/students_t.hpp>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ddg/flatten.h"
#include "ddg/modular.h"
#include "ddg/protocol.h"
#include "ddg/status_macros.h"

namespace ddg {

absl::Status DmeConfig::Validate() const {
  if (n < 1) return absl::InvalidArgumentError("n: must be positive");
  if (d < 1) return absl::InvalidArgumentError("d: must be positive");
  if (!(c > 0)) return absl::InvalidArgumentError("c: must be positive");
  if (eps_targets.empty()) {
    return absl::InvalidArgumentError("eps: at least one target required");
  }
  for (double e : eps_targets) {
    if (!(e > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("eps: targets must be positive, got ", e));
    }
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta: must lie in (0, 1)");
  }
  if (bit_widths.empty()) {
    return absl::InvalidArgumentError("bits: at least one bit width required");
  }
  for (int b : bit_widths) {
    if (b < 1 || b > Modulus::kMaxBits) {
      return absl::InvalidArgumentError(
          absl::StrCat("bits: must lie in [1, 62], got ", b));
    }
  }
  if (k_values.empty()) {
    return absl::InvalidArgumentError("k: at least one value required");
  }
  for (double k : k_values) {
    if (!(k > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("k: must be positive, got ", k));
    }
  }
  if (trials < 1) return absl::InvalidArgumentError("trials: must be >= 1");
  if (!(beta >= 0 && beta < 1)) {
    return absl::InvalidArgumentError("beta: must lie in [0, 1)");
  }
  return absl::OkStatus();
}

MeanCi Summarize(std::span<const double> values) {
  MeanCi out;
  if (values.empty()) return out;
  const double count = static_cast<double>(values.size());
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / count;
  if (values.size() < 2) return out;
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / (count - 1));
  const boost::math::students_t dist(count - 1);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  out.half_width = t * sd / std::sqrt(count);
  return out;
}

std::vector<std::vector<double>> SampleSphere(int64_t n, int64_t d, double c,
                                              RandomStream& rng) {
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> out(static_cast<size_t>(n));
  for (auto& x : out) {
    x.resize(static_cast<size_t>(d));
    double norm_sq = 0;
    do {
      norm_sq = 0;
      for (double& v : x) {
        v = normal(rng);
        norm_sq += v * v;
      }
    } while (norm_sq == 0);
    const double scale = c / std::sqrt(norm_sq);
    for (double& v : x) v *= scale;
  }
  return out;
}

absl::StatusOr<std::vector<double>> GaussianBaseline(
    std::span<const std::vector<double>> inputs, double eps_zcdp, double c,
    RandomStream& rng) {
  if (inputs.empty()) return absl::InvalidArgumentError("no inputs");
  if (!(eps_zcdp > 0) || !(c > 0)) {
    return absl::InvalidArgumentError("eps and c must be positive");
  }
  const size_t d = inputs.front().size();
  std::vector<double> sum(d, 0.0);
  for (const auto& x : inputs) {
    if (x.size() != d) {
      return absl::InvalidArgumentError("inputs have mismatched dimensions");
    }
    double norm_sq = 0;
    for (double v : x) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    const double clip = norm > c ? c / norm : 1.0;
    for (size_t j = 0; j < d; ++j) sum[j] += clip * x[j];
  }
  if (std::isinf(eps_zcdp)) return sum;
  std::normal_distribution<double> noise(0.0, c / eps_zcdp);
  for (double& v : sum) v += noise(rng);
  return sum;
}

namespace {

double SquaredError(std::span<const double> estimate,
                    std::span<const double> truth) {
  double s = 0;
  for (size_t j = 0; j < truth.size(); ++j) {
    const double e = estimate[j] - truth[j];
    s += e * e;
  }
  return s;
}

absl::StatusOr<DmeResult> RunPoint(
    const DmeConfig& cfg, double eps, int bits, double k, uint64_t point,
    std::span<const std::vector<std::vector<double>>> datasets) {
  DmeResult result;
  result.eps = eps;
  result.bit_width = bits;
  result.k = k;
  result.norm_mode = cfg.norm_mode;

  ASSIGN_OR_RETURN(const PaddedDim dim, PaddedDim::Create(cfg.d));
  const CommBudget budget{bits, k, cfg.norm_mode};
  auto choice =
      ChooseGamma(budget, eps, cfg.c, cfg.beta, cfg.n, dim.padded(), cfg.delta);
  if (!choice.ok()) {
    if (choice.status().code() != absl::StatusCode::kOutOfRange) {
      return choice.status();
    }
    result.status = PointStatus::kInfeasible;
    result.status_detail = std::string(choice.status().message());
    return result;
  }
  result.gamma = choice->gamma;
  result.sigma = choice->sigma;
  result.eps_dp = choice->report.eps_dp;

  ASSIGN_OR_RETURN(const Modulus modulus, Modulus::FromBits(bits));
  ProtocolConfig pc;
  pc.n = cfg.n;
  pc.d_original = cfg.d;
  pc.c = cfg.c;
  pc.gamma = choice->gamma;
  pc.modulus = modulus;
  pc.sigma = choice->sigma;
  pc.beta = cfg.beta;

  const double sum_norm = SumNormBound(cfg.norm_mode, cfg.c, cfg.n);
  const MseBound theory = TheoreticalMseBound(pc, sum_norm);
  result.mse_theory_bound = theory.value;
  result.theory_hypothesis_holds = theory.hypothesis_holds;

  const double n2 = static_cast<double>(cfg.n) * static_cast<double>(cfg.n);
  const double padded = static_cast<double>(dim.padded());
  int64_t rounds_wrapped = 0;
  double wrap_fraction = 0;
  double wrap_sq = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto& inputs = datasets[static_cast<size_t>(t)];
    std::vector<double> truth(static_cast<size_t>(cfg.d), 0.0);
    for (const auto& x : inputs) {
      for (size_t j = 0; j < truth.size(); ++j) truth[j] += x[j];
    }

    pc.master_seed = DeriveSeed(cfg.master_seed,
                                {point, static_cast<uint64_t>(t)});
    ASSIGN_OR_RETURN(const RoundOutput round, RunRound(inputs, pc));
    result.trial_mse_ddgauss.push_back(SquaredError(round.estimate, truth) /
                                       n2);
    const auto& diag = round.diagnostics;
    if (diag.wraparound_coords > 0) ++rounds_wrapped;
    wrap_fraction += static_cast<double>(diag.wraparound_coords) / padded;
    wrap_sq += diag.wraparound_sq_error / padded;

    RandomStream baseline_rng = MakeStream(DeriveSeed(
        cfg.master_seed, {kBaselineLabel, point, static_cast<uint64_t>(t)}));
    ASSIGN_OR_RETURN(const std::vector<double> baseline,
                     GaussianBaseline(inputs, eps, cfg.c, baseline_rng));
    result.trial_mse_baseline.push_back(SquaredError(baseline, truth) / n2);
  }
  const double trials = static_cast<double>(cfg.trials);
  result.mse_ddgauss = Summarize(result.trial_mse_ddgauss);
  result.mse_baseline = Summarize(result.trial_mse_baseline);
  result.wraparound_rate = wrap_fraction / trials;
  result.rounds_with_wraparound = static_cast<double>(rounds_wrapped) / trials;
  result.wrap_sq_error_per_coord = wrap_sq / trials;

  const double range = static_cast<double>(modulus.half());
  const double proxy = AggregateStddevGrid(sum_norm, pc.gamma, pc.sigma,
                                           cfg.n, dim.padded());
  auto clip = ModClipErrorBound(
      range, proxy,
      -static_cast<double>(cfg.n) * std::log1p(-cfg.beta));
  result.wrap_sq_error_bound =
      clip.ok() ? clip->sq_bound : std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace

absl::StatusOr<std::vector<DmeResult>> RunDme(const DmeConfig& cfg) {
  RETURN_IF_ERROR(cfg.Validate());
  // Datasets are drawn once per trial and shared by every sweep point.
  std::vector<std::vector<std::vector<double>>> datasets;
  datasets.reserve(static_cast<size_t>(cfg.trials));
  for (int t = 0; t < cfg.trials; ++t) {
    RandomStream rng = MakeStream(
        DeriveSeed(cfg.master_seed, {kDataLabel, static_cast<uint64_t>(t)}));
    datasets.push_back(SampleSphere(cfg.n, cfg.d, cfg.c, rng));
  }
  std::vector<DmeResult> results;
  uint64_t point = 0;
  for (double eps : cfg.eps_targets) {
    for (int bits : cfg.bit_widths) {
      for (double k : cfg.k_values) {
        ASSIGN_OR_RETURN(DmeResult r,
                         RunPoint(cfg, eps, bits, k, point++, datasets));
        results.push_back(std::move(r));
      }
    }
  }
  return results;
}

std::string FormatNumber(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

void WriteDmeCsv(const DmeConfig& cfg, std::span<const DmeResult> results,
                 std::ostream& out) {
  out << kDmeCsvHeader << "\n";
  const double n2 = static_cast<double>(cfg.n) * static_cast<double>(cfg.n);
  auto optional = [](const std::optional<double>& v) {
    return v.has_value() ? FormatNumber(*v) : std::string();
  };
  for (const DmeResult& r : results) {
    out << FormatNumber(r.eps) << ',' << FormatNumber(cfg.delta) << ','
        << r.bit_width << ',' << FormatNumber(r.k) << ','
        << NormModeName(r.norm_mode) << ',' << cfg.n << ',' << cfg.d << ','
        << FormatNumber(cfg.c) << ',';
    if (r.status == PointStatus::kInfeasible) {
      out << ",,,,,,,,infeasible\n";
      continue;
    }
    out << FormatNumber(r.gamma) << ',' << FormatNumber(r.sigma) << ','
        << FormatNumber(r.mse_ddgauss.mean) << ','
        << optional(r.mse_ddgauss.half_width) << ','
        << FormatNumber(r.mse_baseline.mean) << ','
        << optional(r.mse_baseline.half_width) << ','
        << FormatNumber(r.wraparound_rate) << ','
        << (r.theory_hypothesis_holds
                ? FormatNumber(r.mse_theory_bound / n2)
                : std::string())
        << ",ok\n";
  }
}

}  // namespace ddg
