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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ddg/accountant.h"
#include "ddg/dme.h"
#include "ddg/modular.h"
#include "ddg/protocol.h"
#include "ddg/random.h"
#include "ddg/verify.h"

#ifndef DDG_TOOL_PATH
#error "DDG_TOOL_PATH must name the ddg executable"
#endif

namespace ddg {
namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void Report(int id, const std::string& title, const Outcome& outcome,
            double seconds, double budget_seconds) {
  const bool in_time = seconds <= budget_seconds;
  const bool ok = outcome.passed && in_time;
  if (!ok) ++failures;
  std::printf("%s %d %s: %s runtime=%.2fs budget=%.0fs\n", ok ? "PASS" : "FAIL",
              id, title.c_str(), outcome.detail.c_str(), seconds,
              budget_seconds);
  std::fflush(stdout);
}

void Criterion(int id, const std::string& title, double budget_seconds,
               const std::function<absl::StatusOr<Outcome>()>& body,
               double prior_seconds = 0) {
  const auto start = Clock::now();
  absl::StatusOr<Outcome> outcome = body();
  const double seconds =
      prior_seconds +
      std::chrono::duration<double>(Clock::now() - start).count();
  if (!outcome.ok()) {
    outcome = Outcome{false, absl::StrCat("error: ", outcome.status().ToString())};
  }
  Report(id, title, *outcome, seconds, budget_seconds);
}

// Collects the checks of a verify suite selected by `wanted`.
absl::StatusOr<Outcome> SuiteChecks(
    std::string_view suite,
    const std::function<bool(const std::string&)>& wanted) {
  absl::StatusOr<VerifyReport> report = RunVerifySuite(suite);
  if (!report.ok()) return report.status();
  Outcome out{true, ""};
  for (const VerifyCheck& check : report->checks) {
    if (!wanted(check.name)) continue;
    out.passed = out.passed && check.passed;
    absl::StrAppend(&out.detail, out.detail.empty() ? "" : "; ", check.name,
                    absl::StrFormat(" measured=%.4g threshold=%.4g",
                                    check.measured, check.threshold),
                    check.passed ? "" : " (violated)");
  }
  if (out.detail.empty()) return absl::InternalError("no matching checks");
  return out;
}

bool IsRadiusCheck(const std::string& name) {
  return name == "max_log_ratio n=2 s2=3 R=60";
}

absl::StatusOr<Outcome> PrivacyConstant() {
  absl::StatusOr<ZcdpEpsilon> e = EpsilonZcdp(1, 1, 1, 10'000, 1);
  if (!e.ok()) return e.status();
  return Outcome{e->eps < 0.02,
                 absl::StrFormat("eps=%.6g threshold<0.02", e->eps)};
}

absl::StatusOr<Outcome> ConversionDominance() {
  int violations = 0;
  int zero_gaps = 0;
  double min_gap = INFINITY;
  for (int i = 0; i < 20; ++i) {
    const double rho = std::pow(10.0, -6 + 7.0 * i / 19);  // 1e-6 .. 10
    for (int j = 0; j < 20; ++j) {
      const double delta = std::pow(10.0, -12 + 10.0 * j / 19);  // 1e-12 .. 1e-2
      absl::StatusOr<double> opt = ZcdpToDp(rho, delta);
      if (!opt.ok()) return opt.status();
      const double closed = ZcdpToDpClosedForm(rho, delta);
      if (*opt > closed) ++violations;
      if (rho > 1e-3) {
        const double gap = closed - *opt;
        min_gap = std::min(min_gap, gap);
        if (!(gap > 0)) ++zero_gaps;
      }
    }
  }
  return Outcome{violations == 0 && zero_gaps == 0,
                 absl::StrFormat("violations=%d nonpositive_gaps=%d "
                                 "min_gap(rho>1e-3)=%.3g",
                                 violations, zero_gaps, min_gap)};
}

absl::StatusOr<Outcome> PipelineRoundingError() {
  constexpr int kTrials = 200;
  constexpr int64_t kN = 20;
  constexpr int64_t kD = 256;
  ProtocolConfig cfg;
  cfg.n = kN;
  cfg.d_original = kD;
  cfg.c = 1;
  cfg.gamma = 0.01;
  absl::StatusOr<Modulus> modulus = Modulus::FromBits(40);
  if (!modulus.ok()) return modulus.status();
  cfg.modulus = *modulus;
  cfg.sigma = 0;
  cfg.beta = 0;
  cfg.allow_zero_noise = true;
  cfg.master_seed = 0xacce97;
  double total = 0;
  for (int t = 0; t < kTrials; ++t) {
    RandomStream rng = MakeStream(DeriveSeed(cfg.master_seed, {7, uint64_t(t)}));
    const std::vector<std::vector<double>> x = SampleSphere(kN, kD, cfg.c, rng);
    cfg.round_index = t;
    absl::StatusOr<RoundOutput> round = RunRound(x, cfg);
    if (!round.ok()) return round.status();
    for (int64_t j = 0; j < kD; ++j) {
      double truth = 0;
      for (const auto& v : x) truth += v[j];
      const double e = round->estimate[j] - truth;
      total += e * e;
    }
  }
  const double measured = total / kTrials;
  const double bound = cfg.gamma * cfg.gamma * kD * kN / 4 *
                       (1 + 5 / std::sqrt(static_cast<double>(kTrials)));
  return Outcome{measured <= bound,
                 absl::StrFormat("mean_sq_error=%.6g threshold=%.6g", measured,
                                 bound)};
}

double Spearman(std::vector<double> a, std::vector<double> b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < order.size();) {
      size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      for (size_t k = i; k <= j; ++k) r[order[k]] = (i + j) / 2.0 + 1;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

const DmeResult* Find(const std::vector<DmeResult>& rows, int bits, double k) {
  for (const DmeResult& r : rows) {
    if (r.bit_width == bits && r.k == k) return &r;
  }
  return nullptr;
}

DmeConfig SweepConfig() {
  DmeConfig cfg;
  cfg.n = 100;
  cfg.d = 1024;
  cfg.c = 10;
  cfg.delta = 1e-5;
  cfg.eps_targets = {4};
  cfg.bit_widths = {10, 14, 16, 18, 20};
  cfg.k_values = {2, 3};
  cfg.norm_mode = NormMode::kOptimistic;
  cfg.trials = 10;
  cfg.master_seed = 0;
  return cfg;
}

absl::StatusOr<Outcome> DmeReproduction(const std::vector<DmeResult>& rows) {
  const DmeResult* high = Find(rows, 18, 3);
  const DmeResult* low = Find(rows, 10, 2);
  if (high == nullptr || low == nullptr) {
    return absl::InternalError("sweep rows missing");
  }
  auto ratio = [](const DmeResult& r) {
    return r.mse_ddgauss.mean / r.mse_baseline.mean;
  };
  const bool ok_high =
      high->status == PointStatus::kOk && ratio(*high) <= 1.5;
  const bool ok_low = low->status == PointStatus::kOk && ratio(*low) >= 2 &&
                      low->wraparound_rate > 0;
  std::vector<double> bits;
  std::vector<double> mse;
  std::string trend;
  for (int b : {14, 16, 18, 20}) {
    const DmeResult* r = Find(rows, b, 3);
    if (r == nullptr || r->status != PointStatus::kOk) {
      return absl::InternalError(absl::StrCat("row B=", b, " unavailable"));
    }
    bits.push_back(b);
    mse.push_back(r->mse_ddgauss.mean);
    absl::StrAppend(&trend, trend.empty() ? "" : ",",
                    absl::StrFormat("%.4g", r->mse_ddgauss.mean));
  }
  const double rho = Spearman(bits, mse);
  const bool ok_trend = rho <= -0.8;
  std::string detail = absl::StrFormat(
      "(a) B=18 k=3 ratio=%.4g threshold<=1.5 %s; "
      "(b) B=10 k=2 ratio=%.4g threshold>=2 wrap=%.4g %s; "
      "(c) spearman=%.3g threshold<=-0.8 mse[B=14..20]=%s %s",
      ratio(*high), ok_high ? "ok" : "violated", ratio(*low),
      low->wraparound_rate, ok_low ? "ok" : "violated", rho, trend,
      ok_trend ? "ok" : "violated");
  return Outcome{ok_high && ok_low && ok_trend, detail};
}

absl::StatusOr<Outcome> TheoryDominance(const DmeConfig& cfg,
                                        const std::vector<DmeResult>& rows) {
  const double n2 = static_cast<double>(cfg.n) * static_cast<double>(cfg.n);
  int checked = 0;
  int violations = 0;
  double worst_slack = INFINITY;
  for (const DmeResult& r : rows) {
    if (r.status != PointStatus::kOk) continue;
    ++checked;
    if (!r.theory_hypothesis_holds) {
      ++violations;
      continue;
    }
    const double allowed = r.mse_theory_bound / n2 +
                           3 * r.mse_ddgauss.half_width.value_or(0);
    worst_slack = std::min(worst_slack, allowed / r.mse_ddgauss.mean);
    if (r.mse_ddgauss.mean > allowed) ++violations;
  }
  return Outcome{checked > 0 && violations == 0,
                 absl::StrFormat("rows=%d violations=%d min(allowed/measured)=%.4g",
                                 checked, violations, worst_slack)};
}

absl::StatusOr<Outcome> DropoutMonotone() {
  // sigma/gamma = 100 keeps tau far below double resolution.
  const AccountingInputs in{1, 1, 0.01, 100, 1};
  absl::StatusOr<ZcdpEpsilon> base =
      EpsilonZcdp(in.delta2, in.sigma, in.gamma, in.n, in.d);
  if (!base.ok()) return base.status();
  double prev = -INFINITY;
  bool increasing = true;
  double at_zero = 0;
  double at_three_quarters = 0;
  for (int i = 0; i <= 9; ++i) {
    const double f = i / 10.0;
    absl::StatusOr<double> e = DropoutEpsilon(in, f);
    if (!e.ok()) return e.status();
    increasing = increasing && *e > prev;
    prev = *e;
    if (i == 0) at_zero = *e;
  }
  absl::StatusOr<double> e75 = DropoutEpsilon(in, 0.75);
  if (!e75.ok()) return e75.status();
  at_three_quarters = *e75;
  const double ratio = at_three_quarters / base->eps;
  const bool ok = increasing && at_zero == base->eps &&
                  std::abs(ratio - 2) <= 0.02;
  return Outcome{ok, absl::StrFormat("strictly_increasing=%s f0=%.6g "
                                     "baseline=%.6g ratio(0.75)=%.8g "
                                     "threshold=2+-1%%",
                                     increasing ? "yes" : "no", at_zero,
                                     base->eps, ratio)};
}

absl::StatusOr<std::string> Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

absl::Status Shell(const std::string& command) {
  if (std::system(command.c_str()) != 0) {
    return absl::InternalError(absl::StrCat("command failed: ", command));
  }
  return absl::OkStatus();
}

absl::StatusOr<Outcome> ManifestDeterminism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       absl::StrCat("ddg_acceptance_", ::getpid());
  fs::create_directories(dir);
  const std::string tool = DDG_TOOL_PATH;
  const fs::path first = dir / "first.csv";
  const fs::path manifest = dir / "first.csv.manifest.ini";
  const fs::path rerun_a = dir / "rerun_a.csv";
  const fs::path rerun_b = dir / "rerun_b.csv";
  absl::Status s = Shell(absl::StrCat(
      "\"", tool, "\" dme --n 100 --d 1024 --c 10 --eps 4 --delta 1e-5 "
      "--bits 10,14,18 --k 2,3 --norm_mode optimistic --trials 3 --seed 11 "
      "--out \"", first.string(), "\" > /dev/null"));
  for (const fs::path& out : {rerun_a, rerun_b}) {
    if (!s.ok()) break;
    s = Shell(absl::StrCat("\"", tool, "\" dme --config \"", manifest.string(),
                           "\" --out \"", out.string(), "\" > /dev/null"));
  }
  absl::StatusOr<std::string> a = Slurp(rerun_a);
  absl::StatusOr<std::string> b = Slurp(rerun_b);
  absl::StatusOr<std::string> original = Slurp(first);
  std::error_code ignored;
  fs::remove_all(dir, ignored);
  if (!s.ok()) return s;
  if (!a.ok()) return a.status();
  if (!b.ok()) return b.status();
  if (!original.ok()) return original.status();
  const bool same = *a == *b;
  return Outcome{same && !a->empty(),
                 absl::StrFormat("rerun_bytes=%d,%d identical=%s "
                                 "matches_original=%s",
                                 a->size(), b->size(), same ? "yes" : "no",
                                 *a == *original ? "yes" : "no")};
}

}  // namespace
}  // namespace ddg

int main() {
  using namespace ddg;
  Criterion(1, "convolution closeness R=60", 5, [] {
    return SuiteChecks("convolution", IsRadiusCheck);
  });
  Criterion(2, "n-fold convolution bound", 60, [] {
    return SuiteChecks("convolution", [](const std::string& name) {
      return !IsRadiusCheck(name);
    });
  });
  Criterion(3, "privacy constant n=1e4", 1, [] { return PrivacyConstant(); });
  Criterion(4, "sampler exactness", 30, [] {
    // The s=3 TV check is extra; the criterion names s=1 only.
    return SuiteChecks("sampler", [](const std::string& name) {
      return name != "tv s=3";
    });
  });
  Criterion(5, "zCDP to DP dominance", 5, [] { return ConversionDominance(); });
  Criterion(6, "pipeline rounding error", 10,
            [] { return PipelineRoundingError(); });

  const DmeConfig sweep = SweepConfig();
  const auto sweep_start = Clock::now();
  absl::StatusOr<std::vector<DmeResult>> rows = RunDme(sweep);
  const double sweep_seconds =
      std::chrono::duration<double>(Clock::now() - sweep_start).count();
  Criterion(
      7, "desk-scale DME reproduction", 600,
      [&]() -> absl::StatusOr<Outcome> {
        if (!rows.ok()) return rows.status();
        return DmeReproduction(*rows);
      },
      sweep_seconds);
  Criterion(
      8, "theory bound dominance", 600,
      [&]() -> absl::StatusOr<Outcome> {
        if (!rows.ok()) return rows.status();
        return TheoryDominance(sweep, *rows);
      },
      sweep_seconds);
  Criterion(9, "dropout monotonicity", 1, [] { return DropoutMonotone(); });
  Criterion(10, "manifest determinism", 600,
            [] { return ManifestDeterminism(); });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "PASS" : "FAIL",
              failures);
  return failures == 0 ? 0 : 1;
}
