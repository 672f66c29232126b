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

#include "ddg/accountant.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ddg/status_macros.h"

namespace ddg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTauRelativeCutoff = 1e-30;
constexpr double kSigmaSearchCap = 1e6;  // times c
constexpr double kSigmaRelativeTolerance = 1e-9;
constexpr double kGammaRelativeTolerance = 1e-6;
constexpr int kGammaGridPoints = 64;

}  // namespace

double Tau(double sigma_grid, int64_t n) {
  const double v = sigma_grid * sigma_grid;
  double sum = 0;
  double compensation = 0;
  for (int64_t k = 1; k < n; ++k) {
    const double term =
        std::exp(-2 * kPi * kPi * v * static_cast<double>(k) / (k + 1.0));
    if (term == 0) break;
    const double y = term - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
    // Terms decrease in k, so the remainder is at most (n - 1 - k) * term.
    if (static_cast<double>(n - 1 - k) * term < kTauRelativeCutoff * sum) {
      break;
    }
  }
  return 10 * sum;
}

const char* EpsilonBranchName(EpsilonBranch branch) {
  switch (branch) {
    case EpsilonBranch::kSquareRoot:
      return "sqrt";
    case EpsilonBranch::kL1:
      return "l1";
    case EpsilonBranch::kLinear:
      return "linear";
  }
  return "unknown";
}

absl::StatusOr<ZcdpEpsilon> EpsilonZcdp(double delta2, double sigma,
                                        double gamma, int64_t n, int64_t d,
                                        std::optional<double> delta1) {
  if (!(delta2 > 0) || !(sigma > 0) || !(gamma > 0) || n < 1 || d < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "accounting inputs must be positive: delta2 = ", delta2, ", sigma = ",
        sigma, ", gamma = ", gamma, ", n = ", n, ", d = ", d));
  }
  const double sigma_grid = sigma / gamma;
  if (sigma_grid < 0.5) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sigma / gamma = ", sigma_grid, " is below 1/2"));
  }
  const double dd = static_cast<double>(d);
  if (delta1.has_value() && !(*delta1 <= std::sqrt(dd) * delta2)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "delta1 = ", *delta1, " exceeds sqrt(d) * delta2 = ",
        std::sqrt(dd) * delta2));
  }
  const double tau = Tau(sigma_grid, n);
  const double sqrt_n_sigma = std::sqrt(static_cast<double>(n)) * sigma;
  const double ratio = delta2 / sqrt_n_sigma;

  ZcdpEpsilon out;
  out.tau = tau;
  const double square_root = std::sqrt(ratio * ratio + 0.5 * tau * dd);
  const double linear = ratio + tau * std::sqrt(dd);
  out.eps = square_root;
  out.branch = EpsilonBranch::kSquareRoot;
  if (linear < out.eps) {
    out.eps = linear;
    out.branch = EpsilonBranch::kLinear;
  }
  if (delta1.has_value()) {
    const double l1 = std::sqrt(ratio * ratio +
                                2 * (*delta1 / sqrt_n_sigma) * tau +
                                tau * tau * dd);
    if (l1 < out.eps) {
      out.eps = l1;
      out.branch = EpsilonBranch::kL1;
    }
  }
  assert(out.eps <= square_root && out.eps <= linear);
  return out;
}

double ZcdpToDpClosedForm(double rho, double delta) {
  return rho + std::sqrt(4 * rho * std::log(1 / delta));
}

absl::StatusOr<double> ZcdpToDp(double rho, double delta) {
  if (!(rho > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("rho must be positive, got ", rho));
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  // Optimize over u = log(alpha - 1) so the whole range alpha in (1, inf) is
  // covered with uniform relative resolution.
  auto objective = [rho, delta](double u) {
    const double am1 = std::exp(u);
    const double alpha = 1 + am1;
    const double log_alpha = std::log1p(am1);
    return rho * alpha + (-log_alpha - std::log(delta)) / am1 + u - log_alpha;
  };
  constexpr double kLow = -40;
  constexpr double kHigh = 80;
  constexpr int kScan = 480;
  // Coarse scan first, then Brent inside the best cell.
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double u = kLow + (kHigh - kLow) * i / kScan;
    const double v = objective(u);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double step = (kHigh - kLow) / kScan;
  const double lo = kLow + step * std::max(best - 1, 0);
  const double hi = kLow + step * std::min(best + 1, kScan);
  const auto [u_star, value] = boost::math::tools::brent_find_minima(
      objective, lo, hi, std::numeric_limits<double>::digits / 2 + 4);
  (void)u_star;
  return std::max(0.0, std::min(value, best_value));
}

double Compose(double rho_per_round, int64_t rounds) {
  return rho_per_round * static_cast<double>(rounds);
}

absl::StatusOr<double> CalibrateSigma(double target_eps, double c,
                                      double gamma, double beta, int64_t n,
                                      int64_t d) {
  if (!(target_eps > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("target epsilon must be positive, got ", target_eps));
  }
  ASSIGN_OR_RETURN(const RoundingParams params,
                   RoundingParams::Create(gamma, beta, d));
  ASSIGN_OR_RETURN(const SensitivityBound bound, Delta2Bound(c, params));
  absl::Status failure = absl::OkStatus();
  auto excess = [&](double sigma) {
    auto eps = EpsilonZcdp(bound.delta2, sigma, gamma, n, d);
    if (!eps.ok()) {
      failure = eps.status();
      return 0.0;
    }
    return eps->eps - target_eps;
  };
  const double lo = gamma / 2;
  const double hi = kSigmaSearchCap * c;
  if (!(hi > lo)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sigma search bracket is empty: gamma / 2 = ", lo, " >= 1e6 c = ", hi));
  }
  const double at_lo = excess(lo);
  RETURN_IF_ERROR(failure);
  if (at_lo <= 0) return lo;
  const double at_hi = excess(hi);
  RETURN_IF_ERROR(failure);
  if (at_hi > 0) {
    return absl::OutOfRangeError(absl::StrCat(
        "target epsilon ", target_eps, " unachievable: epsilon ranges over [",
        at_hi + target_eps, ", ", at_lo + target_eps, "] for sigma in [", lo,
        ", ", hi, "]"));
  }
  auto done = [](double a, double b) {
    return std::abs(b - a) <= kSigmaRelativeTolerance * std::min(a, b);
  };
  const auto [a, b] = boost::math::tools::bisect(excess, lo, hi, done);
  RETURN_IF_ERROR(failure);
  // b is on the side where epsilon <= target.
  (void)a;
  return b;
}

const char* NormModeName(NormMode mode) {
  return mode == NormMode::kGeneral ? "general" : "optimistic";
}

absl::StatusOr<NormMode> ParseNormMode(const std::string& name) {
  if (name == "general") return NormMode::kGeneral;
  if (name == "optimistic") return NormMode::kOptimistic;
  return absl::InvalidArgumentError(absl::StrCat(
      "norm mode must be 'general' or 'optimistic', got '", name, "'"));
}

double SumNormBound(NormMode mode, double c, int64_t n) {
  const double nn = static_cast<double>(n);
  return mode == NormMode::kGeneral ? c * nn : c * std::sqrt(nn);
}

absl::StatusOr<PrivacyReport> MakePrivacyReport(const SensitivityBound& delta2,
                                                double sigma, double gamma,
                                                int64_t n, int64_t d,
                                                double delta) {
  ASSIGN_OR_RETURN(const ZcdpEpsilon eps,
                   EpsilonZcdp(delta2.delta2, sigma, gamma, n, d));
  PrivacyReport report;
  report.delta2 = delta2;
  report.tau = eps.tau;
  report.eps_zcdp = eps.eps;
  report.rho = 0.5 * eps.eps * eps.eps;
  report.delta = delta;
  report.branch_used = eps.branch;
  ASSIGN_OR_RETURN(report.eps_dp, ZcdpToDp(report.rho, delta));
  return report;
}

double AggregateStddevGrid(double sum_norm, double gamma, double sigma,
                           int64_t n, int64_t d) {
  const double nn = static_cast<double>(n);
  const double data = sum_norm * sum_norm / (gamma * gamma * d);
  const double noise = nn * (0.25 + sigma * sigma / (gamma * gamma));
  return std::sqrt(data + noise);
}

absl::StatusOr<GammaChoice> ChooseGamma(const CommBudget& budget,
                                        double target_eps, double c,
                                        double beta, int64_t n, int64_t d,
                                        double delta) {
  if (budget.bit_width < 1 || budget.bit_width > 62) {
    return absl::InvalidArgumentError(
        absl::StrCat("bit width must lie in [1, 62], got ", budget.bit_width));
  }
  if (!(budget.k > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be positive, got ", budget.k));
  }
  if (!(c > 0) || n < 1 || d < 1) {
    return absl::InvalidArgumentError("c, n and d must be positive");
  }
  const double half_range = std::ldexp(1.0, budget.bit_width - 1);
  const double sum_norm = SumNormBound(budget.norm_mode, c, n);

  absl::Status failure = absl::OkStatus();
  // log(k s(gamma) / 2^{B-1}); feasible where <= 0, decreasing in gamma.
  auto log_ratio = [&](double gamma) {
    auto sigma = CalibrateSigma(target_eps, c, gamma, beta, n, d);
    if (!sigma.ok()) {
      if (failure.ok()) failure = sigma.status();
      return std::numeric_limits<double>::infinity();
    }
    return std::log(budget.k *
                    AggregateStddevGrid(sum_norm, gamma, *sigma, n, d) /
                    half_range);
  };

  // At gamma_lo the data term alone puts k s at 1000 times the range.
  double lo = budget.k * sum_norm /
              (std::sqrt(static_cast<double>(d)) * half_range * 1e3);
  double f_lo = log_ratio(lo);
  RETURN_IF_ERROR(failure);
  if (f_lo <= 0) {
    return absl::InternalError("lower gamma bracket unexpectedly feasible");
  }
  const double gamma_cap = 1e5 * c;
  double hi = lo;
  double f_hi = f_lo;
  double best_ratio = f_lo;
  while (f_hi > 0) {
    hi *= 2;
    if (hi > gamma_cap) {
      return absl::OutOfRangeError(absl::StrCat(
          "no feasible gamma for B = ", budget.bit_width, ", k = ", budget.k,
          "; minimal achievable k s / 2^(B-1) = ", std::exp(best_ratio)));
    }
    f_hi = log_ratio(hi);
    RETURN_IF_ERROR(failure);
    best_ratio = std::min(best_ratio, f_hi);
    if (f_hi > 0) {
      lo = hi;
      f_lo = f_hi;
    }
  }

  bool monotone = true;
  auto bisect = [&](double a, double fa, double b, double fb) {
    while (b - a > kGammaRelativeTolerance * a) {
      const double mid = std::sqrt(a * b);
      const double fm = log_ratio(mid);
      if (fm > fa || fm < fb) monotone = false;
      if (fm > 0) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
        fb = fm;
      }
    }
    return std::pair{b, fb};
  };
  auto [gamma, f_gamma] = bisect(lo, f_lo, hi, f_hi);
  RETURN_IF_ERROR(failure);

  GammaChoice choice;
  if (!monotone) {
    // Scan a log grid for the first feasible point and refine in its cell.
    choice.used_grid_scan = true;
    std::vector<double> grid(kGammaGridPoints);
    std::vector<double> values(kGammaGridPoints);
    int first_feasible = -1;
    for (int i = 0; i < kGammaGridPoints; ++i) {
      grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) /
                                           (kGammaGridPoints - 1));
      values[i] = log_ratio(grid[i]);
      if (values[i] <= 0 && first_feasible < 0) first_feasible = i;
    }
    RETURN_IF_ERROR(failure);
    if (first_feasible <= 0) {
      gamma = grid[std::max(first_feasible, 0)];
      f_gamma = values[std::max(first_feasible, 0)];
    } else {
      std::tie(gamma, f_gamma) =
          bisect(grid[first_feasible - 1], values[first_feasible - 1],
                 grid[first_feasible], values[first_feasible]);
      RETURN_IF_ERROR(failure);
    }
  }

  ASSIGN_OR_RETURN(const double sigma,
                   CalibrateSigma(target_eps, c, gamma, beta, n, d));
  ASSIGN_OR_RETURN(const RoundingParams params,
                   RoundingParams::Create(gamma, beta, d));
  ASSIGN_OR_RETURN(const SensitivityBound bound, Delta2Bound(c, params));
  ASSIGN_OR_RETURN(choice.report,
                   MakePrivacyReport(bound, sigma, gamma, n, d, delta));
  choice.gamma = gamma;
  choice.sigma = sigma;
  choice.range_ratio = std::exp(f_gamma);
  return choice;
}

int64_t SurvivingClients(int64_t n, double drop_fraction) {
  // Slack keeps products such as 100 * 0.7 = 70.00000000000001 at 70.
  return static_cast<int64_t>(
      std::ceil(static_cast<double>(n) * (1 - drop_fraction) - 1e-9));
}

absl::StatusOr<double> DropoutEpsilon(const AccountingInputs& inputs,
                                      double drop_fraction) {
  if (!(drop_fraction >= 0 && drop_fraction < 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "drop fraction must lie in [0, 1), got ", drop_fraction));
  }
  const int64_t survivors = SurvivingClients(inputs.n, drop_fraction);
  if (survivors < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "no client survives a drop fraction of ", drop_fraction, " with n = ",
        inputs.n));
  }
  ASSIGN_OR_RETURN(const ZcdpEpsilon eps,
                   EpsilonZcdp(inputs.delta2, inputs.sigma, inputs.gamma,
                               survivors, inputs.d));
  return eps.eps;
}

}  // namespace ddg
