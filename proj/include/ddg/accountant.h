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

#ifndef DDG_ACCOUNTANT_H_
#define DDG_ACCOUNTANT_H_

#include <cstdint>
#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "ddg/rounding.h"

namespace ddg {

// Penalty for the sum of n discrete Gaussians not being a discrete Gaussian:
// tau = 10 sum_{k=1}^{n-1} exp(-2 pi^2 sigma_grid^2 k / (k + 1)), where
// sigma_grid = sigma / gamma >= 1/2.
double Tau(double sigma_grid, int64_t n);

enum class EpsilonBranch {
  kSquareRoot,  // sqrt(D^2 / n sigma^2 + tau d / 2)
  kL1,          // sqrt(D^2 / n sigma^2 + 2 D1 tau / sqrt(n) sigma + tau^2 d)
  kLinear,      // D / (sqrt(n) sigma) + tau sqrt(d)
};

const char* EpsilonBranchName(EpsilonBranch branch);

struct ZcdpEpsilon {
  double eps = 0;
  EpsilonBranch branch = EpsilonBranch::kSquareRoot;
  double tau = 0;
};

// The epsilon of 1/2 eps^2-zCDP for the distributed discrete Gaussian with
// l2 sensitivity `delta2`, per-client noise `sigma` and granularity `gamma`
// (all in original units) across n clients and d coordinates. When `delta1`
// is supplied the l1 branch joins the minimum. Fails if sigma / gamma < 1/2
// or delta1 > sqrt(d) delta2.
absl::StatusOr<ZcdpEpsilon> EpsilonZcdp(double delta2, double sigma,
                                        double gamma, int64_t n, int64_t d,
                                        std::optional<double> delta1 = {});

// inf_{alpha > 1} rho alpha + log(1 / (alpha delta)) / (alpha - 1)
//   + log(1 - 1/alpha), floored at 0. Requires rho > 0, 0 < delta < 1.
absl::StatusOr<double> ZcdpToDp(double rho, double delta);

// rho + sqrt(4 rho log(1/delta)), i.e. eps^2/2 + sqrt(2 log(1/delta)) eps.
double ZcdpToDpClosedForm(double rho, double delta);

// zCDP composes additively over rounds.
double Compose(double rho_per_round, int64_t rounds);

// Solves EpsilonZcdp(Delta2Bound(c, gamma, d, beta), sigma, ...) = target
// for sigma over [gamma / 2, 1e6 c] by bisection to 1e-9 relative. Returns
// gamma / 2 when even the smallest admissible sigma meets the target.
absl::StatusOr<double> CalibrateSigma(double target_eps, double c,
                                      double gamma, double beta, int64_t n,
                                      int64_t d);

enum class NormMode {
  kGeneral,     // ||sum x_i|| <= c n
  kOptimistic,  // ||sum x_i|| <= c sqrt(n)
};

const char* NormModeName(NormMode mode);
absl::StatusOr<NormMode> ParseNormMode(const std::string& name);

double SumNormBound(NormMode mode, double c, int64_t n);

struct CommBudget {
  int bit_width = 16;
  double k = 3;  // standard deviations the modular range must cover
  NormMode norm_mode = NormMode::kGeneral;
};

struct PrivacyReport {
  SensitivityBound delta2;
  double tau = 0;
  double eps_zcdp = 0;
  double rho = 0;
  double eps_dp = 0;
  double delta = 0;
  EpsilonBranch branch_used = EpsilonBranch::kSquareRoot;
};

absl::StatusOr<PrivacyReport> MakePrivacyReport(const SensitivityBound& delta2,
                                                double sigma, double gamma,
                                                int64_t n, int64_t d,
                                                double delta);

// Per-coordinate standard-deviation proxy, in grid units, of the aggregate
// sum_i (x~_i + y_i): sqrt(S^2 / (gamma^2 d) + n (1/4 + sigma^2 / gamma^2)).
double AggregateStddevGrid(double sum_norm, double gamma, double sigma,
                           int64_t n, int64_t d);

struct GammaChoice {
  double gamma = 0;
  double sigma = 0;
  PrivacyReport report;
  // k s(gamma) / 2^{B-1} at the returned gamma; at most 1.
  double range_ratio = 0;
  bool used_grid_scan = false;
};

// Smallest gamma (to 1e-6 relative) with k s(gamma) <= 2^{B-1}, with sigma
// calibrated to `target_eps` at each candidate gamma. `d` is the padded
// dimension. Fails with OutOfRange when no gamma in the search bracket is
// feasible.
absl::StatusOr<GammaChoice> ChooseGamma(const CommBudget& budget,
                                        double target_eps, double c,
                                        double beta, int64_t n, int64_t d,
                                        double delta);

struct AccountingInputs {
  double delta2 = 0;
  double sigma = 0;
  double gamma = 0;
  int64_t n = 1;
  int64_t d = 1;
};

// Number of clients whose noise survives a drop-out fraction f.
int64_t SurvivingClients(int64_t n, double drop_fraction);

// Epsilon when only ceil(n (1 - f)) clients contribute noise; the
// sensitivity is unchanged. Requires 0 <= f < 1 with a survivor left.
absl::StatusOr<double> DropoutEpsilon(const AccountingInputs& inputs,
                                      double drop_fraction);

}  // namespace ddg

#endif  // DDG_ACCOUNTANT_H_
