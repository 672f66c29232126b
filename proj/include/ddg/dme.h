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

#ifndef DDG_DME_H_
#define DDG_DME_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ddg/accountant.h"
#include "ddg/random.h"

namespace ddg {

// Distributed mean estimation sweep over (eps, B, k).
struct DmeConfig {
  int64_t n = 100;
  int64_t d = 1024;
  double c = 10;
  // Targets for the zCDP epsilon (1/2 eps^2-zCDP); `delta` is used only to
  // report the approximate-DP equivalent.
  std::vector<double> eps_targets = {4};
  double delta = 1e-5;
  std::vector<int> bit_widths = {10, 12, 14, 16, 18, 20};
  std::vector<double> k_values = {3};
  NormMode norm_mode = NormMode::kGeneral;
  int trials = 10;
  double beta = 0.6065306597126334;  // e^{-1/2}
  uint64_t master_seed = 0;

  absl::Status Validate() const;
};

// Mean over trials with a 95% Student-t half-width; no half-width with a
// single trial.
struct MeanCi {
  double mean = 0;
  std::optional<double> half_width;
};

MeanCi Summarize(std::span<const double> values);

enum class PointStatus { kOk, kInfeasible };

struct DmeResult {
  double eps = 0;
  int bit_width = 0;
  double k = 0;
  NormMode norm_mode = NormMode::kGeneral;
  PointStatus status = PointStatus::kOk;
  std::string status_detail;

  double gamma = 0;
  double sigma = 0;
  double eps_dp = 0;  // approximate-DP epsilon at cfg.delta
  // Squared l2 error of the MEAN estimate, per trial and summarized.
  std::vector<double> trial_mse_ddgauss;
  std::vector<double> trial_mse_baseline;
  MeanCi mse_ddgauss;
  MeanCi mse_baseline;
  // Mean fraction of coordinates that wrapped, and fraction of trials with
  // any wrapped coordinate.
  double wraparound_rate = 0;
  double rounds_with_wraparound = 0;
  // Bound on E||estimate - sum x_i||^2 (sum scale; divide by n^2 for the
  // mean), using the configured sum-norm bound.
  double mse_theory_bound = 0;
  bool theory_hypothesis_holds = true;
  // Measured wraparound squared error per coordinate (grid units) and the
  // modular-clipping bound for it.
  double wrap_sq_error_per_coord = 0;
  double wrap_sq_error_bound = 0;
};

// n vectors iid uniform on the radius-c sphere in R^d.
std::vector<std::vector<double>> SampleSphere(int64_t n, int64_t d, double c,
                                              RandomStream& rng);

// Central continuous Gaussian mechanism: sum of clipped inputs plus
// N(0, (c / eps)^2) per coordinate, which is 1/2 eps^2-zCDP for l2
// sensitivity c.
absl::StatusOr<std::vector<double>> GaussianBaseline(
    std::span<const std::vector<double>> inputs, double eps_zcdp, double c,
    RandomStream& rng);

// Runs every (eps, B, k) point in order eps-major, then B, then k.
// Infeasible points are reported with PointStatus::kInfeasible.
absl::StatusOr<std::vector<DmeResult>> RunDme(const DmeConfig& cfg);

// Fixed CSV schema; one row per result.
inline constexpr const char* kDmeCsvHeader =
    "eps,delta,B,k,norm_mode,n,d,c,gamma,sigma,mse_ddgauss_mean,"
    "mse_ddgauss_ci,mse_baseline_mean,mse_baseline_ci,wraparound_rate,"
    "theory_bound,status";

// Writes the header and rows. theory_bound is written at mean scale
// (divided by n^2). Numbers use 12 significant digits; absent values
// (single-trial CIs, infeasible points) are empty fields.
void WriteDmeCsv(const DmeConfig& cfg, std::span<const DmeResult> results,
                 std::ostream& out);

std::string FormatNumber(double value);

}  // namespace ddg

#endif  // DDG_DME_H_
