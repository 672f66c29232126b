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

#ifndef DDG_PROTOCOL_H_
#define DDG_PROTOCOL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ddg/dgauss.h"
#include "ddg/flatten.h"
#include "ddg/modular.h"
#include "ddg/random.h"
#include "ddg/rounding.h"

namespace ddg {

// Public parameters of one aggregation round.
struct ProtocolConfig {
  int64_t n = 1;           // clients
  int64_t d_original = 1;  // input dimension before padding
  double c = 1;            // l2 clip bound
  double gamma = 1;        // granularity
  Modulus modulus;
  double sigma = 1;  // per-client noise scale, original units
  double beta = 0;
  uint64_t master_seed = 0;
  int64_t round_index = 0;
  // Blind client messages with zero-sum masks before aggregation.
  bool masked_aggregation = true;
  // Test mode: permits sigma = 0 so that noise-free error sources can be
  // isolated. Never set this in a private deployment.
  bool allow_zero_noise = false;

  // Checks ranges and that sigma / gamma >= 1/2 (or sigma = 0 in test mode).
  absl::Status Validate() const;
  int64_t padded_dim() const;
  RoundingParams rounding_params() const;
};

// Public randomness shared by all parties: the sign vector xi, derived from
// the master seed.
absl::StatusOr<SignVector> MakeSharedSigns(const ProtocolConfig& cfg);

// Seed of client `client`'s private stream for the configured round.
uint64_t ClientSeed(const ProtocolConfig& cfg, int64_t client);

struct ClientEncoding {
  ResidueVector message;
  int retries = 0;
};

// Client procedure: pad, clip to norm c and rescale by 1/gamma, flatten,
// conditionally round, add iid N_Z(0, (sigma/gamma)^2) noise, reduce mod m.
absl::StatusOr<ClientEncoding> ClientEncode(std::span<const double> x,
                                            const ProtocolConfig& cfg,
                                            const SignVector& xi,
                                            RandomStream& rng);

// Server procedure: center the modular sum into {1 - m/2, ..., m/2}, scale
// by gamma, unflatten and drop the padding. The estimate is of the SUM of
// the client inputs.
absl::StatusOr<std::vector<double>> ServerDecode(const SecAggResult& aggregate,
                                                 const ProtocolConfig& cfg,
                                                 const SignVector& xi);

struct RoundDiagnostics {
  // Coordinates whose unreduced integer aggregate fell outside
  // {1 - m/2, ..., m/2} and therefore wrapped.
  int64_t wraparound_coords = 0;
  // Squared error introduced by wrapping, in grid units.
  double wraparound_sq_error = 0;
  int64_t total_retries = 0;
  // ||x~_i||_2 of each client's rounded vector, grid units.
  std::vector<double> per_client_norms;
};

struct RoundOutput {
  std::vector<double> estimate;
  RoundDiagnostics diagnostics;
};

// One full round over `inputs` (exactly cfg.n vectors of length
// cfg.d_original), with per-client streams derived from the master seed.
absl::StatusOr<RoundOutput> RunRound(std::span<const std::vector<double>> inputs,
                                     const ProtocolConfig& cfg);

struct MseBound {
  double value = 0;
  // False when sigma_hat^2 > r^2, outside the bound's hypothesis; value is
  // then +infinity.
  bool hypothesis_holds = true;
  double sigma_hat_sq = 0;
  double range = 0;  // r = gamma m / 2
};

// Closed-form bound on E||estimate - sum x_i||^2 with flattening constant
// rho = 1, given an upper bound on ||sum x_i||_2.
MseBound TheoreticalMseBound(const ProtocolConfig& cfg, double sum_norm_bound);

}  // namespace ddg

#endif  // DDG_PROTOCOL_H_
