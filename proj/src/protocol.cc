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

#include "ddg/protocol.h"

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ddg/status_macros.h"

namespace ddg {

absl::Status ProtocolConfig::Validate() const {
  if (n < 1) return absl::InvalidArgumentError("n must be positive");
  if (d_original < 1) {
    return absl::InvalidArgumentError("dimension must be positive");
  }
  if (!(c > 0)) return absl::InvalidArgumentError("c must be positive");
  RETURN_IF_ERROR(RoundingParams::Create(gamma, beta, d_original).status());
  RETURN_IF_ERROR(PaddedDim::Create(d_original).status());
  if (sigma == 0 && allow_zero_noise) return absl::OkStatus();
  if (!(sigma / gamma >= 0.5)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sigma / gamma = ", sigma / gamma,
        " is below 1/2; the sum-privacy guarantee does not apply"));
  }
  return NoiseScale::ForProtocol(sigma / gamma).status();
}

int64_t ProtocolConfig::padded_dim() const {
  return PaddedDim::Create(d_original)->padded();
}

RoundingParams ProtocolConfig::rounding_params() const {
  return RoundingParams{gamma, beta, padded_dim()};
}

absl::StatusOr<SignVector> MakeSharedSigns(const ProtocolConfig& cfg) {
  RETURN_IF_ERROR(cfg.Validate());
  return SignVector::FromSeed(DeriveSeed(cfg.master_seed, {kSignLabel}),
                              cfg.padded_dim());
}

uint64_t ClientSeed(const ProtocolConfig& cfg, int64_t client) {
  return DeriveSeed(cfg.master_seed,
                    {kClientLabel, static_cast<uint64_t>(client),
                     static_cast<uint64_t>(cfg.round_index)});
}

namespace {

// Client output before modular reduction, kept by the simulator for
// diagnostics only.
struct UnreducedEncoding {
  std::vector<int64_t> rounded;  // x~ in grid units
  std::vector<int64_t> noisy;    // x~ + y
  int retries = 0;
};

absl::StatusOr<UnreducedEncoding> EncodeUnreduced(
    std::span<const double> x, const ProtocolConfig& cfg, const SignVector& xi,
    const std::optional<DiscreteGaussianSampler>& sampler, RandomStream& rng) {
  if (static_cast<int64_t>(x.size()) != cfg.d_original) {
    return absl::InvalidArgumentError(absl::StrCat(
        "client input has dimension ", x.size(), ", expected ",
        cfg.d_original));
  }
  const int64_t d = cfg.padded_dim();
  if (xi.size() != d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sign vector has length ", xi.size(), ", expected ", d));
  }
  double norm_sq = 0;
  for (double v : x) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  const double clip = norm > cfg.c ? cfg.c / norm : 1.0;
  std::vector<double> scaled(static_cast<size_t>(d), 0.0);
  for (size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] * clip / cfg.gamma;

  ASSIGN_OR_RETURN(std::vector<double> flat, Flatten(scaled, xi));
  ASSIGN_OR_RETURN(ConditionalRoundResult rounded,
                   ConditionalRound(flat, cfg.c, cfg.rounding_params(), rng));

  UnreducedEncoding out;
  out.retries = rounded.retries;
  out.noisy = rounded.grid;
  out.rounded = std::move(rounded.grid);
  if (sampler.has_value()) {
    for (int64_t& v : out.noisy) {
      ASSIGN_OR_RETURN(const int64_t noise, sampler->Sample(rng));
      v += noise;
    }
  }
  return out;
}

absl::StatusOr<std::optional<DiscreteGaussianSampler>> MakeSampler(
    const ProtocolConfig& cfg) {
  RETURN_IF_ERROR(cfg.Validate());
  if (cfg.sigma == 0) return std::optional<DiscreteGaussianSampler>();
  ASSIGN_OR_RETURN(const NoiseScale scale,
                   NoiseScale::ForProtocol(cfg.sigma / cfg.gamma));
  return std::optional<DiscreteGaussianSampler>(DiscreteGaussianSampler(scale));
}

}  // namespace

absl::StatusOr<ClientEncoding> ClientEncode(std::span<const double> x,
                                            const ProtocolConfig& cfg,
                                            const SignVector& xi,
                                            RandomStream& rng) {
  ASSIGN_OR_RETURN(const auto sampler, MakeSampler(cfg));
  ASSIGN_OR_RETURN(UnreducedEncoding enc,
                   EncodeUnreduced(x, cfg, xi, sampler, rng));
  return ClientEncoding{ModReduce(enc.noisy, cfg.modulus), enc.retries};
}

absl::StatusOr<std::vector<double>> ServerDecode(const SecAggResult& aggregate,
                                                 const ProtocolConfig& cfg,
                                                 const SignVector& xi) {
  RETURN_IF_ERROR(cfg.Validate());
  const ResidueVector& zbar = aggregate.sum();
  const int64_t d = cfg.padded_dim();
  if (zbar.size() != d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "aggregate has dimension ", zbar.size(), ", expected padded ", d));
  }
  if (!(zbar.modulus() == cfg.modulus)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "aggregate modulus ", zbar.modulus().value(), " does not match ",
        cfg.modulus.value()));
  }
  const std::vector<int64_t> centered = Center(zbar);
  std::vector<double> scaled(centered.size());
  for (size_t i = 0; i < centered.size(); ++i) {
    scaled[i] = cfg.gamma * static_cast<double>(centered[i]);
  }
  ASSIGN_OR_RETURN(std::vector<double> y, Unflatten(scaled, xi));
  y.resize(static_cast<size_t>(cfg.d_original));
  return y;
}

absl::StatusOr<RoundOutput> RunRound(std::span<const std::vector<double>> inputs,
                                     const ProtocolConfig& cfg) {
  RETURN_IF_ERROR(cfg.Validate());
  if (static_cast<int64_t>(inputs.size()) != cfg.n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", cfg.n, " client inputs, got ", inputs.size()));
  }
  ASSIGN_OR_RETURN(const SignVector xi, MakeSharedSigns(cfg));
  ASSIGN_OR_RETURN(const auto sampler, MakeSampler(cfg));
  const int64_t d = cfg.padded_dim();

  RoundOutput out;
  RoundDiagnostics& diag = out.diagnostics;
  diag.per_client_norms.reserve(inputs.size());
  std::vector<ResidueVector> messages;
  messages.reserve(inputs.size());
  // Exact integer aggregate, visible only to the simulator.
  std::vector<int64_t> true_sum(static_cast<size_t>(d), 0);
  for (int64_t i = 0; i < cfg.n; ++i) {
    RandomStream rng = MakeStream(ClientSeed(cfg, i));
    ASSIGN_OR_RETURN(UnreducedEncoding enc,
                     EncodeUnreduced(inputs[i], cfg, xi, sampler, rng));
    double norm_sq = 0;
    for (int64_t v : enc.rounded) {
      norm_sq += static_cast<double>(v) * static_cast<double>(v);
    }
    diag.per_client_norms.push_back(std::sqrt(norm_sq));
    diag.total_retries += enc.retries;
    for (size_t j = 0; j < true_sum.size(); ++j) true_sum[j] += enc.noisy[j];
    messages.push_back(ModReduce(enc.noisy, cfg.modulus));
  }

  RandomStream mask_rng = MakeStream(DeriveSeed(
      cfg.master_seed,
      {kMaskLabel, static_cast<uint64_t>(cfg.round_index)}));
  ASSIGN_OR_RETURN(const SecAggResult aggregate,
                   SecAggSum(messages, cfg.masked_aggregation, mask_rng));

  const std::vector<int64_t> centered = Center(aggregate.sum());
  for (size_t j = 0; j < centered.size(); ++j) {
    if (centered[j] != true_sum[j]) {
      ++diag.wraparound_coords;
      const double err = static_cast<double>(centered[j] - true_sum[j]);
      diag.wraparound_sq_error += err * err;
    }
  }
  ASSIGN_OR_RETURN(out.estimate, ServerDecode(aggregate, cfg, xi));
  return out;
}

MseBound TheoreticalMseBound(const ProtocolConfig& cfg, double sum_norm_bound) {
  constexpr double kRho = 1.0;
  const double d = static_cast<double>(cfg.padded_dim());
  const double n = static_cast<double>(cfg.n);
  const double g = cfg.gamma;
  const double beta = cfg.beta;
  MseBound bound;
  bound.range = g * static_cast<double>(cfg.modulus.value()) / 2;
  bound.sigma_hat_sq = kRho / d * sum_norm_bound * sum_norm_bound +
                       (g * g / 4 + cfg.sigma * cfg.sigma) * n;
  if (bound.sigma_hat_sq > bound.range * bound.range) {
    bound.hypothesis_holds = false;
    bound.value = std::numeric_limits<double>::infinity();
    return bound;
  }
  const double r = bound.range;
  const double log_clip = std::log(2 * std::sqrt(2.0) * r) -
                          r * r / (4 * bound.sigma_hat_sq) -
                          0.5 * (std::log(n) + (n - 1) * std::log1p(-beta));
  const double rounding_and_noise = std::sqrt(
      g * g / 4 + beta * beta * g * n / (1 - beta) + (1 - beta) * cfg.sigma *
                                                         cfg.sigma);
  const double inner = std::exp(log_clip) + rounding_and_noise;
  bound.value = d * n / (1 - beta) * inner * inner;
  return bound;
}

}  // namespace ddg
