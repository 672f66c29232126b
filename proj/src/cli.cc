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

#include "ddg/cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "ddg/accountant.h"
#include "ddg/dme.h"
#include "ddg/flatten.h"
#include "ddg/rounding.h"
#include "ddg/verify.h"

namespace ddg {
namespace {

using nlohmann::json;

// Non-finite values have no JSON literal.
json Number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// Round-trip precision so a manifest reproduces the run exactly.
std::string Exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string JoinNumbers(const auto& values) {
  std::vector<std::string> parts;
  for (const auto& v : values) parts.push_back(Exact(v));
  return absl::StrCat("[", absl::StrJoin(parts, ","), "]");
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The manifest is itself a valid --config file; wall-clock data lives in
// comments so reruns see identical inputs.
std::string RenderManifest(const DmeConfig& cfg) {
  std::ostringstream m;
  m << "; ddg " << kToolVersion << " run manifest\n"
    << "; written_at=" << UtcTimestamp() << "\n"
    << "; rerun: ddg dme --config <this file> --out <csv>\n";
  const DmeConfig defaults;
  if (cfg.n == defaults.n || cfg.d == defaults.d) {
    m << "; note: n=" << defaults.n << " and d=" << defaults.d
      << " are tool defaults, not published experiment sizes\n";
  }
  m << "[dme]\n"
    << "n=" << cfg.n << "\n"
    << "d=" << cfg.d << "\n"
    << "c=" << Exact(cfg.c) << "\n"
    << "eps=" << JoinNumbers(cfg.eps_targets) << "\n"
    << "delta=" << Exact(cfg.delta) << "\n"
    << "bits=" << JoinNumbers(cfg.bit_widths) << "\n"
    << "k=" << JoinNumbers(cfg.k_values) << "\n"
    << "norm_mode=" << NormModeName(cfg.norm_mode) << "\n"
    << "trials=" << cfg.trials << "\n"
    << "beta=" << Exact(cfg.beta) << "\n"
    << "seed=" << cfg.master_seed << "\n";
  return m.str();
}

json ResultsJson(const DmeConfig& cfg, const std::vector<DmeResult>& rows) {
  json out = json::array();
  const double n2 = static_cast<double>(cfg.n) * static_cast<double>(cfg.n);
  for (const DmeResult& r : rows) {
    json row = {{"eps", r.eps},
                {"delta", cfg.delta},
                {"B", r.bit_width},
                {"k", r.k},
                {"norm_mode", NormModeName(r.norm_mode)},
                {"n", cfg.n},
                {"d", cfg.d},
                {"c", cfg.c}};
    if (r.status == PointStatus::kInfeasible) {
      row["status"] = "infeasible";
      row["detail"] = r.status_detail;
    } else {
      row["status"] = "ok";
      row["gamma"] = r.gamma;
      row["sigma"] = r.sigma;
      row["eps_dp"] = Number(r.eps_dp);
      row["mse_ddgauss_mean"] = r.mse_ddgauss.mean;
      row["mse_ddgauss_ci"] = r.mse_ddgauss.half_width
                                  ? json(*r.mse_ddgauss.half_width)
                                  : json(nullptr);
      row["mse_baseline_mean"] = r.mse_baseline.mean;
      row["mse_baseline_ci"] = r.mse_baseline.half_width
                                   ? json(*r.mse_baseline.half_width)
                                   : json(nullptr);
      row["wraparound_rate"] = r.wraparound_rate;
      row["theory_bound"] = r.theory_hypothesis_holds
                                ? Number(r.mse_theory_bound / n2)
                                : json(nullptr);
    }
    out.push_back(std::move(row));
  }
  return out;
}

int Fail(std::ostream& err, const absl::Status& status) {
  err << "error: " << status.message() << "\n";
  return 1;
}

struct DmeFlags {
  DmeConfig cfg;
  std::string norm_mode = "general";
  std::string out_path;
  bool json = false;
};

struct AccountFlags {
  int64_t n = 0;
  int64_t d = 1;
  double c = 1;
  double gamma = 1;
  double sigma = 1;
  double beta = 0;
  double delta = 1e-5;
  int64_t rounds = 1;
  std::vector<double> drops;
  std::optional<double> delta2_override;
  bool json = false;
};

int RunDmeCommand(DmeFlags& flags, std::ostream& out, std::ostream& err) {
  auto mode = ParseNormMode(flags.norm_mode);
  if (!mode.ok()) return Fail(err, mode.status());
  flags.cfg.norm_mode = *mode;
  if (absl::Status s = flags.cfg.Validate(); !s.ok()) return Fail(err, s);

  auto rows = RunDme(flags.cfg);
  if (!rows.ok()) return Fail(err, rows.status());

  std::ofstream csv(flags.out_path, std::ios::binary);
  if (!csv) {
    return Fail(err, absl::InvalidArgumentError(
                         absl::StrCat("cannot open ", flags.out_path)));
  }
  WriteDmeCsv(flags.cfg, *rows, csv);
  std::ofstream manifest(flags.out_path + ".manifest.ini", std::ios::binary);
  manifest << RenderManifest(flags.cfg);
  if (flags.json) {
    std::ofstream js(flags.out_path + ".json", std::ios::binary);
    js << ResultsJson(flags.cfg, *rows).dump(2) << "\n";
  }
  if (!csv || !manifest) {
    return Fail(err, absl::InternalError("failed writing outputs"));
  }
  int infeasible = 0;
  for (const DmeResult& r : *rows) {
    if (r.status == PointStatus::kInfeasible) ++infeasible;
  }
  out << "wrote " << rows->size() << " rows to " << flags.out_path << " ("
      << infeasible << " infeasible)\n";
  return 0;
}

int RunAccountCommand(const AccountFlags& f, std::ostream& out,
                      std::ostream& err) {
  SensitivityBound delta2;
  if (f.delta2_override.has_value()) {
    if (!(*f.delta2_override > 0)) {
      return Fail(err, absl::InvalidArgumentError(
                           "delta2-override: must be positive"));
    }
    delta2.delta2 = *f.delta2_override;
    delta2.delta2_grid = *f.delta2_override / f.gamma;
  } else {
    auto params = RoundingParams::Create(f.gamma, f.beta, f.d);
    if (!params.ok()) return Fail(err, params.status());
    auto bound = Delta2Bound(f.c, *params);
    if (!bound.ok()) return Fail(err, bound.status());
    delta2 = *bound;
  }
  if (f.rounds < 1) {
    return Fail(err, absl::InvalidArgumentError("rounds: must be >= 1"));
  }
  auto report = MakePrivacyReport(delta2, f.sigma, f.gamma, f.n, f.d, f.delta);
  if (!report.ok()) return Fail(err, report.status());
  const double composed = Compose(report->rho, f.rounds);
  auto composed_dp = ZcdpToDp(composed, f.delta);
  if (!composed_dp.ok()) return Fail(err, composed_dp.status());

  const AccountingInputs inputs{delta2.delta2, f.sigma, f.gamma, f.n, f.d};
  std::vector<std::pair<double, double>> dropout;
  for (double fraction : f.drops) {
    auto eps = DropoutEpsilon(inputs, fraction);
    if (!eps.ok()) return Fail(err, eps.status());
    dropout.emplace_back(fraction, *eps);
  }

  if (f.json) {
    json j = {{"delta2", delta2.delta2},
              {"delta2_grid", delta2.delta2_grid},
              {"tau", report->tau},
              {"eps_zcdp", report->eps_zcdp},
              {"rho", report->rho},
              {"branch", EpsilonBranchName(report->branch_used)},
              {"rounds", f.rounds},
              {"rho_composed", composed},
              {"delta", f.delta},
              {"eps_dp", report->eps_dp},
              {"eps_dp_composed", *composed_dp},
              {"note", "composition assumes full participation"}};
    json drops = json::array();
    for (const auto& [fraction, eps] : dropout) {
      drops.push_back({{"drop_fraction", fraction},
                       {"eps_zcdp", eps},
                       {"ratio", eps / report->eps_zcdp}});
    }
    j["dropout"] = std::move(drops);
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "delta2: " << FormatNumber(delta2.delta2) << "\n"
      << "tau: " << FormatNumber(report->tau) << "\n"
      << "eps_zcdp: " << FormatNumber(report->eps_zcdp) << " ("
      << EpsilonBranchName(report->branch_used) << " branch)\n"
      << "rho: " << FormatNumber(report->rho) << "\n"
      << "rho_composed (T=" << f.rounds << "): " << FormatNumber(composed)
      << "\n"
      << "eps_dp (delta=" << FormatNumber(f.delta)
      << "): " << FormatNumber(report->eps_dp) << "\n"
      << "eps_dp_composed: " << FormatNumber(*composed_dp) << "\n";
  for (const auto& [fraction, eps] : dropout) {
    out << "eps_zcdp_dropout (f=" << FormatNumber(fraction)
        << "): " << FormatNumber(eps)
        << " ratio=" << FormatNumber(eps / report->eps_zcdp) << "\n";
  }
  out << "note: composition assumes full participation\n";
  return 0;
}

int RunVerifyCommand(const std::vector<std::string>& suites, std::ostream& out,
                     std::ostream& err) {
  bool all_passed = true;
  for (const std::string& suite : suites) {
    auto report = RunVerifySuite(suite);
    if (!report.ok()) return Fail(err, report.status());
    for (const VerifyCheck& c : report->checks) {
      out << (c.passed ? "PASS " : "FAIL ") << suite << ": " << c.name
          << " measured=" << FormatNumber(c.measured)
          << " threshold=" << FormatNumber(c.threshold) << "\n";
      if (!c.passed) {
        err << "violated: " << suite << ": " << c.name << "\n";
      }
    }
    out << suite << ": " << (report->passed() ? "PASS" : "FAIL") << "\n";
    all_passed = all_passed && report->passed();
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Distributed discrete Gaussian mechanism toolkit", "ddg"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "INI/TOML config with a [dme] section; flags override it");

  DmeFlags dme;
  CLI::App* dme_cmd =
      app.add_subcommand("dme", "Run a distributed mean estimation sweep");
  dme_cmd->add_option("--n", dme.cfg.n, "Number of clients")->required();
  dme_cmd->add_option("--d", dme.cfg.d, "Dimension")->capture_default_str();
  dme_cmd->add_option("--c", dme.cfg.c, "Clip norm")->capture_default_str();
  dme_cmd->add_option("--eps", dme.cfg.eps_targets, "zCDP epsilon targets")
      ->delimiter(',')
      ->capture_default_str();
  dme_cmd->add_option("--delta", dme.cfg.delta, "Reporting delta")
      ->capture_default_str();
  dme_cmd->add_option("--bits", dme.cfg.bit_widths, "Bit widths")
      ->delimiter(',')
      ->capture_default_str();
  dme_cmd->add_option("--k", dme.cfg.k_values, "Sigma multipliers")
      ->delimiter(',')
      ->capture_default_str();
  dme_cmd->add_option("--norm_mode,--norm-mode", dme.norm_mode,
                      "general or optimistic")
      ->capture_default_str();
  dme_cmd->add_option("--trials", dme.cfg.trials, "Trials per point")
      ->capture_default_str();
  dme_cmd->add_option("--beta", dme.cfg.beta, "Conditional rounding beta")
      ->capture_default_str();
  dme_cmd->add_option("--seed", dme.cfg.master_seed, "Master seed")
      ->envname("DDG_SEED")
      ->capture_default_str();
  dme_cmd->add_option("--out", dme.out_path, "Output CSV path")->required();
  dme_cmd->add_flag("--json", dme.json, "Also write <out>.json");

  AccountFlags acct;
  CLI::App* acct_cmd =
      app.add_subcommand("account", "Privacy accounting for one round");
  acct_cmd->add_option("--n", acct.n, "Number of clients")->required();
  acct_cmd->add_option("--d", acct.d, "Padded dimension")->capture_default_str();
  acct_cmd->add_option("--c", acct.c, "Clip norm")->capture_default_str();
  acct_cmd->add_option("--gamma", acct.gamma, "Granularity")
      ->capture_default_str();
  acct_cmd->add_option("--sigma", acct.sigma, "Per-client noise scale")
      ->capture_default_str();
  acct_cmd->add_option("--beta", acct.beta, "Conditional rounding beta")
      ->capture_default_str();
  acct_cmd->add_option("--delta", acct.delta, "Approximate DP delta")
      ->capture_default_str();
  acct_cmd->add_option("--T,--rounds", acct.rounds, "Composed rounds")
      ->capture_default_str();
  acct_cmd->add_option("--drop", acct.drops, "Dropout fractions");
  acct_cmd->add_option("--delta2-override", acct.delta2_override,
                       "Use this sensitivity instead of the rounding bound");
  acct_cmd->add_flag("--json", acct.json, "Emit a JSON object");

  std::vector<std::string> suites;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Run numerical verification suites");
  verify_cmd->add_option("suite", suites, "convolution|sampler|transform|rounding")
      ->required()
      ->check(CLI::IsMember(VerifySuiteNames()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (dme_cmd->parsed()) return RunDmeCommand(dme, out, err);
  if (acct_cmd->parsed()) return RunAccountCommand(acct, out, err);
  return RunVerifyCommand(suites, out, err);
}

}  // namespace ddg
