//
// Copyright 2026 the dpmedian authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end: differentially private confidence intervals for
// the median, plus the Monte-Carlo simulation harness.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpmedian/cli_commands.hpp"
#include "dpmedian/errors.hpp"
#include "dpmedian/ingest.hpp"

namespace {

using dpmedian::Budget;
using dpmedian::CiCommandConfig;
using dpmedian::Distribution;
using dpmedian::EmpiricalPopulation;
using dpmedian::LognormalDist;
using dpmedian::MechanismFromString;
using dpmedian::NormalDist;
using dpmedian::RangeSpec;
using dpmedian::SimulateCommandConfig;
using dpmedian::UniformDist;

struct RangeFlags {
  double lower = 0.0;
  double upper = 0.0;
  double theta = 0.0;
};

struct BudgetFlags {
  double rho = -1.0;
  double epsilon = -1.0;

  Budget Resolve() const {
    if ((rho >= 0) == (epsilon >= 0)) {
      throw dpmedian::ConfigError("set exactly one of --rho or --epsilon");
    }
    return rho >= 0 ? Budget::ZCDP(rho) : Budget::PureDP(epsilon);
  }
};

struct DistFlags {
  std::string kind = "lognormal";
  double mu = 0.405465108108164;  // ln(1.5)
  double sigma = 1.0;
  double a = 0.0;
  double b = 1.0;
  std::string input;
  std::string column;
  double rate = 0.01;

  Distribution Resolve() const {
    if (kind == "lognormal") return LognormalDist{mu, sigma};
    if (kind == "normal") return NormalDist{mu, sigma};
    if (kind == "uniform") return UniformDist{a, b};
    if (kind == "empirical") {
      if (input.empty() || column.empty()) {
        throw dpmedian::ConfigError(
            "empirical distribution needs --dist-input and --dist-column");
      }
      const dpmedian::IngestResult ingested =
          dpmedian::IngestDelimited(input, column);
      auto values = std::make_shared<std::vector<double>>();
      for (const auto& [group, vals] : ingested.groups) {
        values->insert(values->end(), vals.begin(), vals.end());
      }
      return EmpiricalPopulation{values, rate};
    }
    throw dpmedian::ConfigError(
        "unknown distribution '" + kind +
        "' (expected lognormal|normal|uniform|empirical)");
  }
};

void AddHyperparamFlags(CLI::App* cmd, dpmedian::Hyperparams* hp,
                        RangeFlags* range, bool require_range) {
  auto* lo = cmd->add_option("--range-lower", range->lower, "Lower end of the median range R");
  auto* hi = cmd->add_option("--range-upper", range->upper, "Upper end of the median range R");
  auto* th = cmd->add_option("--granularity", range->theta, "Granularity theta");
  if (require_range) {
    lo->required();
    hi->required();
    th->required();
  }
  cmd->add_flag("--union", hp->union_bound, "Use the naive union-bound analysis");
  cmd->add_option("--beta2", hp->beta2, "ExpMech union privacy-error share (default alpha/2)");
  cmd->add_option("--gamma", hp->gamma, "Alpha split for search/union paths; hybrid budget share");
  cmd->add_option("--r1", hp->r1, "Hybrid coverage share of the range-finding phase");
  cmd->add_option("--lb", hp->lb, "Binary-search lower quantile bracket");
  cmd->add_option("--ub", hp->ub, "Binary-search upper quantile bracket");
  cmd->add_option("--continuity-sigma", hp->continuity_sigma,
                  "Continuity point-noise sigma (0 = off; 0.1 matches N(0,0.01))");
  cmd->add_option("--continuity-beta", hp->continuity_beta,
                  "Continuity goodness beta (default 0.05)");
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"Differentially private confidence intervals for the median"};
  app.require_subcommand(1);

  // ---- ci ----
  auto* ci = app.add_subcommand("ci", "DP confidence interval per group from a delimited file");
  std::string ci_config_path;
  CiCommandConfig ci_cfg;
  RangeFlags ci_range;
  BudgetFlags ci_budget;
  std::string ci_mechanism = "expmech";
  std::string ci_delimiter = ",";
  std::string ci_output;
  ci->add_option("--config", ci_config_path, "JSON config file (overrides all other flags)");
  ci->add_option("--input", ci_cfg.input_path, "Delimited input file with header");
  ci->add_option("--column", ci_cfg.column, "Numeric column to analyze");
  ci->add_option("--group-by", ci_cfg.group_by, "Optional grouping column");
  ci->add_option("--delimiter", ci_delimiter, "Field delimiter (default ',')");
  ci->add_option("--mechanism", ci_mechanism, "nonprivate|expmech|cdf|binsearch|hybrid");
  ci->add_option("--alpha", ci_cfg.hp.alpha, "1 - confidence level");
  ci->add_option("--rho", ci_budget.rho, "Total zCDP budget");
  ci->add_option("--epsilon", ci_budget.epsilon, "Total pure-DP budget");
  AddHyperparamFlags(ci, &ci_cfg.hp, &ci_range, /*require_range=*/false);
  ci->add_option("--split", ci_cfg.split_fractions,
                 "Per-group budget fractions (default: equal split)");
  ci->add_flag("--truncate-nonnegative", ci_cfg.truncate_nonnegative,
               "Truncate negative displayed lower endpoints to 0");
  ci->add_option("--seed", ci_cfg.seed, "RNG seed");
  ci->add_option("--output", ci_output, "Output path prefix");

  // ---- simulate / coverage ----
  SimulateCommandConfig sim_cfg;
  std::vector<std::string> sim_mechanisms{"expmech"};
  DistFlags sim_dist;
  RangeFlags sim_range;
  auto add_sim_flags = [&](CLI::App* cmd, bool coverage_defaults) {
    cmd->add_option("--mechanisms", sim_mechanisms,
                    "Mechanisms to evaluate (nonprivate|expmech|cdf|binsearch|hybrid)");
    cmd->add_option("--rhos", sim_cfg.budget_values, "zCDP budget grid")->required();
    cmd->add_flag("--pure-dp", sim_cfg.pure_dp, "Interpret budget values as epsilons");
    cmd->add_option("--n", sim_cfg.n, "Dataset size per draw");
    cmd->add_option("--datasets", sim_cfg.num_datasets, "Number of independent datasets");
    cmd->add_option("--trials", sim_cfg.trials_per_dataset, "Mechanism trials per dataset");
    cmd->add_option("--alpha", sim_cfg.hp.alpha, "1 - confidence level");
    cmd->add_option("--dist", sim_dist.kind, "lognormal|normal|uniform|empirical");
    cmd->add_option("--mu", sim_dist.mu, "Lognormal/normal mu");
    cmd->add_option("--sigma", sim_dist.sigma, "Lognormal/normal sigma");
    cmd->add_option("--a", sim_dist.a, "Uniform lower end");
    cmd->add_option("--b", sim_dist.b, "Uniform upper end");
    cmd->add_option("--dist-input", sim_dist.input, "Empirical population file");
    cmd->add_option("--dist-column", sim_dist.column, "Empirical population column");
    cmd->add_option("--rate", sim_dist.rate, "Empirical sampling fraction");
    AddHyperparamFlags(cmd, &sim_cfg.hp, &sim_range, /*require_range=*/true);
    cmd->add_option("--seed", sim_cfg.seed, "RNG seed");
    cmd->add_option("--threads", sim_cfg.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--output", sim_cfg.output_prefix, "Output path prefix");
    cmd->add_option("--format", sim_cfg.format, "records|summary|both");
    if (coverage_defaults) {
      sim_cfg.num_datasets = 1000;
      sim_cfg.trials_per_dataset = 5;
    }
  };
  auto* simulate = app.add_subcommand("simulate", "Width/bias simulation grid");
  add_sim_flags(simulate, false);
  auto* coverage = app.add_subcommand("coverage", "Coverage simulation grid (1000x5 default)");
  // Both subcommands share the flag storage; only one can run per invocation.
  add_sim_flags(coverage, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dpmedian::kExitOk : dpmedian::kExitConfigError;
  }

  if (ci->parsed()) {
    CiCommandConfig cfg;
    if (!ci_config_path.empty()) {
      cfg = dpmedian::LoadCiConfig(ci_config_path);
    } else {
      cfg = ci_cfg;
      if (cfg.input_path.empty() || cfg.column.empty()) {
        throw dpmedian::ConfigError("ci needs --input and --column (or --config)");
      }
      if (ci_delimiter.size() != 1) {
        throw dpmedian::ConfigError("delimiter must be one character");
      }
      cfg.delimiter = ci_delimiter[0];
      cfg.mechanism = MechanismFromString(ci_mechanism);
      cfg.hp.range = RangeSpec(ci_range.lower, ci_range.upper, ci_range.theta);
      cfg.total_budget = ci_budget.Resolve();
      cfg.output_prefix = ci_output;
    }
    dpmedian::RunCiCommand(cfg, std::cout);
    return dpmedian::kExitOk;
  }

  sim_cfg.dist = sim_dist.Resolve();
  sim_cfg.hp.range = RangeSpec(sim_range.lower, sim_range.upper, sim_range.theta);
  sim_cfg.mechanisms.clear();
  for (const std::string& m : sim_mechanisms) {
    sim_cfg.mechanisms.push_back(MechanismFromString(m));
  }
  dpmedian::RunSimulateCommand(sim_cfg, std::cout);
  return dpmedian::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Dispatch(argc, argv);
  } catch (const dpmedian::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return dpmedian::kExitConfigError;
  } catch (const dpmedian::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return dpmedian::kExitDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mechanism error: %s\n", e.what());
    return dpmedian::kExitMechanismError;
  }
}
