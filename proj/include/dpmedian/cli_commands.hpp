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

#ifndef DPMEDIAN_CLI_COMMANDS_HPP_
#define DPMEDIAN_CLI_COMMANDS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpmedian/budget.hpp"
#include "dpmedian/eval.hpp"

namespace dpmedian {

// Exit codes shared by the CLI front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitMechanismError = 3;

// `ci`: ingest a delimited file and release one DP confidence interval (and
// point estimate) per group under a split total budget.
struct CiCommandConfig {
  std::string input_path;
  std::string column;
  std::string group_by;  // empty = single group
  char delimiter = ',';
  MechanismId mechanism = MechanismId::kExpMech;
  Hyperparams hp;
  Budget total_budget = Budget::ZCDP(0.5);
  std::vector<double> split_fractions;  // empty = equal split across groups
  // Display-level truncation of negative lower endpoints (point estimates
  // are computed before truncation to avoid bias).
  bool truncate_nonnegative = false;
  uint64_t seed = 0;
  std::string output_prefix;  // empty = stdout summary only
};

// Loads a CiCommandConfig from a JSON config file. Every statistical
// hyperparameter (alpha, budget, range, granularity) must be explicit; the
// loader refuses to default them.
CiCommandConfig LoadCiConfig(const std::string& path);

// Runs the ci workflow; writes the per-group table to `out` and side files
// under output_prefix. Throws ConfigError / DataError; per-group mechanism
// failures are reported in the table and rethrown at the end as
// a mechanism error.
void RunCiCommand(const CiCommandConfig& cfg, std::ostream& out);

// `simulate` / `coverage`: Monte-Carlo evaluation over a (mechanism, rho)
// grid against a synthetic or empirical population.
struct SimulateCommandConfig {
  Distribution dist = LognormalDist{0.405465108108164, 1.0};  // ln(1.5)
  int64_t n = 1000;
  int num_datasets = 100;
  int trials_per_dataset = 5;
  std::vector<MechanismId> mechanisms;
  std::vector<double> budget_values;
  bool pure_dp = false;  // budget values are epsilons instead of rhos
  Hyperparams hp;
  uint64_t seed = 0;
  int threads = 0;
  std::string output_prefix;       // empty = stdout summary only
  std::string format = "summary";  // records|summary|both
};

void RunSimulateCommand(const SimulateCommandConfig& cfg, std::ostream& out);

}  // namespace dpmedian

#endif  // DPMEDIAN_CLI_COMMANDS_HPP_
