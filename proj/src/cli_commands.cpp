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

#include "dpmedian/cli_commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpmedian/errors.hpp"
#include "dpmedian/ingest.hpp"

namespace dpmedian {
namespace {

std::string SanitizeForFilename(const std::string& s) {
  std::string out = s.empty() ? "all" : s;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return out;
}

void WriteFileOrThrow(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write output file: " + path);
  out << content;
}

double RequireNumber(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(std::string("config file must set numeric '") + key +
                      "' explicitly");
  }
  return j[key].get<double>();
}

}  // namespace

CiCommandConfig LoadCiConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file parse error: ") + e.what());
  }

  CiCommandConfig cfg;
  if (!j.contains("input") || !j.contains("column")) {
    throw ConfigError("config file must set 'input' and 'column'");
  }
  cfg.input_path = j["input"].get<std::string>();
  cfg.column = j["column"].get<std::string>();
  cfg.group_by = j.value("group_by", std::string());
  if (j.contains("delimiter")) {
    const std::string d = j["delimiter"].get<std::string>();
    if (d.size() != 1) throw ConfigError("delimiter must be one character");
    cfg.delimiter = d[0];
  }
  cfg.mechanism = MechanismFromString(j.value("mechanism", std::string("expmech")));

  // The statistical knobs matter too much for silent defaults: alpha, the
  // budget, the range, and the granularity are all mandatory.
  cfg.hp.alpha = RequireNumber(j, "alpha");
  cfg.hp.range = RangeSpec(RequireNumber(j, "range_lower"),
                           RequireNumber(j, "range_upper"),
                           RequireNumber(j, "granularity"));
  if (j.contains("rho") == j.contains("epsilon")) {
    throw ConfigError("config file must set exactly one of 'rho' or 'epsilon'");
  }
  cfg.total_budget = j.contains("rho")
                         ? Budget::ZCDP(RequireNumber(j, "rho"))
                         : Budget::PureDP(RequireNumber(j, "epsilon"));

  cfg.hp.union_bound = j.value("union", false);
  if (j.contains("beta2")) cfg.hp.beta2 = RequireNumber(j, "beta2");
  if (j.contains("gamma")) cfg.hp.gamma = RequireNumber(j, "gamma");
  if (j.contains("r1")) cfg.hp.r1 = RequireNumber(j, "r1");
  if (j.contains("lb")) cfg.hp.lb = RequireNumber(j, "lb");
  if (j.contains("ub")) cfg.hp.ub = RequireNumber(j, "ub");
  if (j.contains("continuity_sigma")) {
    cfg.hp.continuity_sigma = RequireNumber(j, "continuity_sigma");
  }
  if (j.contains("continuity_beta")) {
    cfg.hp.continuity_beta = RequireNumber(j, "continuity_beta");
  }
  if (j.contains("split")) {
    if (!j["split"].is_array()) throw ConfigError("'split' must be an array");
    for (const auto& f : j["split"]) cfg.split_fractions.push_back(f.get<double>());
  }
  cfg.truncate_nonnegative = j.value("truncate_nonnegative", false);
  cfg.seed = j.value("seed", uint64_t{0});
  cfg.output_prefix = j.value("output", std::string());
  return cfg;
}

void RunCiCommand(const CiCommandConfig& cfg, std::ostream& out) {
  const IngestResult data =
      IngestDelimited(cfg.input_path, cfg.column, cfg.group_by, cfg.delimiter);
  const size_t num_groups = data.groups.size();

  std::vector<double> fractions = cfg.split_fractions;
  if (fractions.empty()) {
    fractions.assign(num_groups, 1.0 / static_cast<double>(num_groups));
    // Guard against 1/3-style rounding: make the fractions sum exactly to 1.
    fractions.back() = 1.0;
    for (size_t i = 0; i + 1 < fractions.size(); ++i) fractions.back() -= fractions[i];
  }
  if (fractions.size() != num_groups) {
    throw ConfigError("split fractions count must equal the number of groups");
  }
  const std::vector<Budget> group_budgets =
      Split(cfg.total_budget, std::span<const double>(fractions));

  if (data.rows_dropped > 0) {
    out << "# warning: dropped " << data.rows_dropped
        << " rows with missing or non-numeric values (may bias estimates)\n";
  }

  const RngStream base(cfg.seed);
  std::string first_error;
  char buf[512];
  size_t group_index = 0;
  std::ostringstream table;
  table << "group,n,budget_kind,budget,spend,lower,upper,point,lower_display,"
           "upper_display\n";
  for (const auto& [group, values] : data.groups) {
    const Budget& budget = group_budgets[group_index];
    RngStream stream = base.Child(group_index);
    ++group_index;
    try {
      const Sample sample(values);
      BudgetLedger ledger;
      const MechanismOutput result = RunMechanism(
          cfg.mechanism, cfg.hp, sample, budget, stream, &ledger);
      const double point = MidpointEstimator(result.interval);
      double display_lower = result.interval.lower;
      double display_upper = result.interval.upper;
      if (cfg.truncate_nonnegative) {
        // Display-level only; the point estimate above is pre-truncation.
        display_lower = std::max(0.0, display_lower);
        display_upper = std::max(0.0, display_upper);
      }
      const double spend = budget.kind() == BudgetKind::kPureDP
                               ? ledger.Total().value()
                               : ledger.TotalZcdpEquivalent();
      std::snprintf(buf, sizeof(buf),
                    "%s,%lld,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    group.empty() ? "all" : group.c_str(),
                    static_cast<long long>(sample.size()),
                    ToString(budget.kind()).c_str(), budget.value(), spend,
                    result.interval.lower, result.interval.upper, point,
                    display_lower, display_upper);
      table << buf;

      if (!cfg.output_prefix.empty()) {
        const std::string tag = SanitizeForFilename(group);
        if (result.cdf.has_value()) {
          std::ostringstream side;
          WriteNoisyCdf(*result.cdf, side);
          WriteFileOrThrow(cfg.output_prefix + "_" + tag + "_cdf.csv", side.str());
        }
        if (!result.measurements.empty()) {
          std::ostringstream side;
          WriteMeasurements(result.measurements, side);
          WriteFileOrThrow(cfg.output_prefix + "_" + tag + "_measurements.csv",
                           side.str());
        }
      }
    } catch (const std::runtime_error& e) {
      std::snprintf(buf, sizeof(buf), "%s,error,%s\n",
                    group.empty() ? "all" : group.c_str(), e.what());
      table << buf;
      if (first_error.empty()) first_error = e.what();
    }
  }
  out << table.str();
  if (!cfg.output_prefix.empty()) {
    WriteFileOrThrow(cfg.output_prefix + "_ci.csv", table.str());
  }
  if (!first_error.empty()) {
    throw NoValidTargetError("one or more groups failed: " + first_error);
  }
}

void RunSimulateCommand(const SimulateCommandConfig& cfg, std::ostream& out) {
  if (cfg.mechanisms.empty() || cfg.budget_values.empty()) {
    throw ConfigError("simulate needs at least one mechanism and one budget value");
  }
  out << "mechanism,budget,n,datasets,trials,coverage,relw_q25,relw_median,"
         "relw_q75,bias,mean_spend,failures\n";
  char buf[512];
  for (const MechanismId mech : cfg.mechanisms) {
    for (const double b : cfg.budget_values) {
      ExperimentConfig ec;
      ec.dist = cfg.dist;
      ec.n = cfg.n;
      ec.num_datasets = cfg.num_datasets;
      ec.trials_per_dataset = cfg.trials_per_dataset;
      ec.mechanism = mech;
      ec.hp = cfg.hp;
      ec.budget = cfg.pure_dp ? Budget::PureDP(b) : Budget::ZCDP(b);
      ec.seed = cfg.seed;
      ec.threads = cfg.threads;
      const Report report = RunExperiment(ec);
      std::snprintf(buf, sizeof(buf),
                    "%s,%.17g,%lld,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%lld\n",
                    ToString(mech).c_str(), b,
                    static_cast<long long>(report.n), cfg.num_datasets,
                    cfg.trials_per_dataset, report.coverage,
                    report.rel_width_q25, report.rel_width_median,
                    report.rel_width_q75, report.bias, report.mean_spend_zcdp,
                    static_cast<long long>(report.failures));
      out << buf;

      if (!cfg.output_prefix.empty()) {
        const std::string tag =
            ToString(mech) + "_" + SanitizeForFilename(std::to_string(b));
        if (cfg.format == "records" || cfg.format == "both") {
          std::ostringstream records;
          WriteRecordsCsv(report, records);
          WriteFileOrThrow(cfg.output_prefix + "_" + tag + "_records.csv",
                           records.str());
        }
        if (cfg.format == "summary" || cfg.format == "both") {
          std::ostringstream summary;
          WriteSummaryJson(report, summary);
          WriteFileOrThrow(cfg.output_prefix + "_" + tag + "_summary.json",
                           summary.str());
        }
      }
    }
  }
}

}  // namespace dpmedian
