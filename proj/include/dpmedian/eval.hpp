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

#ifndef DPMEDIAN_EVAL_HPP_
#define DPMEDIAN_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dpmedian/budget.hpp"
#include "dpmedian/cdf_tree.hpp"
#include "dpmedian/composite.hpp"
#include "dpmedian/exp_mech.hpp"
#include "dpmedian/noisy_binsearch.hpp"
#include "dpmedian/order_stats.hpp"
#include "dpmedian/random.hpp"

namespace dpmedian {

// ---- distributions ----

struct LognormalDist {
  double mu;     // median is exp(mu)
  double sigma;  // std of the exponentiated normal
};
struct NormalDist {
  double mu;
  double sigma;
};
struct UniformDist {
  double a;
  double b;
};
// A finite population sampled by simple random sampling without replacement.
struct EmpiricalPopulation {
  std::shared_ptr<const std::vector<double>> values;  // need not be sorted
  double sampling_fraction;                           // e.g. 0.01
};

using Distribution =
    std::variant<LognormalDist, NormalDist, UniformDist, EmpiricalPopulation>;

// Population median: exact for the parametric families; the midpoint of the
// median set for an empirical population.
double TrueMedian(const Distribution& dist);

// Draws one dataset. `n` is the requested size; an empirical population
// ignores it and uses round(fraction * N).
std::vector<double> DrawDataset(const Distribution& dist, int64_t n,
                                RngStream& rng);

std::string DistributionName(const Distribution& dist);

// ---- mechanisms under test ----

enum class MechanismId {
  kNonprivate,
  kExpMech,
  kCdfPostProcess,
  kNoisyBinSearch,
  kBinSearchCdf,
};

MechanismId MechanismFromString(const std::string& name);
std::string ToString(MechanismId id);

// One bag of hyperparameters covering every mechanism; unused fields are
// ignored by mechanisms that do not read them.
struct Hyperparams {
  double alpha = 0.05;
  RangeSpec range{0.0, 1.0, 0.0};
  bool union_bound = false;
  double beta2 = 0.0;   // ExpMech union privacy-error share (default alpha/2)
  double gamma = 0.5;   // union/search alpha split; hybrid budget split
  double r1 = 0.25;     // hybrid coverage split
  double lb = 0.5;      // binary-search quantile brackets
  double ub = 0.5;
  double continuity_sigma = 0.0;  // > 0 turns the continuity wrapper on
  double continuity_beta = 0.05;
};

struct MechanismOutput {
  Interval interval;
  std::optional<NoisyCdf> cdf;            // CDFPostProcess / hybrid phase 2
  std::vector<Measurement> measurements;  // NoisyBinSearch / hybrid phase 1
  // 0 for an exact CI; beta > 0 marks the weakened (beta, 1-alpha)-good
  // guarantee of a continuity-wrapped run.
  double goodness_beta = 0.0;
};

// Runs one mechanism once, applying the continuity wrapper when configured.
MechanismOutput RunMechanism(MechanismId id, const Hyperparams& hp,
                             const Sample& s, const Budget& budget,
                             RngStream& rng, BudgetLedger* ledger = nullptr);

// ---- metrics ----

// (I_U - I_L) / (U^alpha(d) - L^alpha(d)); throws DegenerateBaselineError
// when the non-private width is 0.
double RelWidth(const Sample& s, double alpha, const Interval& interval);

// Containment fraction, inclusive endpoints.
double EmpiricalCoverage(double true_median, std::span<const Interval> intervals);

// mean(point estimates) - true median.
double Bias(std::span<const double> point_estimates, double true_median);

// Center of a released interval, computed before any display truncation.
double MidpointEstimator(const Interval& interval);

// ---- experiment grid ----

struct ExperimentConfig {
  Distribution dist;
  int64_t n = 1000;
  int num_datasets = 100;
  int trials_per_dataset = 5;
  MechanismId mechanism = MechanismId::kExpMech;
  Hyperparams hp;
  Budget budget = Budget::ZCDP(1.0);
  uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

struct RunRecord {
  int dataset_id;
  int trial_id;
  bool ok;            // per-run mechanism failures are recorded, not fatal
  std::string error;  // empty when ok
  double lower;
  double upper;
  double point;  // midpoint estimate (pre-truncation)
  double np_lower;
  double np_upper;
  double rel_width;  // NaN when the baseline is degenerate or the run failed
  bool covered;
  double spend_zcdp;
};

// Aggregates are recomputable from the records; records are the source of
// truth. Failed runs count against coverage and are excluded from width and
// bias aggregates.
struct Report {
  std::string mechanism;
  std::string distribution;
  int64_t n = 0;
  double alpha = 0.0;
  double true_median = 0.0;
  uint64_t seed = 0;
  std::vector<RunRecord> records;

  double coverage = 0.0;
  double rel_width_q05 = 0.0;
  double rel_width_q25 = 0.0;
  double rel_width_median = 0.0;
  double rel_width_q75 = 0.0;
  double rel_width_q95 = 0.0;
  double bias = 0.0;
  double mean_spend_zcdp = 0.0;
  int64_t failures = 0;
  int64_t degenerate_baselines = 0;
};

// Deterministic given the config: every (dataset, trial) cell runs on its own
// child stream, datasets are fixed across trials, and cells run in a parallel
// worker pool with order-independent aggregation.
Report RunExperiment(const ExperimentConfig& cfg);

// Recomputes the aggregate block from the records.
void RecomputeAggregates(Report& report);

// records schema v1: one CSV row per (dataset, trial).
void WriteRecordsCsv(const Report& report, std::ostream& out);
// summary schema v1: a single JSON document with config echo and aggregates.
void WriteSummaryJson(const Report& report, std::ostream& out);

// Deterministic parallel loop used by the harness and the acceptance suite.
void ParallelFor(int64_t count, int threads,
                 const std::function<void(int64_t)>& body);

}  // namespace dpmedian

#endif  // DPMEDIAN_EVAL_HPP_
