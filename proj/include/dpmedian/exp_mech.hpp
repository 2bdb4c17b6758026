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

#ifndef DPMEDIAN_EXP_MECH_HPP_
#define DPMEDIAN_EXP_MECH_HPP_

#include <cstdint>

#include "dpmedian/budget.hpp"
#include "dpmedian/order_stats.hpp"
#include "dpmedian/random.hpp"

namespace dpmedian {

struct ExpMechConfig {
  double alpha = 0.05;
  RangeSpec range{0.0, 1.0, 0.0};
  // Naive union-bound coverage analysis instead of the rank-conditioned one.
  bool union_bound = false;
  // Privacy-error share of alpha on the union path (unused otherwise).
  double beta2 = 0.0;
};

struct ExpMechTargets {
  int64_t k_low;
  int64_t k_up;
  // Worst-case rank error bound used on the union path (0 on the tight path).
  double rank_error;
};

// theta-widened exponential mechanism for the k-th order statistic: samples
// x in [range.lower, range.upper] with density proportional to
// exp(epsilon * u(d, x) / 2), where u(d, x) = -min{|rank_d(a) - k| : |a-x| <= theta}.
// Implemented by shifting the data below rank k left by theta and above right
// by theta (saturating at the range ends), inserting the range endpoints,
// Gumbel-max selection over the inter-point gaps, then a uniform draw in the
// winning gap. A point in the open gap below the i-th shifted value has
// widened rank i-1, so the gap utility is -|i-1-k| (0-based gap index = rank).
// theta == 0 degenerates to the plain order-statistic utility.
double WidenedExpMech(const Sample& s, double epsilon, int64_t target_rank,
                      const RangeSpec& range, RngStream& rng);

// Worst-case rank error of the widened mechanism: with probability >= 1-beta
// the output is within theta of a data point whose rank is within
// t = ln((|R| - 2 theta)/(2 theta beta)) / epsilon of the target.
double RankErrorBound(double epsilon, double range_width, double theta,
                      double beta);

enum class IntervalSide { kLower, kUpper };

// Distribution-free bound on the probability that the one-sided private
// endpoint at target rank k misses the median, for a mechanism run at
// epsilon/2 per endpoint. Lower side:
//   C_Bin(k-1) + sum_{m >= k} C'_Bin(m) * min(1, (|R|-2theta) e^{-(m-k) eps/2} / (2 theta));
// the upper side is the exact mirror (m <= k, tail 1 - C_Bin(k)). Each
// privacy term is capped at its binomial mass.
double FailureProb(int64_t n, int64_t k, double epsilon, double range_width,
                   double theta, IntervalSide side);

// Target ranks for the confidence interval. Tight path: scan k_low downward
// from ceil(n/2) and k_up upward, keeping the first rank whose FailureProb
// is <= alpha/2. Union path: rank-shift the non-private beta1 targets by the
// RankErrorBound, with beta1 = (alpha - beta2)/(1 - beta2/2). Results are
// cached per configuration. Throws NoValidTargetError when the budget cannot
// meet the requested coverage.
ExpMechTargets ComputeTargets(int64_t n, double epsilon,
                              const ExpMechConfig& cfg);

// The ExpMech confidence interval: two widened-exp-mech draws at epsilon/2
// each (total epsilon pure DP), shifted outward by theta. A zCDP budget rho
// is spent as epsilon = sqrt(2 rho). Valid only when the population median
// lies in cfg.range.
Interval ExpMechCi(const Sample& s, const Budget& budget,
                   const ExpMechConfig& cfg, RngStream& rng,
                   BudgetLedger* ledger = nullptr);

// Point estimator: widened exponential mechanism at rank ceil(n/2) with the
// full budget.
double ExpMechPoint(const Sample& s, const Budget& budget,
                    const RangeSpec& range, RngStream& rng,
                    BudgetLedger* ledger = nullptr);

}  // namespace dpmedian

#endif  // DPMEDIAN_EXP_MECH_HPP_
