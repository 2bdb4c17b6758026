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

#ifndef DPMEDIAN_NOISY_BINSEARCH_HPP_
#define DPMEDIAN_NOISY_BINSEARCH_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dpmedian/budget.hpp"
#include "dpmedian/order_stats.hpp"
#include "dpmedian/random.hpp"

namespace dpmedian {

// One released noisy rank measurement. `variance` is the honest variance of
// the averaged estimate (per-draw variance divided by the number of draws).
struct Measurement {
  double x;
  double noisy_rank;  // count scale
  double variance;    // count scale
};

// Derived search parameters of Alg.-style noisy binary search. All fields are
// recomputed from (alpha, range, gamma, lb, ub, rho, n); none are stored stale.
struct SearchConfig {
  double beta1;        // gamma * alpha (sampling-error share)
  double beta2;        // (alpha - beta1) / (1 - beta1/2)
  double steps;        // log2(|R| / theta), the bisection depth
  double rho_step;     // per-step budget cap: rho / (2 * steps)
  double beta_step;    // beta2 / (2 * steps)
  double t_step;       // sqrt(ln(1/beta_step) / (rho_step * n))
  int64_t k_low;       // non-private rank targets at level beta1
  int64_t k_up;
  double q_low;        // search quantile targets, clamped into (0, 1)
  double q_up;
};

struct BinSearchCiConfig {
  double alpha = 0.05;
  RangeSpec range{0.0, 1.0, 0.0};
  double gamma = 0.5;  // beta1 = gamma * alpha
  double lb = 0.5;     // standalone default; the hybrid passes 0.25 / 0.75
  double ub = 0.5;
};

SearchConfig MakeSearchConfig(const BinSearchCiConfig& cfg, double rho,
                              int64_t n);

// Adaptive-budget noisy binary search toward quantile q_target. At each
// midpoint it reuses a prior measurement when one exists, otherwise draws
// noisy ranks N(rank, 1/(2 rho_init)) with rho_init = rho_step/10, averaging
// until the mean +- sqrt(var) Phi^{-1}(1 - beta_t) separates from both
// q_low*n and q_up*n or the per-step budget is exhausted. Stops when the
// remaining budget cannot fund another draw or the bracket narrows below
// theta; leftover budget is reported unspent. Appends fresh measurements to
// `measurements` and returns the rho actually consumed.
double GetNoisyCounts(const Sample& clipped, double rho_budget, double q_target,
                      const SearchConfig& cfg, const RangeSpec& range,
                      std::vector<Measurement>& measurements, RngStream& rng);

// Post-processes measurements into a valid interval. With
// R_t = sqrt(var_t) * Phi^{-1}(1 - beta2 / (2T)) over the T measurements:
//   lower = max{x_t : noisy_rank_t + R_t < k_low_target}   (default default_lo)
//   upper = min{x_t : noisy_rank_t - R_t > k_up_target}    (default default_hi)
// The returned pair is ordered.
Interval PostProcessUnion(std::span<const Measurement> measurements, int64_t n,
                          int64_t k_low_target, int64_t k_up_target,
                          double beta2, double default_lo, double default_hi);

struct BinSearchCiResult {
  Interval interval;
  std::vector<Measurement> measurements;  // releasable, deduplicated by x
  double spent_rho;                       // total zCDP actually consumed
};

// The NoisyBinSearch confidence interval: one search toward q_low and one
// toward q_up (each with rho/2, the second reusing the first's measurements),
// then PostProcessUnion. Valid when the median lies in cfg.range.
BinSearchCiResult NoisyBinSearchCi(const Sample& s, double rho,
                                   const BinSearchCiConfig& cfg, RngStream& rng,
                                   BudgetLedger* ledger = nullptr);

// Writes "x,noisy_rank,variance" rows (with header).
void WriteMeasurements(std::span<const Measurement> measurements,
                       std::ostream& out);

}  // namespace dpmedian

#endif  // DPMEDIAN_NOISY_BINSEARCH_HPP_
