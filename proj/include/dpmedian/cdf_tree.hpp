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

#ifndef DPMEDIAN_CDF_TREE_HPP_
#define DPMEDIAN_CDF_TREE_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dpmedian/budget.hpp"
#include "dpmedian/noisy_binsearch.hpp"
#include "dpmedian/order_stats.hpp"
#include "dpmedian/random.hpp"

namespace dpmedian {

// Noisy dyadic histogram tree over [range_lower, range_lower + 2^depth * bin_width].
// Level j (1..depth) holds 2^j noisy bin counts; the 1-bin root is the exact
// public count n with variance 0 and is not stored. The tree span is the
// smallest power-of-two multiple of the granularity covering the data range,
// so every theta-grid point is a bin edge at every level.
struct DpTree {
  int depth;                                // m >= 1
  int64_t total_count;                      // n, public
  double node_sigma2;                       // raw per-node noise variance
  double range_lower;                       // left edge
  double bin_width;                         // leaf width (= theta)
  bool optimized = false;
  std::vector<std::vector<double>> levels;  // levels[j-1] has 2^j counts
  std::vector<double> level_variances;      // [j-1]: per-node variance at level j

  int64_t LeafCount() const { return int64_t{1} << depth; }
  double RangeUpper() const {
    return range_lower + bin_width * static_cast<double>(LeafCount());
  }
};

// Per-level weights of the variance-optimal tree re-estimation. w_minus blends
// a node's own count with its children's sum (leaf base case w_minus = 1);
// w_plus blends that with the parent-minus-sibling estimate coming down from
// the exact root; the final combination weight w equals w_plus.
struct LevelWeights {
  std::vector<double> w_minus;  // index 1..depth ([0] unused)
  std::vector<double> w_plus;
};

LevelWeights HonakerWeights(int depth);

// Depth used by the CDF mechanism for a given range: ceil(log2(width/theta)),
// at least 1. Throws when the resulting grid would blow up (depth > 30).
int TreeDepth(const RangeSpec& range);

// Builds the noisy tree: per level, equal bins over the (power-of-two
// extended) span, exact counts, then i.i.d. N(0, 2 m / rho) per bin. Values
// are expected pre-clipped to [range.lower, range.upper]. rho == +inf gives
// the exact, zero-noise tree.
DpTree BuildDpTree(const Sample& clipped, double rho, const RangeSpec& range,
                   RngStream& rng, BudgetLedger* ledger = nullptr);

// Variance-optimal post-processing: every node is replaced by the fully
// efficient linear estimate blending from-below (children sums) and
// from-above (parent minus sibling) information. Linear in tree size.
// Noisy counts are left unclipped (they may be negative or exceed n).
DpTree OptimizeTree(const DpTree& tree);

// DP estimate of the empirical CDF on a grid, with honest per-point marginal
// variances. Values are NOT monotone in general.
struct NoisyCdf {
  std::vector<double> grid;
  std::vector<double> values;     // fraction scale
  std::vector<double> variances;  // fraction scale (sigma_x^2)
};

// Reads CDF values off an optimized tree at the given grid points, each of
// which must coincide with a leaf bin edge (unaligned grids are rejected).
// Each value is the minimal dyadic cover of the prefix, divided by n.
std::vector<double> TreeToCdf(int64_t n, const DpTree& optimized,
                              std::span<const double> grid);

// Linear coefficient of one raw node on every optimized node, computed by
// running the optimizer on a unit-impulse tree (the root impulse is 0: the
// root is exact). Nodes are indexed level-major: level 1 first, 2^j entries
// per level j.
std::vector<double> NodeEffect(int64_t flat_node_index, int depth);

// Count-scale variance of the optimized prefix estimate ending at leaf-edge
// `prefix` (0..2^depth), for unit raw-node variance. Computed by an adjoint
// pass of the optimizer (equivalent to summing squared NodeEffect
// coefficients over the prefix cover) and cached per depth.
double UnitPrefixVariance(int depth, int64_t prefix);

// Marginal variances (fraction scale) of TreeToCdf values at the grid points.
std::vector<double> GetVariances(const DpTree& tree, std::span<const double> grid);

// Smallest threshold a such that, when x is left of the median,
// Pr(Bin(n,1/2)/n + N(0, sigma_x^2) > a) <= alpha/2. Bisection to 1e-8;
// sigma_x == 0 collapses to the binomial quantile. The mirrored lower
// threshold is 1 - a. Results are cached.
double ThresholdUpper(double sigma_x, int64_t n, double alpha);

struct CdfCiConfig {
  double alpha = 0.05;
  RangeSpec range{0.0, 1.0, 0.0};
  bool union_bound = false;
  // Sampling-error share of alpha on the union path: beta1 = gamma * alpha.
  double gamma = 0.5;
};

struct CdfCiResult {
  Interval interval;
  NoisyCdf cdf;  // releasable side information, no extra budget
};

// The CDFPostProcess confidence interval. Tight path: per-grid-point
// hypothesis tests against mixture thresholds; upper endpoint is
// theta + max{x : C~(x) <= a_x^u} (equivalently the all-suffix rule), lower
// mirrored; a side with no passing grid point falls back to its range end.
// Union path: PostProcessUnion on count-scale measurements against the
// beta1 non-private rank targets. Valid when the median lies in cfg.range.
CdfCiResult CdfPostProcessCi(const Sample& s, double rho,
                             const CdfCiConfig& cfg, RngStream& rng,
                             BudgetLedger* ledger = nullptr);

// Writes "x,value,variance" rows (with header) for release alongside the interval.
void WriteNoisyCdf(const NoisyCdf& cdf, std::ostream& out);

}  // namespace dpmedian

#endif  // DPMEDIAN_CDF_TREE_HPP_
