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

#include "dpmedian/cdf_tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <ostream>
#include <unordered_map>

#include "dpmedian/errors.hpp"
#include "dpmedian/mathutil.hpp"

namespace dpmedian {
namespace {

constexpr int kMaxDepth = 30;

struct NodeRef {
  int level;    // 1..depth
  int64_t pos;  // 0..2^level - 1
};

// Canonical dyadic cover of the leaf prefix [0, prefix). The full prefix is
// decomposed as the two level-1 children rather than the exact root so that
// the released value keeps a positive, honest variance.
void AppendPrefixCover(int depth, int64_t prefix, int level, int64_t pos,
                       int64_t lo, int64_t hi, std::vector<NodeRef>& out) {
  if (prefix <= lo) return;
  if (prefix >= hi) {
    if (level == 0) {
      out.push_back(NodeRef{1, 0});
      out.push_back(NodeRef{1, 1});
    } else {
      out.push_back(NodeRef{level, pos});
    }
    return;
  }
  const int64_t mid = lo + (hi - lo) / 2;
  if (level == 0) {
    AppendPrefixCover(depth, prefix, 1, 0, lo, mid, out);
    AppendPrefixCover(depth, prefix, 1, 1, mid, hi, out);
  } else {
    AppendPrefixCover(depth, prefix, level + 1, 2 * pos, lo, mid, out);
    AppendPrefixCover(depth, prefix, level + 1, 2 * pos + 1, mid, hi, out);
  }
}

std::vector<NodeRef> PrefixCover(int depth, int64_t prefix) {
  std::vector<NodeRef> out;
  AppendPrefixCover(depth, prefix, 0, 0, 0, int64_t{1} << depth, out);
  return out;
}

// The fully efficient linear re-estimation shared by OptimizeTree and
// NodeEffect. Upward pass: from-below estimates
//   t-[m] = raw[m];  t-[j] = w-[j] raw[j] + (1 - w-[j]) (children sum).
// Downward pass from the exact root value:
//   t*[j] = w+[j] t-[j] + (1 - w+[j]) (t*[parent] - t-[sibling]).
std::vector<std::vector<double>> OptimizeLevels(
    const std::vector<std::vector<double>>& levels, double root_value,
    int depth, const LevelWeights& w) {
  std::vector<std::vector<double>> from_below(levels);
  for (int j = depth - 1; j >= 1; --j) {
    const auto& child = from_below[static_cast<size_t>(j)];
    auto& cur = from_below[static_cast<size_t>(j) - 1];
    const double wm = w.w_minus[static_cast<size_t>(j)];
    for (size_t p = 0; p < cur.size(); ++p) {
      cur[p] = wm * cur[p] + (1.0 - wm) * (child[2 * p] + child[2 * p + 1]);
    }
  }
  std::vector<std::vector<double>> final_est(levels.size());
  std::vector<double> parent{root_value};
  for (int j = 1; j <= depth; ++j) {
    const auto& below = from_below[static_cast<size_t>(j) - 1];
    const double wp = w.w_plus[static_cast<size_t>(j)];
    auto& cur = final_est[static_cast<size_t>(j) - 1];
    cur.resize(below.size());
    for (size_t p = 0; p < cur.size(); ++p) {
      cur[p] = wp * below[p] +
               (1.0 - wp) * (parent[p / 2] - below[p ^ 1]);
    }
    parent = cur;
  }
  return final_est;
}

int64_t FlatNodeCount(int depth) { return (int64_t{2} << depth) - 2; }

// Adjoint of OptimizeLevels: given a cotangent over final estimates (a cover
// indicator), accumulates the squared coefficients of every raw node. This is
// the per-equivalence-class efficient realization of summing NodeEffect
// squares: one linear pass instead of one optimizer run per raw node.
double UnitCoverVariance(int depth, const LevelWeights& w,
                         std::span<const NodeRef> cover) {
  std::vector<std::vector<double>> ct_final(static_cast<size_t>(depth) + 1);
  std::vector<std::vector<double>> ct_below(static_cast<size_t>(depth) + 1);
  for (int j = 0; j <= depth; ++j) {
    ct_final[static_cast<size_t>(j)].assign(size_t{1} << j, 0.0);
    ct_below[static_cast<size_t>(j)].assign(size_t{1} << j, 0.0);
  }
  for (const NodeRef& node : cover) {
    ct_final[static_cast<size_t>(node.level)][static_cast<size_t>(node.pos)] += 1.0;
  }
  // Reverse the downward pass (children feed parents' cotangents, so walk
  // deepest level first).
  for (int j = depth; j >= 1; --j) {
    const double wp = w.w_plus[static_cast<size_t>(j)];
    auto& cf = ct_final[static_cast<size_t>(j)];
    for (size_t p = 0; p < cf.size(); ++p) {
      const double c = cf[p];
      if (c == 0.0) continue;
      ct_below[static_cast<size_t>(j)][p] += wp * c;
      if (j >= 2) ct_final[static_cast<size_t>(j) - 1][p / 2] += (1.0 - wp) * c;
      ct_below[static_cast<size_t>(j)][p ^ 1] -= (1.0 - wp) * c;
    }
  }
  // Reverse the upward pass; raw cotangents are the linear coefficients.
  double sumsq = 0.0;
  for (int j = 1; j <= depth; ++j) {
    auto& cb = ct_below[static_cast<size_t>(j)];
    if (j < depth) {
      const double wm = w.w_minus[static_cast<size_t>(j)];
      for (size_t p = 0; p < cb.size(); ++p) {
        const double c = cb[p];
        if (c == 0.0) continue;
        sumsq += (wm * c) * (wm * c);
        ct_below[static_cast<size_t>(j) + 1][2 * p] += (1.0 - wm) * c;
        ct_below[static_cast<size_t>(j) + 1][2 * p + 1] += (1.0 - wm) * c;
      }
    } else {
      for (double c : cb) sumsq += c * c;  // leaf from-below is the raw count
    }
  }
  return sumsq;
}

double UnitNodeVariance(int depth, const LevelWeights& w, int level) {
  const NodeRef node{level, 0};
  return UnitCoverVariance(depth, w, std::span<const NodeRef>(&node, 1));
}

}  // namespace

LevelWeights HonakerWeights(int depth) {
  if (depth < 1) throw ConfigError("tree depth must be >= 1");
  LevelWeights w;
  w.w_minus.assign(static_cast<size_t>(depth) + 1, 0.0);
  w.w_plus.assign(static_cast<size_t>(depth) + 1, 0.0);
  w.w_minus[static_cast<size_t>(depth)] = 1.0;  // a leaf has only its own count
  for (int j = depth - 1; j >= 1; --j) {
    const double child = w.w_minus[static_cast<size_t>(j) + 1];
    w.w_minus[static_cast<size_t>(j)] = 2.0 * child / (2.0 * child + 1.0);
  }
  double parent = 0.0;  // the root estimate is exact: weight (variance) 0
  for (int j = 1; j <= depth; ++j) {
    const double denom = parent + w.w_minus[static_cast<size_t>(j)];
    w.w_plus[static_cast<size_t>(j)] = 1.0 / (1.0 + 1.0 / denom);
    parent = w.w_plus[static_cast<size_t>(j)];
  }
  return w;
}

int TreeDepth(const RangeSpec& range) {
  if (!(range.theta > 0)) {
    throw ConfigError("the tree mechanism needs a positive granularity");
  }
  const int depth = std::max(
      1, static_cast<int>(std::ceil(std::log2(range.Width() / range.theta) - 1e-12)));
  if (depth > kMaxDepth) {
    throw ConfigError("tree depth > 30: granularity too fine for the range");
  }
  return depth;
}

DpTree BuildDpTree(const Sample& clipped, double rho, const RangeSpec& range,
                   RngStream& rng, BudgetLedger* ledger) {
  if (!(rho > 0)) throw ConfigError("tree budget rho must be positive");
  const int depth = TreeDepth(range);
  DpTree tree;
  tree.depth = depth;
  tree.total_count = clipped.size();
  tree.node_sigma2 = 2.0 * depth / rho;  // 0 at rho == inf
  tree.range_lower = range.lower;
  tree.bin_width = range.theta;
  const int64_t leaves = tree.LeafCount();

  // Exact leaf counts; coarser levels are exact sums of nested leaves.
  std::vector<double> counts(static_cast<size_t>(leaves), 0.0);
  for (double v : clipped.values()) {
    int64_t idx = static_cast<int64_t>(
        std::floor((v - range.lower) / range.theta));
    idx = std::clamp<int64_t>(idx, 0, leaves - 1);
    counts[static_cast<size_t>(idx)] += 1.0;
  }
  tree.levels.resize(static_cast<size_t>(depth));
  tree.levels[static_cast<size_t>(depth) - 1] = counts;
  for (int j = depth - 1; j >= 1; --j) {
    const auto& child = tree.levels[static_cast<size_t>(j)];
    auto& cur = tree.levels[static_cast<size_t>(j) - 1];
    cur.resize(child.size() / 2);
    for (size_t p = 0; p < cur.size(); ++p) {
      cur[p] = child[2 * p] + child[2 * p + 1];
    }
  }
  const double sigma = std::sqrt(tree.node_sigma2);
  for (auto& level : tree.levels) {
    for (double& c : level) c += rng.Gaussian(0.0, sigma);
  }
  tree.level_variances.assign(static_cast<size_t>(depth), tree.node_sigma2);
  if (ledger != nullptr && std::isfinite(rho)) {
    ledger->Charge("cdf_tree.tree", Budget::ZCDP(rho));
  }
  return tree;
}

DpTree OptimizeTree(const DpTree& tree) {
  if (tree.optimized) throw ConfigError("tree is already optimized");
  const LevelWeights w = HonakerWeights(tree.depth);
  DpTree out = tree;
  out.optimized = true;
  out.levels = OptimizeLevels(tree.levels,
                              static_cast<double>(tree.total_count),
                              tree.depth, w);
  // Per-node variance is uniform within a level (the recursion is
  // position-independent); evaluate it exactly for the actual estimator.
  for (int j = 1; j <= tree.depth; ++j) {
    out.level_variances[static_cast<size_t>(j) - 1] =
        tree.node_sigma2 * UnitNodeVariance(tree.depth, w, j);
  }
  return out;
}

std::vector<double> NodeEffect(int64_t flat_node_index, int depth) {
  if (flat_node_index < 0 || flat_node_index >= FlatNodeCount(depth)) {
    throw ConfigError("node index out of range");
  }
  std::vector<std::vector<double>> levels(static_cast<size_t>(depth));
  int64_t offset = 0;
  for (int j = 1; j <= depth; ++j) {
    levels[static_cast<size_t>(j) - 1].assign(size_t{1} << j, 0.0);
    const int64_t width = int64_t{1} << j;
    if (flat_node_index >= offset && flat_node_index < offset + width) {
      levels[static_cast<size_t>(j) - 1][static_cast<size_t>(flat_node_index - offset)] = 1.0;
    }
    offset += width;
  }
  // The impulse propagates with a zero root: the root is exact, so noise
  // never enters through it.
  const auto optimized =
      OptimizeLevels(levels, 0.0, depth, HonakerWeights(depth));
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(FlatNodeCount(depth)));
  for (const auto& level : optimized) {
    flat.insert(flat.end(), level.begin(), level.end());
  }
  return flat;
}

double UnitPrefixVariance(int depth, int64_t prefix) {
  if (prefix < 0 || prefix > (int64_t{1} << depth)) {
    throw ConfigError("prefix out of range");
  }
  if (prefix == 0) return 0.0;
  static std::mutex mu;
  static std::map<int, std::unordered_map<int64_t, double>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(depth);
    if (it != cache.end()) {
      auto jt = it->second.find(prefix);
      if (jt != it->second.end()) return jt->second;
    }
  }
  const LevelWeights w = HonakerWeights(depth);
  const std::vector<NodeRef> cover = PrefixCover(depth, prefix);
  const double v = UnitCoverVariance(depth, w, cover);
  std::lock_guard<std::mutex> lock(mu);
  cache[depth][prefix] = v;
  return v;
}

namespace {

int64_t GridIndexOrThrow(const DpTree& tree, double x) {
  const double u = (x - tree.range_lower) / tree.bin_width;
  const int64_t idx = std::llround(u);
  if (std::fabs(u - static_cast<double>(idx)) > 1e-6 * std::max(1.0, std::fabs(u)) ||
      idx < 0 || idx > tree.LeafCount()) {
    throw ConfigError("grid point not aligned with the tree's leaf bin edges");
  }
  return idx;
}

double PrefixCount(const DpTree& tree, int64_t prefix) {
  double total = 0.0;
  for (const NodeRef& node : PrefixCover(tree.depth, prefix)) {
    total += tree.levels[static_cast<size_t>(node.level) - 1]
                        [static_cast<size_t>(node.pos)];
  }
  return total;
}

}  // namespace

std::vector<double> TreeToCdf(int64_t n, const DpTree& optimized,
                              std::span<const double> grid) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (double x : grid) {
    const int64_t idx = GridIndexOrThrow(optimized, x);
    values.push_back(PrefixCount(optimized, idx) / static_cast<double>(n));
  }
  return values;
}

std::vector<double> GetVariances(const DpTree& tree,
                                 std::span<const double> grid) {
  const double n2 = static_cast<double>(tree.total_count) *
                    static_cast<double>(tree.total_count);
  std::vector<double> vars;
  vars.reserve(grid.size());
  for (double x : grid) {
    const int64_t idx = GridIndexOrThrow(tree, x);
    vars.push_back(UnitPrefixVariance(tree.depth, idx) * tree.node_sigma2 / n2);
  }
  return vars;
}

namespace {

struct ThresholdKey {
  uint64_t sigma_bits;
  int64_t n;
  uint64_t alpha_bits;
  bool operator<(const ThresholdKey& o) const {
    return std::tie(sigma_bits, n, alpha_bits) <
           std::tie(o.sigma_bits, o.n, o.alpha_bits);
  }
};

uint64_t Bits(double x) {
  uint64_t b;
  std::memcpy(&b, &x, sizeof(b));
  return b;
}

// Pr(Bin(n,1/2)/n + N(0, sigma^2) > a), binomial sum restricted to a
// +-12 sigma_bin window (the truncated mass is < 1e-30).
double MixtureTail(double a, double sigma, int64_t n) {
  const double sd = std::sqrt(static_cast<double>(n)) / 2.0;
  const int64_t lo = std::max<int64_t>(0, static_cast<int64_t>(n / 2 - 12 * sd - 1));
  const int64_t hi = std::min<int64_t>(n, static_cast<int64_t>(n / 2 + 12 * sd + 1));
  double tail = 0.0;
  double pmf = std::exp(BinomHalfLogPmf(n, lo));
  for (int64_t m = lo; m <= hi; ++m) {
    tail += pmf * NormalSf((a - static_cast<double>(m) / n) / sigma);
    pmf *= static_cast<double>(n - m) / static_cast<double>(m + 1);
  }
  return tail;
}

}  // namespace

double ThresholdUpper(double sigma_x, int64_t n, double alpha) {
  if (sigma_x < 0) throw ConfigError("sigma_x must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  static std::mutex mu;
  static std::map<ThresholdKey, double> cache;
  const ThresholdKey key{Bits(sigma_x), n, Bits(alpha)};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  double result;
  if (sigma_x == 0.0) {
    // Noiseless limit: the pure binomial quantile min{m : 1 - C(m) <= alpha/2}.
    int64_t lo = 0, hi = n;
    while (lo < hi) {
      const int64_t mid = (lo + hi) / 2;
      if (1.0 - BinomHalfCdf(n, mid) <= alpha / 2.0) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    result = static_cast<double>(lo) / static_cast<double>(n);
  } else {
    // The tail is strictly decreasing in a; bisect to 1e-8.
    double lo = -1.0, hi = 2.0;
    while (hi - lo > 1e-8) {
      const double mid = (lo + hi) / 2.0;
      if (MixtureTail(mid, sigma_x, n) > alpha / 2.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    result = hi;
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = result;
  return result;
}

CdfCiResult CdfPostProcessCi(const Sample& s, double rho,
                             const CdfCiConfig& cfg, RngStream& rng,
                             BudgetLedger* ledger) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (cfg.union_bound && !(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw ConfigError("union path needs gamma in (0, 1)");
  }
  const RangeSpec& range = cfg.range;
  const Sample clipped = Clip(s, range);
  const int64_t n = clipped.size();

  DpTree tree = OptimizeTree(BuildDpTree(clipped, rho, range, rng, ledger));

  const int64_t grid_steps =
      static_cast<int64_t>(std::floor(range.Width() / range.theta + 1e-9));
  NoisyCdf cdf;
  cdf.grid.reserve(static_cast<size_t>(grid_steps) + 1);
  for (int64_t i = 0; i <= grid_steps; ++i) {
    cdf.grid.push_back(range.lower + static_cast<double>(i) * range.theta);
  }
  cdf.values = TreeToCdf(n, tree, cdf.grid);
  cdf.variances = GetVariances(tree, cdf.grid);

  double lower = range.lower;
  double upper = range.upper;
  if (cfg.union_bound) {
    const double beta1 = cfg.gamma * cfg.alpha;
    const double beta2 = (cfg.alpha - beta1) / (1.0 - beta1 / 2.0);
    const RankTargets targets = NonprivateCiRanks(n, beta1);
    std::vector<Measurement> ms;
    ms.reserve(cdf.grid.size());
    const double dn = static_cast<double>(n);
    for (size_t i = 0; i < cdf.grid.size(); ++i) {
      // Count scale: values and variances pick up n and n^2.
      ms.push_back(Measurement{cdf.grid[i], dn * cdf.values[i],
                               dn * dn * cdf.variances[i]});
    }
    const Interval interval =
        PostProcessUnion(ms, n, targets.k_low, targets.k_up, beta2,
                         range.lower, range.upper);
    return CdfCiResult{interval, std::move(cdf)};
  }

  // Tight path: test each grid point, then take the outermost accepts.
  bool any_upper = false, any_lower = false;
  for (size_t i = 0; i < cdf.grid.size(); ++i) {
    const double a_up =
        ThresholdUpper(std::sqrt(cdf.variances[i]), n, cfg.alpha);
    const double a_low = 1.0 - a_up;
    if (cdf.values[i] <= a_up) {  // "x < median" accepted
      upper = cdf.grid[i] + range.theta;
      any_upper = true;
    }
    if (cdf.values[i] >= a_low && !any_lower) {  // "x > median" accepted
      lower = cdf.grid[i] - range.theta;
      any_lower = true;
    }
  }
  if (!any_upper) upper = range.upper;
  if (!any_lower) lower = range.lower;
  if (lower > upper) std::swap(lower, upper);
  return CdfCiResult{Interval(lower, upper), std::move(cdf)};
}

void WriteNoisyCdf(const NoisyCdf& cdf, std::ostream& out) {
  out << "x,value,variance\n";
  char buf[128];
  for (size_t i = 0; i < cdf.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", cdf.grid[i],
                  cdf.values[i], cdf.variances[i]);
    out << buf;
  }
}

}  // namespace dpmedian
