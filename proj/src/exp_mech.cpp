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

#include "dpmedian/exp_mech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "dpmedian/errors.hpp"

namespace dpmedian {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void ValidateWidening(const RangeSpec& range) {
  if (!(2.0 * range.theta < range.Width())) {
    throw ConfigError("widened exponential mechanism needs 2 theta < |R|");
  }
}

void ValidateExpMechConfig(const ExpMechConfig& cfg) {
  ValidateWidening(cfg.range);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (cfg.union_bound && !(cfg.beta2 > 0.0 && cfg.beta2 < cfg.alpha)) {
    throw ConfigError("union path needs beta2 in (0, alpha)");
  }
}

}  // namespace

double WidenedExpMech(const Sample& s, double epsilon, int64_t target_rank,
                      const RangeSpec& range, RngStream& rng) {
  ValidateWidening(range);
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  const int64_t n = s.size();
  if (target_rank < 1 || target_rank > n) {
    throw ConfigError("target rank out of [1, n]");
  }
  const double rl = range.lower;
  const double ru = range.upper;
  const double theta = range.theta;

  // Clip, then widen: values at ranks <= k move left by theta, values above
  // move right, both saturating at the range ends. Clamping and shifting are
  // monotone on the two halves, so sortedness is preserved.
  std::vector<double> e(static_cast<size_t>(n) + 2);
  e[0] = rl;
  for (int64_t i = 0; i < n; ++i) {
    const double v = std::clamp(s.values()[static_cast<size_t>(i)], rl, ru);
    e[static_cast<size_t>(i) + 1] = (i < target_rank)
                                        ? std::max(rl, v - theta)
                                        : std::min(ru, v + theta);
  }
  e[static_cast<size_t>(n) + 1] = ru;

  // Gap j lies between e[j] and e[j+1]; any point in it has widened rank j,
  // so its utility is -|j - k|. Gumbel-max over log gap masses samples the
  // exponential-mechanism density exactly; zero-width gaps are unselectable.
  double best_score = kNegInf;
  int64_t best_gap = -1;
  for (int64_t j = 0; j <= n; ++j) {
    const double width = e[static_cast<size_t>(j) + 1] - e[static_cast<size_t>(j)];
    if (!(width > 0)) continue;
    // Branch on zero distance so that an infinite epsilon (noiseless
    // surrogate) never multiplies 0 * inf.
    const double penalty =
        j == target_rank
            ? 0.0
            : (epsilon / 2.0) * std::fabs(static_cast<double>(j - target_rank));
    const double score = std::log(width) - penalty + rng.Gumbel();
    if (score > best_score) {
      best_score = score;
      best_gap = j;
    }
  }
  return rng.Uniform(e[static_cast<size_t>(best_gap)],
                     e[static_cast<size_t>(best_gap) + 1]);
}

double RankErrorBound(double epsilon, double range_width, double theta,
                      double beta) {
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (!(theta > 0) || !(2.0 * theta < range_width)) {
    throw ConfigError("rank error bound needs 0 < 2 theta < |R|");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  return std::log((range_width - 2.0 * theta) / (2.0 * theta * beta)) / epsilon;
}

double FailureProb(int64_t n, int64_t k, double epsilon, double range_width,
                   double theta, IntervalSide side) {
  if (k < 1 || k > n) throw ConfigError("rank out of [1, n]");
  if (!(2.0 * theta < range_width) || !(theta > 0)) {
    throw ConfigError("failure bound needs 0 < 2 theta < |R|");
  }
  const double ratio = (range_width - 2.0 * theta) / (2.0 * theta);
  const double log_ratio = std::log(ratio);
  // dist == 0 keeps the cap term finite even at epsilon == inf.
  const auto priv_term = [&](int64_t dist) {
    if (dist == 0) return std::min(1.0, ratio);
    return std::min(1.0,
                    std::exp(log_ratio - static_cast<double>(dist) * epsilon / 2.0));
  };
  if (side == IntervalSide::kLower) {
    double p = BinomHalfCdf(n, k - 1);
    double pmf = std::exp(BinomHalfLogPmf(n, k));
    for (int64_t m = k; m <= n; ++m) {
      p += pmf * priv_term(m - k);
      if (pmf < 1e-19 && 2 * m > n) break;  // past the mode, mass gone
      pmf *= static_cast<double>(n - m) / static_cast<double>(m + 1);
    }
    return std::min(p, 1.0);
  }
  double p = 1.0 - BinomHalfCdf(n, k);
  double pmf = std::exp(BinomHalfLogPmf(n, k));
  for (int64_t m = k; m >= 0; --m) {
    p += pmf * priv_term(k - m);
    if (pmf < 1e-19 && 2 * m < n) break;
    if (m > 0) pmf *= static_cast<double>(m) / static_cast<double>(n - m + 1);
  }
  return std::min(p, 1.0);
}

namespace {

using TargetKey = std::tuple<int64_t, double, double, double, double, bool, double>;

ExpMechTargets ComputeTargetsUncached(int64_t n, double epsilon,
                                      const ExpMechConfig& cfg) {
  const double width = cfg.range.Width();
  const double theta = cfg.range.theta;
  const int64_t center = (n + 1) / 2;  // ceil(n/2)

  if (cfg.union_bound) {
    const double beta1 = (cfg.alpha - cfg.beta2) / (1.0 - cfg.beta2 / 2.0);
    const RankTargets base = NonprivateCiRanks(n, beta1);
    // Each endpoint runs at epsilon/2 and must be (t, theta, beta2/2)-good.
    const double t = RankErrorBound(epsilon / 2.0, width, theta, cfg.beta2 / 2.0);
    const int64_t k_low = static_cast<int64_t>(std::floor(base.k_low - t));
    const int64_t k_up = static_cast<int64_t>(std::ceil(base.k_up + t));
    if (k_low < 1 || k_up > n) {
      throw NoValidTargetError(
          "union-path rank targets fall outside [1, n]; budget too small for "
          "the requested coverage");
    }
    return ExpMechTargets{k_low, k_up, t};
  }

  // Tight path. FailureProb grows as the target moves toward n/2, so the
  // first hit scanning away from the center is the closest valid rank.
  int64_t k_low = -1;
  for (int64_t k = center; k >= 1; --k) {
    if (FailureProb(n, k, epsilon, width, theta, IntervalSide::kLower) <=
        cfg.alpha / 2.0) {
      k_low = k;
      break;
    }
  }
  int64_t k_up = -1;
  for (int64_t k = center; k <= n; ++k) {
    if (FailureProb(n, k, epsilon, width, theta, IntervalSide::kUpper) <=
        cfg.alpha / 2.0) {
      k_up = k;
      break;
    }
  }
  if (k_low < 0 || k_up < 0) {
    throw NoValidTargetError(
        "no rank satisfies the per-side failure bound; budget too small for "
        "the requested coverage");
  }
  return ExpMechTargets{k_low, k_up, 0.0};
}

}  // namespace

ExpMechTargets ComputeTargets(int64_t n, double epsilon,
                              const ExpMechConfig& cfg) {
  ValidateExpMechConfig(cfg);
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  static std::mutex mu;
  static std::map<TargetKey, ExpMechTargets> cache;
  const TargetKey key{n, epsilon, cfg.alpha, cfg.range.Width(),
                      cfg.range.theta, cfg.union_bound, cfg.beta2};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const ExpMechTargets targets = ComputeTargetsUncached(n, epsilon, cfg);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, targets);
  return targets;
}

Interval ExpMechCi(const Sample& s, const Budget& budget,
                   const ExpMechConfig& cfg, RngStream& rng,
                   BudgetLedger* ledger) {
  ValidateExpMechConfig(cfg);
  const double epsilon = budget.EpsilonEquivalent();
  if (!(epsilon > 0)) throw ConfigError("budget must be positive");
  const ExpMechTargets targets = ComputeTargets(s.size(), epsilon, cfg);

  const double lower_draw =
      WidenedExpMech(s, epsilon / 2.0, targets.k_low, cfg.range, rng);
  const double upper_draw =
      WidenedExpMech(s, epsilon / 2.0, targets.k_up, cfg.range, rng);
  if (ledger != nullptr) {
    ledger->Charge("exp_mech.lower", Budget::PureDP(epsilon / 2.0));
    ledger->Charge("exp_mech.upper", Budget::PureDP(epsilon / 2.0));
  }
  const double lower = lower_draw - cfg.range.theta;
  const double upper = upper_draw + cfg.range.theta;
  if (lower > upper) {
    // Inverted draws (possible at tiny epsilon): each one-sided bound still
    // holds marginally, so return the ordered pair of the raw draws.
    return Interval(std::min(lower_draw, upper_draw),
                    std::max(lower_draw, upper_draw));
  }
  return Interval(lower, upper);
}

double ExpMechPoint(const Sample& s, const Budget& budget,
                    const RangeSpec& range, RngStream& rng,
                    BudgetLedger* ledger) {
  const double epsilon = budget.EpsilonEquivalent();
  if (!(epsilon > 0)) throw ConfigError("budget must be positive");
  const int64_t k = (s.size() + 1) / 2;
  const double out = WidenedExpMech(s, epsilon, k, range, rng);
  if (ledger != nullptr) {
    ledger->Charge("exp_mech.point", Budget::PureDP(epsilon));
  }
  return out;
}

}  // namespace dpmedian
