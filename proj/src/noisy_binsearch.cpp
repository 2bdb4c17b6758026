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

#include "dpmedian/noisy_binsearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "dpmedian/errors.hpp"
#include "dpmedian/mathutil.hpp"

namespace dpmedian {

SearchConfig MakeSearchConfig(const BinSearchCiConfig& cfg, double rho,
                              int64_t n) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw ConfigError("gamma must lie in (0, 1)");
  }
  if (!(cfg.lb > 0.0 && cfg.lb < 1.0) || !(cfg.ub > 0.0 && cfg.ub < 1.0) ||
      cfg.lb > cfg.ub) {
    throw ConfigError("LB and UB must lie in (0, 1) with LB <= UB");
  }
  if (!(rho > 0)) {
    throw ConfigError("rho must be positive");
  }
  if (!(cfg.range.theta > 0)) {
    throw ConfigError("noisy binary search needs a positive granularity");
  }
  SearchConfig sc;
  sc.beta1 = cfg.gamma * cfg.alpha;
  sc.beta2 = (cfg.alpha - sc.beta1) / (1.0 - sc.beta1 / 2.0);
  sc.steps = std::max(1.0, std::log2(cfg.range.Width() / cfg.range.theta));
  sc.rho_step = rho / (2.0 * sc.steps);
  sc.beta_step = sc.beta2 / (2.0 * sc.steps);
  sc.t_step = std::sqrt(std::log(1.0 / sc.beta_step) /
                        (sc.rho_step * static_cast<double>(n)));
  const RankTargets targets = NonprivateCiRanks(n, sc.beta1);
  sc.k_low = targets.k_low;
  sc.k_up = targets.k_up;
  // At very low budgets t_step can push the targets outside (0, 1); the
  // search target is only a homing heuristic (validity comes from
  // PostProcessUnion), so clamp instead of failing.
  const double dn = static_cast<double>(n);
  sc.q_low = std::clamp(std::min(cfg.lb, sc.k_low / dn - sc.t_step), 1e-9, 1.0 - 1e-9);
  sc.q_up = std::clamp(std::max(cfg.ub, sc.k_up / dn + sc.t_step), 1e-9, 1.0 - 1e-9);
  return sc;
}

double GetNoisyCounts(const Sample& clipped, double rho_budget, double q_target,
                      const SearchConfig& cfg, const RangeSpec& range,
                      std::vector<Measurement>& measurements, RngStream& rng) {
  const int64_t n = clipped.size();
  const double rho_init = cfg.rho_step / 10.0;
  const double beta_init = cfg.beta_step / 10.0;
  const double draw_var = 1.0 / (2.0 * rho_init);
  const double draw_sigma = std::sqrt(draw_var);

  std::map<double, Measurement> known;
  for (const Measurement& m : measurements) known.emplace(m.x, m);

  double lower = range.lower;
  double upper = range.upper;
  double rho_used = 0.0;
  // Bisection below the granularity is useless; stop early and leave the
  // remaining budget unspent.
  while (rho_used + rho_init <= rho_budget && upper - lower > range.theta) {
    const double x = (lower + upper) / 2.0;
    double avg = 0.0;
    double rho_t = 0.0;
    auto it = known.find(x);
    if (it != known.end()) {
      avg = it->second.noisy_rank;  // cache hit: spends nothing
    } else {
      const double rank = static_cast<double>(Rank(clipped, x));
      double beta_t = 0.0;
      double sum = 0.0;
      int64_t draws = 0;
      bool separated = false;
      double avg_var = draw_var;
      while (!separated && rho_t + rho_init <= cfg.rho_step &&
             rho_used + rho_t + rho_init <= rho_budget) {
        ++draws;
        rho_t += rho_init;
        beta_t += beta_init;
        sum += rng.Gaussian(rank, draw_sigma);
        avg = sum / static_cast<double>(draws);
        avg_var = draw_var / static_cast<double>(draws);
        const double radius =
            std::sqrt(avg_var) * NormalQuantile(1.0 - beta_t);
        const double low_target = cfg.q_low * static_cast<double>(n);
        const double up_target = cfg.q_up * static_cast<double>(n);
        separated = (avg - radius > up_target || avg + radius < up_target) &&
                    (avg - radius > low_target || avg + radius < low_target);
      }
      const Measurement m{x, avg, avg_var};
      known.emplace(x, m);
      measurements.push_back(m);
    }
    // Tie at the midpoint moves right.
    if (avg < static_cast<double>(n) * q_target) {
      lower = x;
    } else {
      upper = x;
    }
    rho_used += rho_t;
  }
  return rho_used;
}

Interval PostProcessUnion(std::span<const Measurement> measurements, int64_t n,
                          int64_t k_low_target, int64_t k_up_target,
                          double beta2, double default_lo, double default_hi) {
  if (measurements.empty()) throw ConfigError("no measurements to post-process");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in (0, 1)");
  (void)n;
  const double t_count = static_cast<double>(measurements.size());
  // Per-measurement confidence radius from a beta2/(2T) union allocation:
  // with probability 1 - beta2/2 no measurement deviates upward by more than
  // R_t, and likewise downward, which is exactly what each one-sided endpoint
  // argument consumes.
  const double quantile = NormalQuantile(1.0 - beta2 / (2.0 * t_count));
  double lower = default_lo;
  double upper = default_hi;
  bool has_lower = false, has_upper = false;
  for (const Measurement& m : measurements) {
    const double radius = std::sqrt(m.variance) * quantile;
    if (m.noisy_rank + radius < static_cast<double>(k_low_target)) {
      if (!has_lower || m.x > lower) lower = m.x;
      has_lower = true;
    }
    if (m.noisy_rank - radius > static_cast<double>(k_up_target)) {
      if (!has_upper || m.x < upper) upper = m.x;
      has_upper = true;
    }
  }
  if (lower > upper) std::swap(lower, upper);
  return Interval(lower, upper);
}

BinSearchCiResult NoisyBinSearchCi(const Sample& s, double rho,
                                   const BinSearchCiConfig& cfg, RngStream& rng,
                                   BudgetLedger* ledger) {
  const Sample clipped = Clip(s, cfg.range);
  const int64_t n = clipped.size();
  const SearchConfig sc = MakeSearchConfig(cfg, rho, n);

  BinSearchCiResult result{Interval(cfg.range.lower, cfg.range.upper), {}, 0.0};
  // The upper search sees the lower search's measurements, so shared
  // bisection prefixes are free.
  result.spent_rho += GetNoisyCounts(clipped, rho / 2.0, sc.q_low, sc, cfg.range,
                                     result.measurements, rng);
  result.spent_rho += GetNoisyCounts(clipped, rho / 2.0, sc.q_up, sc, cfg.range,
                                     result.measurements, rng);
  result.interval = PostProcessUnion(result.measurements, n, sc.k_low, sc.k_up,
                                     sc.beta2, cfg.range.lower, cfg.range.upper);
  // The ledger records the allocation (the guarantee the mechanism promises);
  // the adaptive search may consume less, reported via spent_rho.
  if (ledger != nullptr) {
    ledger->Charge("noisy_binsearch.lower", Budget::ZCDP(rho / 2.0));
    ledger->Charge("noisy_binsearch.upper", Budget::ZCDP(rho / 2.0));
  }
  return result;
}

void WriteMeasurements(std::span<const Measurement> measurements,
                       std::ostream& out) {
  out << "x,noisy_rank,variance\n";
  char buf[128];
  for (const Measurement& m : measurements) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", m.x, m.noisy_rank,
                  m.variance);
    out << buf;
  }
}

}  // namespace dpmedian
