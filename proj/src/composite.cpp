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

#include "dpmedian/composite.hpp"

#include <algorithm>
#include <cmath>

#include "dpmedian/errors.hpp"

namespace dpmedian {

HybridResult BinSearchCdfCi(const Sample& s, double rho,
                            const HybridConfig& cfg, RngStream& rng,
                            BudgetLedger* ledger) {
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0) ||
      !(cfg.r1 > 0.0 && cfg.r1 < 1.0)) {
    throw ConfigError("hybrid gamma and r1 must lie in (0, 1)");
  }
  const RangeSpec& range = cfg.range;
  const double theta = range.theta;

  BinSearchCiConfig phase1;
  phase1.alpha = cfg.r1 * cfg.alpha;
  phase1.range = range;
  phase1.gamma = cfg.gamma;
  phase1.lb = 0.25;
  phase1.ub = 0.75;
  BinSearchCiResult narrow =
      NoisyBinSearchCi(s, cfg.gamma * rho, phase1, rng, ledger);

  // Snap the narrowed endpoints outward onto the theta grid of the original
  // range; the phase-2 grid stays well-defined.
  double lo = range.lower +
              std::floor((narrow.interval.lower - range.lower) / theta) * theta;
  double hi = range.lower +
              std::ceil((narrow.interval.upper - range.lower) / theta) * theta;
  lo = std::max(range.lower, lo);
  hi = std::min(range.upper, hi);
  const Interval phase1_range(lo, hi);

  if (hi - lo <= theta) {
    // Degenerate narrowing: the range itself already has granularity width.
    return HybridResult{phase1_range, phase1_range, NoisyCdf{},
                        std::move(narrow.measurements)};
  }

  // Clipping to a median-containing range leaves the sample median unchanged,
  // so phase 2 is a valid CI mechanism on the narrowed range. Its budget is
  // spent regardless of whether phase 1 actually captured the median.
  CdfCiConfig phase2;
  phase2.alpha = (1.0 - cfg.r1) * cfg.alpha;
  phase2.range = RangeSpec(lo, hi, theta);
  phase2.union_bound = false;
  phase2.gamma = cfg.gamma;
  CdfCiResult inner = CdfPostProcessCi(Clip(s, lo, hi), (1.0 - cfg.gamma) * rho,
                                       phase2, rng, ledger);
  return HybridResult{inner.interval, phase1_range, std::move(inner.cdf),
                      std::move(narrow.measurements)};
}

GoodInterval WrapContinuity(const CiMechanism& mechanism,
                            const ContinuityConfig& cfg, const Sample& s,
                            RngStream& rng) {
  const Sample noised = ContinuityTransform(s, cfg, rng);
  const Interval inner = mechanism(noised, rng);
  return GoodInterval{Widen(inner, cfg), cfg.beta};
}

}  // namespace dpmedian
