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

#ifndef DPMEDIAN_COMPOSITE_HPP_
#define DPMEDIAN_COMPOSITE_HPP_

#include <functional>

#include "dpmedian/budget.hpp"
#include "dpmedian/cdf_tree.hpp"
#include "dpmedian/noisy_binsearch.hpp"
#include "dpmedian/order_stats.hpp"
#include "dpmedian/random.hpp"

namespace dpmedian {

struct HybridConfig {
  double alpha = 0.05;
  RangeSpec range{0.0, 1.0, 0.0};
  double gamma = 0.25;  // budget share of the range-finding phase
  double r1 = 0.25;     // coverage share of the range-finding phase
};

struct HybridResult {
  Interval interval;
  Interval phase1_range;                  // after outward grid snapping
  NoisyCdf cdf;                           // phase-2 side information
  std::vector<Measurement> measurements;  // phase-1 side information
};

// The BinSearch+CDF mechanism: phase 1 narrows the range with
// NoisyBinSearch(gamma rho, r1 alpha, LB=0.25, UB=0.75); the data are clipped
// to the (outward theta-snapped) narrowed range and phase 2 runs
// CDFPostProcess there with (1-gamma) rho and (1-r1) alpha. A phase-1 range
// no wider than theta short-circuits to that range. Total spend is exactly
// rho; coverage follows from the union of the phase failure probabilities.
HybridResult BinSearchCdfCi(const Sample& s, double rho,
                            const HybridConfig& cfg, RngStream& rng,
                            BudgetLedger* ledger = nullptr);

// A confidence-interval mechanism as consumed by the continuity wrapper.
using CiMechanism = std::function<Interval(const Sample&, RngStream&)>;

// An interval with the weakened guarantee metadata: with probability 1-alpha
// it contains a point whose population CDF lies in [1/2-beta, 1/2+beta].
struct GoodInterval {
  Interval interval;
  double beta;
};

// Wraps a mechanism that is valid for continuous distributions into one that
// is (beta, 1-alpha)-good for arbitrary distributions: perturb every sample
// point by N(0, sigma^2), run the inner mechanism, widen the result by
// a = sigma * Phi^{-1}(1-beta).
GoodInterval WrapContinuity(const CiMechanism& mechanism,
                            const ContinuityConfig& cfg, const Sample& s,
                            RngStream& rng);

}  // namespace dpmedian

#endif  // DPMEDIAN_COMPOSITE_HPP_
