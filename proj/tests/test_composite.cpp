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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpmedian/composite.hpp"
#include "dpmedian/errors.hpp"
#include "dpmedian/order_stats.hpp"
#include "dpmedian/random.hpp"

using namespace dpmedian;

TEST_CASE("hybrid budget ledger sums to rho exactly") {
  RngStream rng(111);
  std::vector<double> vals;
  for (int i = 0; i < 500; ++i) vals.push_back(std::exp(rng.Gaussian(0.405465, 1.0)));
  const Sample s(vals);
  const HybridConfig cfg{0.05, RangeSpec(-5.0, 15.0, 0.5), 0.25, 0.25};
  const double rho = 0.8;
  BudgetLedger ledger;
  const HybridResult res = BinSearchCdfCi(s, rho, cfg, rng, &ledger);
  // Phase-1 allocation (gamma rho, as two rho/2 entries) plus the phase-2
  // tree budget ((1-gamma) rho) compose to exactly rho.
  CHECK(ledger.TotalZcdpEquivalent() == doctest::Approx(rho).epsilon(1e-12));
  CHECK(res.interval.lower <= res.interval.upper);
  CHECK(res.phase1_range.lower >= cfg.range.lower - 1e-12);
  CHECK(res.phase1_range.upper <= cfg.range.upper + 1e-12);
}

TEST_CASE("hybrid phase-1 range stays on the theta grid") {
  RngStream rng(113);
  std::vector<double> vals;
  for (int i = 0; i < 400; ++i) vals.push_back(std::exp(rng.Gaussian(0.405465, 1.0)));
  const Sample s(vals);
  const double theta = 0.1;
  const HybridConfig cfg{0.05, RangeSpec(-5.0, 50.0, theta), 0.25, 0.25};
  for (int i = 0; i < 10; ++i) {
    const HybridResult res = BinSearchCdfCi(s, 0.8, cfg, rng);
    const double lo_steps = (res.phase1_range.lower - cfg.range.lower) / theta;
    const double hi_steps = (res.phase1_range.upper - cfg.range.lower) / theta;
    CHECK(std::fabs(lo_steps - std::round(lo_steps)) < 1e-6);
    CHECK(std::fabs(hi_steps - std::round(hi_steps)) < 1e-6);
    // Narrowing really happened at this configuration.
    CHECK(res.phase1_range.upper - res.phase1_range.lower <
          cfg.range.Width());
  }
}

TEST_CASE("clipping to a median-containing range preserves the sample median") {
  RngStream rng(117);
  std::vector<double> vals;
  for (int i = 0; i < 501; ++i) vals.push_back(rng.Gaussian(3.0, 2.0));
  const Sample s(vals);
  const double sample_median = s.OrderStat(251);
  const Sample clipped = Clip(s, 1.0, 5.0);  // contains the median
  CHECK(clipped.OrderStat(251) == sample_median);
}

TEST_CASE("hybrid coverage at the paper's configuration") {
  // 0.8-CDP, R = [-5, 50], theta = 0.1, n = 500, lognormal(ln 1.5, 1).
  RngStream rng(119);
  const HybridConfig cfg{0.05, RangeSpec(-5.0, 50.0, 0.1), 0.25, 0.25};
  int covered = 0;
  const int kRuns = 300;
  for (int run = 0; run < kRuns; ++run) {
    std::vector<double> vals;
    for (int i = 0; i < 500; ++i) vals.push_back(std::exp(rng.Gaussian(0.405465, 1.0)));
    const HybridResult res = BinSearchCdfCi(Sample(std::move(vals)), 0.8, cfg, rng);
    covered += res.interval.Contains(1.5) ? 1 : 0;
  }
  const double se = std::sqrt(0.05 * 0.95 / kRuns);
  CHECK(covered >= (0.95 - 3 * se) * kRuns);
}

TEST_CASE("continuity wrapper noises, runs, widens") {
  RngStream rng(121);
  std::vector<double> vals(101, 5.0);  // a point mass
  const Sample s(vals);
  const ContinuityConfig cfg = ContinuityConfig::Make(0.1, 0.05);
  const CiMechanism nonprivate = [](const Sample& sample, RngStream&) {
    return NonprivateCi(sample, 0.1);
  };
  const GoodInterval out = WrapContinuity(nonprivate, cfg, s, rng);
  CHECK(out.beta == 0.05);
  // The inner interval sits within a few noise sigmas of the point mass and
  // gets widened by a on both sides.
  CHECK(out.interval.lower < 5.0);
  CHECK(out.interval.upper > 5.0);
  CHECK(out.interval.Width() >= 2 * cfg.a);

  // sigma -> 0 limit: the wrapper converges to the inner mechanism.
  const ContinuityConfig tiny = ContinuityConfig::Make(1e-14, 0.05);
  std::vector<double> spread;
  for (int i = 0; i < 101; ++i) spread.push_back((double)i);
  const Sample sp(spread);
  const Interval inner = NonprivateCi(sp, 0.1);
  const GoodInterval wrapped = WrapContinuity(nonprivate, tiny, sp, rng);
  CHECK(wrapped.interval.lower == doctest::Approx(inner.lower).epsilon(1e-9));
  CHECK(wrapped.interval.upper == doctest::Approx(inner.upper).epsilon(1e-9));
}
