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

#ifndef DPMEDIAN_ORDER_STATS_HPP_
#define DPMEDIAN_ORDER_STATS_HPP_

#include <cstdint>
#include <vector>

#include "dpmedian/random.hpp"

namespace dpmedian {

// A dataset held sorted; size n is treated as public throughout.
class Sample {
 public:
  // Takes ownership, sorts, and validates (nonempty, all finite).
  explicit Sample(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  int64_t size() const { return static_cast<int64_t>(values_.size()); }

  // k-th order statistic, 1-based: d_(1) <= ... <= d_(n).
  double OrderStat(int64_t k) const;

  double Min() const { return values_.front(); }
  double Max() const { return values_.back(); }

 private:
  std::vector<double> values_;
};

// Output range [lower, upper] with granularity theta. The range is a promised
// a-priori bracket on the population median; data get clipped to it. theta
// may be 0 only where a mechanism explicitly supports degenerate widening
// (the exponential mechanism); tree mechanisms require theta > 0.
struct RangeSpec {
  double lower;
  double upper;
  double theta;

  RangeSpec(double lower, double upper, double theta);
  double Width() const { return upper - lower; }
};

// Closed real interval, the mechanism output type.
struct Interval {
  double lower;
  double upper;

  Interval(double lower, double upper);
  double Width() const { return upper - lower; }
  double Midpoint() const { return (lower + upper) / 2.0; }
  bool Contains(double x) const { return lower <= x && x <= upper; }
};

struct RankTargets {
  int64_t k_low;  // in [1, n]
  int64_t k_up;   // in [k_low, n]
};

// Number of sample values <= x.
int64_t Rank(const Sample& s, double x);

// Projects every value into [r.lower, r.upper]; n unchanged.
Sample Clip(const Sample& s, const RangeSpec& r);
Sample Clip(const Sample& s, double lower, double upper);

// log Pr(Bin(n, 1/2) = m).
double BinomHalfLogPmf(int64_t n, int64_t m);

// Pr(Bin(n, 1/2) <= m), via log-space summation from the nearer tail so that
// n up to 1e6 neither under- nor overflows. m < 0 gives 0, m >= n gives 1.
double BinomHalfCdf(int64_t n, int64_t m);

// Rank pair of the non-private (1-alpha) order-statistic confidence interval:
// k_low = max{m >= 1 : C_Bin(m) <= alpha/2}, k_up = min{m : C_Bin(m) >= 1-alpha/2}.
// Throws InsufficientDataError when n is too small for the requested alpha.
RankTargets NonprivateCiRanks(int64_t n, double alpha);

// [d_(k_low), d_(k_up)].
Interval NonprivateCi(const Sample& s, double alpha);

// Configuration of the continuity transform that upgrades a confidence
// interval for continuous distributions into a (beta, 1-alpha)-good interval
// for arbitrary distributions: add N(0, sigma^2) to each point, then widen
// the result by a = sigma * Phi^{-1}(1 - beta).
struct ContinuityConfig {
  double sigma;
  double beta;
  double a;  // derived: sigma * Phi^{-1}(1 - beta)

  static ContinuityConfig Make(double sigma, double beta);
};

Sample ContinuityTransform(const Sample& s, const ContinuityConfig& cfg,
                           RngStream& rng);

Interval Widen(const Interval& interval, const ContinuityConfig& cfg);

}  // namespace dpmedian

#endif  // DPMEDIAN_ORDER_STATS_HPP_
