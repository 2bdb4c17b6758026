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

#include "dpmedian/order_stats.hpp"

#include <algorithm>
#include <cmath>

#include "dpmedian/errors.hpp"
#include "dpmedian/mathutil.hpp"

namespace dpmedian {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("sample must be nonempty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ConfigError("sample values must be finite");
  }
  std::sort(values_.begin(), values_.end());
}

double Sample::OrderStat(int64_t k) const {
  if (k < 1 || k > size()) throw ConfigError("order statistic index out of range");
  return values_[static_cast<size_t>(k - 1)];
}

RangeSpec::RangeSpec(double lower, double upper, double theta)
    : lower(lower), upper(upper), theta(theta) {
  if (!(lower < upper)) throw ConfigError("range needs lower < upper");
  if (!(theta >= 0)) throw ConfigError("granularity theta must be >= 0");
  if (theta > upper - lower) throw ConfigError("theta must not exceed the range width");
  if (!std::isfinite(lower) || !std::isfinite(upper)) {
    throw ConfigError("range endpoints must be finite");
  }
}

Interval::Interval(double lower, double upper) : lower(lower), upper(upper) {
  if (!(lower <= upper)) throw ConfigError("interval needs lower <= upper");
}

int64_t Rank(const Sample& s, double x) {
  const auto& v = s.values();
  return std::upper_bound(v.begin(), v.end(), x) - v.begin();
}

Sample Clip(const Sample& s, double lower, double upper) {
  std::vector<double> out;
  out.reserve(s.values().size());
  for (double v : s.values()) out.push_back(std::clamp(v, lower, upper));
  return Sample(std::move(out));
}

Sample Clip(const Sample& s, const RangeSpec& r) {
  return Clip(s, r.lower, r.upper);
}

double BinomHalfLogPmf(int64_t n, int64_t m) {
  if (m < 0 || m > n) return -std::numeric_limits<double>::infinity();
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return std::lgamma(dn + 1) - std::lgamma(dm + 1) - std::lgamma(dn - dm + 1) -
         dn * std::log(2.0);
}

double BinomHalfCdf(int64_t n, int64_t m) {
  if (n < 1) throw ConfigError("binomial n must be positive");
  if (m < 0) return 0.0;
  if (m >= n) return 1.0;
  if (m > (n - 1) / 2) {
    // Sum the shorter upper tail instead: C(m) = 1 - C(n - 1 - m).
    return 1.0 - BinomHalfCdf(n, n - 1 - m);
  }
  // Terms pmf(j), j = m down to 0, shrink monotonically (m below the mode),
  // so accumulate ratios against the largest term pmf(m).
  double ratio_sum = 1.0;  // pmf(m)/pmf(m)
  double ratio = 1.0;
  for (int64_t j = m; j >= 1; --j) {
    // pmf(j-1)/pmf(j) = j / (n - j + 1)
    ratio *= static_cast<double>(j) / static_cast<double>(n - j + 1);
    ratio_sum += ratio;
    if (ratio < 1e-18 * ratio_sum) break;
  }
  return std::exp(BinomHalfLogPmf(n, m) + std::log(ratio_sum));
}

RankTargets NonprivateCiRanks(int64_t n, double alpha) {
  if (n < 1) throw ConfigError("n must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const double half = alpha / 2.0;
  if (BinomHalfCdf(n, 1) > half) {
    throw InsufficientDataError(
        "n too small for the requested confidence level (no rank m >= 1 with "
        "C_Bin(m) <= alpha/2)");
  }
  // C_Bin is strictly increasing on [0, n]; binary search both boundaries.
  int64_t lo = 1, hi = n;  // max{m : C(m) <= alpha/2}
  while (lo < hi) {
    const int64_t mid = (lo + hi + 1) / 2;
    if (BinomHalfCdf(n, mid) <= half) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const int64_t k_low = lo;
  int64_t a = 0, b = n;  // min{m : C(m) >= 1 - alpha/2}
  while (a < b) {
    const int64_t mid = (a + b) / 2;
    if (BinomHalfCdf(n, mid) >= 1.0 - half) {
      b = mid;
    } else {
      a = mid + 1;
    }
  }
  const int64_t k_up = a;
  if (k_up > n || k_low > k_up) {
    throw InsufficientDataError("n too small for the requested confidence level");
  }
  return RankTargets{k_low, k_up};
}

Interval NonprivateCi(const Sample& s, double alpha) {
  const RankTargets t = NonprivateCiRanks(s.size(), alpha);
  return Interval(s.OrderStat(t.k_low), s.OrderStat(t.k_up));
}

ContinuityConfig ContinuityConfig::Make(double sigma, double beta) {
  if (!(sigma > 0)) throw ConfigError("continuity sigma must be positive");
  if (!(beta > 0.0 && beta <= 0.5)) throw ConfigError("continuity beta must lie in (0, 1/2]");
  return ContinuityConfig{sigma, beta, sigma * NormalQuantile(1.0 - beta)};
}

Sample ContinuityTransform(const Sample& s, const ContinuityConfig& cfg,
                           RngStream& rng) {
  std::vector<double> noisy;
  noisy.reserve(s.values().size());
  for (double v : s.values()) noisy.push_back(v + rng.Gaussian(0.0, cfg.sigma));
  return Sample(std::move(noisy));
}

Interval Widen(const Interval& interval, const ContinuityConfig& cfg) {
  return Interval(interval.lower - cfg.a, interval.upper + cfg.a);
}

}  // namespace dpmedian
