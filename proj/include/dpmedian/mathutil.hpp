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

#ifndef DPMEDIAN_MATHUTIL_HPP_
#define DPMEDIAN_MATHUTIL_HPP_

namespace dpmedian {

// Standard normal CDF.
double NormalCdf(double x);

// Upper tail Q(x) = 1 - Phi(x), accurate for large x.
double NormalSf(double x);

// Standard normal quantile Phi^{-1}(p), p in (0, 1).
double NormalQuantile(double p);

}  // namespace dpmedian

#endif  // DPMEDIAN_MATHUTIL_HPP_
