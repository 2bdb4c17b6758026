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

#include "dpmedian/mathutil.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "dpmedian/errors.hpp"

namespace dpmedian {

double NormalCdf(double x) { return std::erfc(-x / std::sqrt(2.0)) / 2.0; }

double NormalSf(double x) { return std::erfc(x / std::sqrt(2.0)) / 2.0; }

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("normal quantile needs p in (0, 1)");
  }
  static const boost::math::normal_distribution<double> kStdNormal;
  return boost::math::quantile(kStdNormal, p);
}

}  // namespace dpmedian
