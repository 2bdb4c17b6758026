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

#ifndef DPMEDIAN_ERRORS_HPP_
#define DPMEDIAN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpmedian {

// Invalid configuration or hyperparameters (caller bug).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// The dataset is too small for the requested confidence level: no valid
// order-statistic rank pair exists.
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : std::runtime_error(what) {}
};

// No target rank satisfies the per-side failure bound (privacy budget too
// small for the requested coverage).
class NoValidTargetError : public std::runtime_error {
 public:
  explicit NoValidTargetError(const std::string& what)
      : std::runtime_error(what) {}
};

// The non-private baseline interval has zero width, so a width ratio is
// undefined.
class DegenerateBaselineError : public std::runtime_error {
 public:
  explicit DegenerateBaselineError(const std::string& what)
      : std::runtime_error(what) {}
};

// Unreadable or unusable input data (file level, not statistics level).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dpmedian

#endif  // DPMEDIAN_ERRORS_HPP_
