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

#ifndef DPMEDIAN_INGEST_HPP_
#define DPMEDIAN_INGEST_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dpmedian {

// One numeric column, optionally partitioned by a group column. Values are
// taken verbatim (no normalization or rounding); non-numeric and missing
// cells are dropped and counted. Dropping rows with missing values can bias
// estimates; the drop count is surfaced so callers can judge.
struct IngestResult {
  // Group value -> column values, in an ordered map for deterministic output.
  // A single unnamed group "" is used when no group column is given.
  std::map<std::string, std::vector<double>> groups;
  int64_t rows_read = 0;
  int64_t rows_dropped = 0;
};

// Reads a delimited text file with a header row. `column` must name a header
// field; `group_by` may be empty. Throws DataError on unreadable files,
// missing columns, or zero usable rows.
IngestResult IngestDelimited(const std::string& path, const std::string& column,
                             const std::string& group_by = "",
                             char delimiter = ',');

}  // namespace dpmedian

#endif  // DPMEDIAN_INGEST_HPP_
