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

#include "dpmedian/ingest.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dpmedian/errors.hpp"

namespace dpmedian {
namespace {

std::string Trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::vector<std::string> SplitLine(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == delimiter) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

bool ParseDouble(const std::string& token, double* out) {
  if (token.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

}  // namespace

IngestResult IngestDelimited(const std::string& path, const std::string& column,
                             const std::string& group_by, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input file: " + path);

  const std::vector<std::string> header = SplitLine(line, delimiter);
  int col_idx = -1, group_idx = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string name = Trim(header[i]);
    if (name == column) col_idx = static_cast<int>(i);
    if (!group_by.empty() && name == group_by) group_idx = static_cast<int>(i);
  }
  if (col_idx < 0) throw DataError("column '" + column + "' not found in " + path);
  if (!group_by.empty() && group_idx < 0) {
    throw DataError("group column '" + group_by + "' not found in " + path);
  }

  IngestResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++result.rows_read;
    const std::vector<std::string> fields = SplitLine(line, delimiter);
    if (static_cast<size_t>(col_idx) >= fields.size()) {
      ++result.rows_dropped;
      continue;
    }
    double value = 0.0;
    if (!ParseDouble(Trim(fields[static_cast<size_t>(col_idx)]), &value)) {
      ++result.rows_dropped;
      continue;
    }
    std::string group;
    if (group_idx >= 0) {
      group = static_cast<size_t>(group_idx) < fields.size()
                  ? Trim(fields[static_cast<size_t>(group_idx)])
                  : "";
    }
    result.groups[group].push_back(value);
  }
  if (result.groups.empty()) {
    throw DataError("no usable numeric rows in column '" + column + "'");
  }
  return result;
}

}  // namespace dpmedian
