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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dpmedian/cli_commands.hpp"
#include "dpmedian/errors.hpp"
#include "dpmedian/ingest.hpp"

using namespace dpmedian;

namespace {

class TempFile {
 public:
  TempFile(const std::string& name, const std::string& content)
      : path_("/tmp/dpmedian_test_" + name) {
    std::ofstream out(path_);
    out << content;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

TEST_CASE("ingest splits groups and drops bad cells") {
  const TempFile file("ingest.csv",
                      "id,income,senior\n"
                      "1,100.5,no\n"
                      "2,,no\n"
                      "3,abc,yes\n"
                      "4,250,yes\n"
                      "5,300,no\n");
  const IngestResult r = IngestDelimited(file.path(), "income", "senior");
  CHECK(r.rows_read == 5);
  CHECK(r.rows_dropped == 2);  // blank and non-numeric
  REQUIRE(r.groups.count("yes") == 1);
  REQUIRE(r.groups.count("no") == 1);
  CHECK(r.groups.at("yes") == std::vector<double>{250.0});
  CHECK(r.groups.at("no") == std::vector<double>{100.5, 300.0});
  // Sizes sum to the usable rows.
  CHECK(r.groups.at("yes").size() + r.groups.at("no").size() ==
        static_cast<size_t>(r.rows_read - r.rows_dropped));

  // Values arrive verbatim: a topcoded 5001 stays 5001.
  const TempFile top("top.csv", "v\n5001\n5001\n120\n");
  const IngestResult t = IngestDelimited(top.path(), "v");
  CHECK(t.groups.at("")[0] == 5001.0);

  CHECK_THROWS_AS(IngestDelimited(file.path(), "nope"), DataError);
  CHECK_THROWS_AS(IngestDelimited("/nonexistent/file.csv", "v"), DataError);
  const TempFile empty("empty.csv", "v\nx\ny\n");
  CHECK_THROWS_AS(IngestDelimited(empty.path(), "v"), DataError);
}

TEST_CASE("ci command: equal split, determinism, truncation") {
  // Two groups of synthetic incomes around distinct medians.
  std::ostringstream data;
  data << "income,senior\n";
  unsigned state = 12345;
  auto next = [&] {
    state = state * 1103515245 + 12345;
    return (state >> 16) % 1000;
  };
  for (int i = 0; i < 400; ++i) data << (200 + next() % 400) << ",no\n";
  for (int i = 0; i < 300; ++i) data << (next() % 120) << ",yes\n";
  const TempFile file("ci.csv", data.str());

  CiCommandConfig cfg;
  cfg.input_path = file.path();
  cfg.column = "income";
  cfg.group_by = "senior";
  cfg.mechanism = MechanismId::kExpMech;
  cfg.hp.alpha = 0.1;
  cfg.hp.range = RangeSpec(0.0, 5001.0, 5.0);
  cfg.total_budget = Budget::ZCDP(0.5);
  cfg.seed = 42;

  std::ostringstream out1, out2;
  RunCiCommand(cfg, out1);
  RunCiCommand(cfg, out2);
  CHECK(out1.str() == out2.str());  // byte-identical under a fixed seed
  // Header plus one row per group.
  CHECK(out1.str().find("group,n,") != std::string::npos);
  CHECK(out1.str().find("\nno,400,zcdp,0.25,") != std::string::npos);
  CHECK(out1.str().find("\nyes,300,zcdp,0.25,") != std::string::npos);

  // Reported spend equals the configured per-group budget.
  std::istringstream lines(out1.str());
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string group, n, kind, budget, spend;
    std::getline(fields, group, ',');
    std::getline(fields, n, ',');
    std::getline(fields, kind, ',');
    std::getline(fields, budget, ',');
    std::getline(fields, spend, ',');
    CHECK(std::stod(spend) == doctest::Approx(std::stod(budget)).epsilon(1e-12));
  }
}

TEST_CASE("ci command with explicit split fractions") {
  const TempFile file("split.csv", "v,g\n1\n");
  // Build a two-group file inline instead.
  std::ostringstream data;
  data << "v,g\n";
  for (int i = 0; i < 50; ++i) data << (i % 10) << ",a\n";
  for (int i = 0; i < 50; ++i) data << (i % 10) << ",b\n";
  const TempFile file2("split2.csv", data.str());

  CiCommandConfig cfg;
  cfg.input_path = file2.path();
  cfg.column = "v";
  cfg.group_by = "g";
  cfg.mechanism = MechanismId::kExpMech;
  cfg.hp.alpha = 0.2;
  cfg.hp.range = RangeSpec(0.0, 10.0, 0.1);
  cfg.total_budget = Budget::ZCDP(0.8);
  cfg.split_fractions = {0.25, 0.75};
  cfg.seed = 1;
  std::ostringstream out;
  RunCiCommand(cfg, out);
  CHECK(out.str().find("\na,50,zcdp,0.2,") != std::string::npos);
  CHECK(out.str().find("\nb,50,zcdp,0.6,") != std::string::npos);

  cfg.split_fractions = {0.5, 0.25, 0.25};  // wrong count
  std::ostringstream err;
  CHECK_THROWS_AS(RunCiCommand(cfg, err), ConfigError);
}

TEST_CASE("ci config file requires explicit hyperparameters") {
  const TempFile data("cfgdata.csv", "v\n1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n");
  const TempFile good("good.json", std::string(R"({
    "input": ")") + data.path() + R"(",
    "column": "v",
    "mechanism": "expmech",
    "alpha": 0.5,
    "rho": 0.5,
    "range_lower": 0.0,
    "range_upper": 11.0,
    "granularity": 0.5,
    "seed": 7
  })");
  const CiCommandConfig cfg = LoadCiConfig(good.path());
  CHECK(cfg.column == "v");
  CHECK(cfg.hp.alpha == 0.5);
  CHECK(cfg.total_budget.kind() == BudgetKind::kZCDP);
  std::ostringstream out;
  RunCiCommand(cfg, out);

  const TempFile missing("missing.json", std::string(R"({
    "input": ")") + data.path() + R"(",
    "column": "v",
    "rho": 0.5,
    "range_lower": 0.0,
    "range_upper": 11.0,
    "granularity": 0.5
  })");  // no alpha
  CHECK_THROWS_AS(LoadCiConfig(missing.path()), ConfigError);

  const TempFile both("both.json", std::string(R"({
    "input": ")") + data.path() + R"(",
    "column": "v",
    "alpha": 0.5,
    "rho": 0.5,
    "epsilon": 1.0,
    "range_lower": 0.0,
    "range_upper": 11.0,
    "granularity": 0.5
  })");  // rho and epsilon together
  CHECK_THROWS_AS(LoadCiConfig(both.path()), ConfigError);
}

TEST_CASE("simulate command emits one row per grid cell") {
  SimulateCommandConfig cfg;
  cfg.dist = LognormalDist{0.405465108108164, 1.0};
  cfg.n = 150;
  cfg.num_datasets = 4;
  cfg.trials_per_dataset = 2;
  cfg.mechanisms = {MechanismId::kExpMech, MechanismId::kNonprivate};
  cfg.budget_values = {0.5, 1.0};
  cfg.hp.alpha = 0.1;
  cfg.hp.range = RangeSpec(-5.0, 15.0, 0.05);
  cfg.seed = 5;
  cfg.threads = 2;
  std::ostringstream out;
  RunSimulateCommand(cfg, out);
  const std::string s = out.str();
  int rows = 0;
  for (char c : s) rows += c == '\n' ? 1 : 0;
  CHECK(rows == 1 + 4);  // header + 2 mechanisms x 2 budgets

  cfg.mechanisms.clear();  // empty grid is a config error, nothing written
  std::ostringstream out2;
  CHECK_THROWS_AS(RunSimulateCommand(cfg, out2), ConfigError);
  CHECK(out2.str().empty());
}
