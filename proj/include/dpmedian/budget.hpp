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

#ifndef DPMEDIAN_BUDGET_HPP_
#define DPMEDIAN_BUDGET_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dpmedian {

enum class BudgetKind { kPureDP, kZCDP };

std::string ToString(BudgetKind kind);

// An immutable privacy budget: epsilon for pure DP, rho for zero-concentrated
// DP. Both compose additively within their own kind.
class Budget {
 public:
  static Budget PureDP(double epsilon);
  static Budget ZCDP(double rho);

  BudgetKind kind() const { return kind_; }
  double value() const { return value_; }

  // The pure-DP epsilon that spends this budget when running a pure-DP
  // mechanism: epsilon itself, or sqrt(2 rho) for a zCDP budget (an
  // epsilon-DP mechanism is epsilon^2/2-CDP).
  double EpsilonEquivalent() const;

  // The zCDP rho this budget accounts for. Rejects pure-DP budgets: a
  // Gaussian-noise mechanism cannot be driven by a pure-DP budget.
  double RhoOrThrow() const;

  bool operator==(const Budget& other) const = default;

 private:
  Budget(BudgetKind kind, double value) : kind_(kind), value_(value) {}
  BudgetKind kind_;
  double value_;
};

// epsilon-DP implies (epsilon^2/2)-CDP.
double PureDpToZcdp(double epsilon);

// rho-CDP implies (rho + 2 sqrt(rho ln(1/delta)), delta)-DP.
double ZcdpToApproxDp(double rho, double delta);

// Additive composition; all parts must share one kind.
Budget Compose(std::span<const Budget> parts);

// Splits a budget along positive fractions summing to 1 (within 1e-12).
// The last part absorbs rounding residue so that Compose(Split(b, f)) == b
// bit-exactly.
std::vector<Budget> Split(const Budget& total, std::span<const double> fractions);

// Standard deviation of Gaussian noise that makes a sensitivity-`sensitivity`
// query rho-CDP: sigma^2 = sensitivity^2 / (2 rho).
double GaussianNoiseScale(double rho, double sensitivity);

// Append-only record of privacy charges made by mechanisms during one run.
class BudgetLedger {
 public:
  struct Entry {
    std::string label;
    Budget spent;
  };

  void Charge(std::string label, const Budget& spent);

  const std::vector<Entry>& entries() const { return entries_; }

  // Composition of all entries; requires a uniform kind.
  Budget Total() const;

  // zCDP-equivalent total: zCDP entries compose additively; pure-DP entries
  // are composed first (to one epsilon) and converted once, matching
  // mechanism-level accounting of a pure-DP mechanism inside a zCDP pipeline.
  double TotalZcdpEquivalent() const;

  void Clear() { entries_.clear(); }

 private:
  std::vector<Entry> entries_;
};

}  // namespace dpmedian

#endif  // DPMEDIAN_BUDGET_HPP_
