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

#include "dpmedian/budget.hpp"

#include <cmath>
#include <utility>

#include "dpmedian/errors.hpp"

namespace dpmedian {

std::string ToString(BudgetKind kind) {
  return kind == BudgetKind::kPureDP ? "pure-dp" : "zcdp";
}

Budget Budget::PureDP(double epsilon) {
  // +infinity is a legal degenerate budget (no privacy, zero noise); it is
  // the surrogate used by noiseless-limit checks.
  if (!(epsilon >= 0)) {
    throw ConfigError("pure-DP epsilon must be a nonnegative real");
  }
  return Budget(BudgetKind::kPureDP, epsilon);
}

Budget Budget::ZCDP(double rho) {
  if (!(rho >= 0)) {
    throw ConfigError("zCDP rho must be a nonnegative real");
  }
  return Budget(BudgetKind::kZCDP, rho);
}

double Budget::EpsilonEquivalent() const {
  if (kind_ == BudgetKind::kPureDP) return value_;
  return std::sqrt(2.0 * value_);
}

double Budget::RhoOrThrow() const {
  if (kind_ != BudgetKind::kZCDP) {
    throw ConfigError(
        "a Gaussian-noise mechanism needs a zCDP budget; pure-DP budgets are "
        "not convertible in that direction");
  }
  return value_;
}

double PureDpToZcdp(double epsilon) {
  if (!(epsilon >= 0)) throw ConfigError("epsilon must be nonnegative");
  return epsilon * epsilon / 2.0;
}

double ZcdpToApproxDp(double rho, double delta) {
  if (!(rho >= 0)) throw ConfigError("rho must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie in (0, 1)");
  }
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

Budget Compose(std::span<const Budget> parts) {
  if (parts.empty()) throw ConfigError("cannot compose an empty budget list");
  const BudgetKind kind = parts.front().kind();
  double total = 0.0;
  for (const Budget& b : parts) {
    if (b.kind() != kind) {
      throw ConfigError("cannot compose budgets of mixed kinds");
    }
    total += b.value();
  }
  return kind == BudgetKind::kPureDP ? Budget::PureDP(total)
                                     : Budget::ZCDP(total);
}

std::vector<Budget> Split(const Budget& total,
                          std::span<const double> fractions) {
  if (fractions.empty()) throw ConfigError("split needs at least one fraction");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw ConfigError("split fractions must sum to 1 within 1e-12");
  }
  std::vector<Budget> parts;
  parts.reserve(fractions.size());
  double allocated = 0.0;
  for (size_t i = 0; i + 1 < fractions.size(); ++i) {
    const double v = total.value() * fractions[i];
    allocated += v;
    parts.push_back(total.kind() == BudgetKind::kPureDP ? Budget::PureDP(v)
                                                        : Budget::ZCDP(v));
  }
  // Last part absorbs the rounding residue; composition is then bit-exact.
  const double last = total.value() - allocated;
  if (last < 0) throw ConfigError("split rounding produced a negative part");
  parts.push_back(total.kind() == BudgetKind::kPureDP ? Budget::PureDP(last)
                                                      : Budget::ZCDP(last));
  return parts;
}

double GaussianNoiseScale(double rho, double sensitivity) {
  if (!(rho > 0)) throw ConfigError("rho must be positive for Gaussian noise");
  if (!(sensitivity > 0)) throw ConfigError("sensitivity must be positive");
  return sensitivity / std::sqrt(2.0 * rho);
}

void BudgetLedger::Charge(std::string label, const Budget& spent) {
  entries_.push_back(Entry{std::move(label), spent});
}

Budget BudgetLedger::Total() const {
  std::vector<Budget> budgets;
  budgets.reserve(entries_.size());
  for (const Entry& e : entries_) budgets.push_back(e.spent);
  return Compose(budgets);
}

double BudgetLedger::TotalZcdpEquivalent() const {
  double rho = 0.0;
  double pure_eps = 0.0;
  for (const Entry& e : entries_) {
    if (e.spent.kind() == BudgetKind::kZCDP) {
      rho += e.spent.value();
    } else {
      pure_eps += e.spent.value();
    }
  }
  return rho + PureDpToZcdp(pure_eps);
}

}  // namespace dpmedian
