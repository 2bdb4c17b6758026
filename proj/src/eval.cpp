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

#include "dpmedian/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dpmedian/errors.hpp"

namespace dpmedian {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Quantile with linear interpolation between closest ranks, on sorted data.
double SortedQuantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return kNaN;
  if (sorted.size() == 1) return sorted[0];
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const size_t i = static_cast<size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace

double TrueMedian(const Distribution& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LognormalDist>) {
          return std::exp(d.mu);
        } else if constexpr (std::is_same_v<T, NormalDist>) {
          return d.mu;
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          return (d.a + d.b) / 2.0;
        } else {
          const auto& pop = *d.values;
          if (pop.empty()) throw ConfigError("empty population");
          std::vector<double> sorted(pop);
          std::sort(sorted.begin(), sorted.end());
          const size_t nn = sorted.size();
          // Midpoint of the population's median set.
          if (nn % 2 == 1) return sorted[nn / 2];
          return (sorted[nn / 2 - 1] + sorted[nn / 2]) / 2.0;
        }
      },
      dist);
}

std::vector<double> DrawDataset(const Distribution& dist, int64_t n,
                                RngStream& rng) {
  return std::visit(
      [&](const auto& d) -> std::vector<double> {
        using T = std::decay_t<decltype(d)>;
        std::vector<double> out;
        if constexpr (std::is_same_v<T, LognormalDist>) {
          out.reserve(static_cast<size_t>(n));
          for (int64_t i = 0; i < n; ++i) {
            out.push_back(std::exp(rng.Gaussian(d.mu, d.sigma)));
          }
        } else if constexpr (std::is_same_v<T, NormalDist>) {
          out.reserve(static_cast<size_t>(n));
          for (int64_t i = 0; i < n; ++i) out.push_back(rng.Gaussian(d.mu, d.sigma));
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          out.reserve(static_cast<size_t>(n));
          for (int64_t i = 0; i < n; ++i) out.push_back(rng.Uniform(d.a, d.b));
        } else {
          const auto& pop = *d.values;
          const int64_t total = static_cast<int64_t>(pop.size());
          int64_t k = std::llround(d.sampling_fraction * static_cast<double>(total));
          k = std::clamp<int64_t>(k, 1, total);
          // Partial Fisher-Yates: simple random sample without replacement.
          std::vector<int64_t> idx(pop.size());
          for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int64_t>(i);
          out.reserve(static_cast<size_t>(k));
          for (int64_t i = 0; i < k; ++i) {
            const int64_t j =
                i + static_cast<int64_t>(rng.NextUniform() * static_cast<double>(total - i));
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
            out.push_back(pop[static_cast<size_t>(idx[static_cast<size_t>(i)])]);
          }
        }
        return out;
      },
      dist);
}

std::string DistributionName(const Distribution& dist) {
  char buf[96];
  return std::visit(
      [&](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LognormalDist>) {
          std::snprintf(buf, sizeof(buf), "lognormal(%g,%g)", d.mu, d.sigma);
        } else if constexpr (std::is_same_v<T, NormalDist>) {
          std::snprintf(buf, sizeof(buf), "normal(%g,%g)", d.mu, d.sigma);
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          std::snprintf(buf, sizeof(buf), "uniform(%g,%g)", d.a, d.b);
        } else {
          std::snprintf(buf, sizeof(buf), "empirical(N=%zu,rate=%g)",
                        d.values->size(), d.sampling_fraction);
        }
        return buf;
      },
      dist);
}

MechanismId MechanismFromString(const std::string& name) {
  if (name == "nonprivate") return MechanismId::kNonprivate;
  if (name == "expmech") return MechanismId::kExpMech;
  if (name == "cdf") return MechanismId::kCdfPostProcess;
  if (name == "binsearch") return MechanismId::kNoisyBinSearch;
  if (name == "hybrid") return MechanismId::kBinSearchCdf;
  throw ConfigError("unknown mechanism '" + name +
                    "' (expected nonprivate|expmech|cdf|binsearch|hybrid)");
}

std::string ToString(MechanismId id) {
  switch (id) {
    case MechanismId::kNonprivate: return "nonprivate";
    case MechanismId::kExpMech: return "expmech";
    case MechanismId::kCdfPostProcess: return "cdf";
    case MechanismId::kNoisyBinSearch: return "binsearch";
    case MechanismId::kBinSearchCdf: return "hybrid";
  }
  throw ConfigError("bad mechanism id");
}

namespace {

MechanismOutput RunMechanismInner(MechanismId id, const Hyperparams& hp,
                                  const Sample& s, const Budget& budget,
                                  RngStream& rng, BudgetLedger* ledger) {
  MechanismOutput out{Interval(0.0, 0.0), std::nullopt, {}, 0.0};
  switch (id) {
    case MechanismId::kNonprivate:
      out.interval = NonprivateCi(s, hp.alpha);
      break;
    case MechanismId::kExpMech: {
      ExpMechConfig cfg{hp.alpha, hp.range, hp.union_bound,
                        hp.beta2 > 0 ? hp.beta2 : hp.alpha / 2.0};
      out.interval = ExpMechCi(s, budget, cfg, rng, ledger);
      break;
    }
    case MechanismId::kCdfPostProcess: {
      CdfCiConfig cfg{hp.alpha, hp.range, hp.union_bound, hp.gamma};
      CdfCiResult r = CdfPostProcessCi(s, budget.RhoOrThrow(), cfg, rng, ledger);
      out.interval = r.interval;
      out.cdf = std::move(r.cdf);
      break;
    }
    case MechanismId::kNoisyBinSearch: {
      BinSearchCiConfig cfg{hp.alpha, hp.range, hp.gamma, hp.lb, hp.ub};
      BinSearchCiResult r =
          NoisyBinSearchCi(s, budget.RhoOrThrow(), cfg, rng, ledger);
      out.interval = r.interval;
      out.measurements = std::move(r.measurements);
      break;
    }
    case MechanismId::kBinSearchCdf: {
      HybridConfig cfg{hp.alpha, hp.range, hp.gamma, hp.r1};
      HybridResult r = BinSearchCdfCi(s, budget.RhoOrThrow(), cfg, rng, ledger);
      out.interval = r.interval;
      out.cdf = std::move(r.cdf);
      out.measurements = std::move(r.measurements);
      break;
    }
  }
  return out;
}

}  // namespace

MechanismOutput RunMechanism(MechanismId id, const Hyperparams& hp,
                             const Sample& s, const Budget& budget,
                             RngStream& rng, BudgetLedger* ledger) {
  if (hp.continuity_sigma <= 0.0) {
    return RunMechanismInner(id, hp, s, budget, rng, ledger);
  }
  const ContinuityConfig ccfg =
      ContinuityConfig::Make(hp.continuity_sigma, hp.continuity_beta);
  MechanismOutput out{Interval(0.0, 0.0), std::nullopt, {}, 0.0};
  const CiMechanism inner = [&](const Sample& noised, RngStream& r) {
    MechanismOutput got = RunMechanismInner(id, hp, noised, budget, r, ledger);
    out.cdf = std::move(got.cdf);
    out.measurements = std::move(got.measurements);
    return got.interval;
  };
  const GoodInterval wrapped = WrapContinuity(inner, ccfg, s, rng);
  out.interval = wrapped.interval;
  out.goodness_beta = wrapped.beta;
  return out;
}

double RelWidth(const Sample& s, double alpha, const Interval& interval) {
  const Interval np = NonprivateCi(s, alpha);
  if (!(np.Width() > 0)) {
    throw DegenerateBaselineError("non-private interval has zero width");
  }
  return interval.Width() / np.Width();
}

double EmpiricalCoverage(double true_median,
                         std::span<const Interval> intervals) {
  if (intervals.empty()) throw ConfigError("coverage needs at least one interval");
  int64_t hits = 0;
  for (const Interval& i : intervals) hits += i.Contains(true_median) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

double Bias(std::span<const double> point_estimates, double true_median) {
  if (point_estimates.empty()) throw ConfigError("bias needs estimates");
  double sum = 0.0;
  for (double p : point_estimates) sum += p;
  return sum / static_cast<double>(point_estimates.size()) - true_median;
}

double MidpointEstimator(const Interval& interval) { return interval.Midpoint(); }

void ParallelFor(int64_t count, int threads,
                 const std::function<void(int64_t)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 4;
  }
  threads = static_cast<int>(std::min<int64_t>(threads, count));
  if (threads <= 1) {
    for (int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

void RecomputeAggregates(Report& report) {
  std::vector<double> widths;
  std::vector<double> points;
  int64_t covered = 0, failures = 0, degenerate = 0;
  double spend = 0.0;
  for (const RunRecord& r : report.records) {
    if (!r.ok) {
      ++failures;
      continue;  // counts against coverage, excluded from width/bias
    }
    covered += r.covered ? 1 : 0;
    points.push_back(r.point);
    spend += r.spend_zcdp;
    if (std::isnan(r.rel_width)) {
      ++degenerate;
    } else {
      widths.push_back(r.rel_width);
    }
  }
  const auto total = static_cast<double>(report.records.size());
  report.coverage = total > 0 ? static_cast<double>(covered) / total : kNaN;
  std::sort(widths.begin(), widths.end());
  report.rel_width_q05 = SortedQuantile(widths, 0.05);
  report.rel_width_q25 = SortedQuantile(widths, 0.25);
  report.rel_width_median = SortedQuantile(widths, 0.5);
  report.rel_width_q75 = SortedQuantile(widths, 0.75);
  report.rel_width_q95 = SortedQuantile(widths, 0.95);
  report.bias = points.empty() ? kNaN : Bias(points, report.true_median);
  report.mean_spend_zcdp =
      points.empty() ? 0.0 : spend / static_cast<double>(points.size());
  report.failures = failures;
  report.degenerate_baselines = degenerate;
}

Report RunExperiment(const ExperimentConfig& cfg) {
  if (cfg.num_datasets < 1 || cfg.trials_per_dataset < 1) {
    throw ConfigError("dataset and trial counts must be positive");
  }
  Report report;
  report.mechanism = ToString(cfg.mechanism);
  report.distribution = DistributionName(cfg.dist);
  report.alpha = cfg.hp.alpha;
  report.true_median = TrueMedian(cfg.dist);
  report.seed = cfg.seed;

  const int64_t cells =
      static_cast<int64_t>(cfg.num_datasets) * cfg.trials_per_dataset;
  report.records.resize(static_cast<size_t>(cells));

  const RngStream base(cfg.seed);
  std::atomic<int64_t> recorded_n{0};
  ParallelFor(cells, cfg.threads, [&](int64_t cell) {
    const int dataset_id = static_cast<int>(cell / cfg.trials_per_dataset);
    const int trial_id = static_cast<int>(cell % cfg.trials_per_dataset);
    RngStream dataset_stream =
        base.Child(static_cast<uint64_t>(dataset_id)).Child(0);
    RngStream trial_stream = base.Child(static_cast<uint64_t>(dataset_id))
                                 .Child(1 + static_cast<uint64_t>(trial_id));
    // The dataset is a function of the dataset id alone: trials reuse it.
    const Sample sample(DrawDataset(cfg.dist, cfg.n, dataset_stream));
    recorded_n.store(sample.size());

    RunRecord rec{};
    rec.dataset_id = dataset_id;
    rec.trial_id = trial_id;
    rec.np_lower = kNaN;
    rec.np_upper = kNaN;
    rec.rel_width = kNaN;
    try {
      BudgetLedger ledger;
      const MechanismOutput out = RunMechanism(
          cfg.mechanism, cfg.hp, sample, cfg.budget, trial_stream, &ledger);
      rec.ok = true;
      rec.lower = out.interval.lower;
      rec.upper = out.interval.upper;
      rec.point = MidpointEstimator(out.interval);
      rec.covered = out.interval.Contains(report.true_median);
      rec.spend_zcdp =
          ledger.entries().empty() ? 0.0 : ledger.TotalZcdpEquivalent();
      try {
        const Interval np = NonprivateCi(sample, cfg.hp.alpha);
        rec.np_lower = np.lower;
        rec.np_upper = np.upper;
        rec.rel_width = RelWidth(sample, cfg.hp.alpha, out.interval);
      } catch (const DegenerateBaselineError&) {
        rec.rel_width = kNaN;  // flagged, excluded from aggregates
      }
    } catch (const std::runtime_error& e) {
      // Conservative accounting: a failed run is a zero-width sentinel that
      // never covers.
      rec.ok = false;
      rec.error = e.what();
      rec.lower = rec.upper = rec.point = kNaN;
      rec.covered = false;
      rec.spend_zcdp = 0.0;
    }
    report.records[static_cast<size_t>(cell)] = std::move(rec);
  });
  report.n = recorded_n.load();
  RecomputeAggregates(report);
  return report;
}

void WriteRecordsCsv(const Report& report, std::ostream& out) {
  out << "dataset,trial,ok,error,lower,upper,point,np_lower,np_upper,"
         "rel_width,covered,spend_zcdp\n";
  char buf[512];
  for (const RunRecord& r : report.records) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                  r.dataset_id, r.trial_id, r.ok ? 1 : 0, r.error.c_str(),
                  r.lower, r.upper, r.point, r.np_lower, r.np_upper,
                  r.rel_width, r.covered ? 1 : 0, r.spend_zcdp);
    out << buf;
  }
}

void WriteSummaryJson(const Report& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["mechanism"] = report.mechanism;
  j["distribution"] = report.distribution;
  j["n"] = report.n;
  j["alpha"] = report.alpha;
  j["true_median"] = report.true_median;
  j["seed"] = report.seed;
  j["runs"] = report.records.size();
  j["failures"] = report.failures;
  j["degenerate_baselines"] = report.degenerate_baselines;
  j["coverage"] = report.coverage;
  j["rel_width"] = {{"q05", report.rel_width_q05},
                    {"q25", report.rel_width_q25},
                    {"median", report.rel_width_median},
                    {"q75", report.rel_width_q75},
                    {"q95", report.rel_width_q95}};
  j["bias"] = report.bias;
  j["mean_spend_zcdp"] = report.mean_spend_zcdp;
  out << j.dump(2) << "\n";
}

}  // namespace dpmedian
