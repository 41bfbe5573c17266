#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "stakeless/classify.hpp"
#include "stakeless/domain.hpp"
#include "stakeless/model.hpp"
#include "stakeless/random.hpp"
#include "stakeless/ranking.hpp"
#include "stakeless/schedule.hpp"

namespace stakeless {

/// How a matchday counts as "having" a stakeless game.
enum class CountingMode {
  AtLeastOnePerMatchday,  // indicator: one or both matches of the day
  PerMatchFraction,       // share of the day's two matches
};

inline const char* to_string(CountingMode m) {
  return m == CountingMode::AtLeastOnePerMatchday ? "at-least-one" : "per-match";
}

enum class Metric { WeakMd5 = 0, WeakMd6 = 1, StrongMd6 = 2 };
inline constexpr int kMetrics = 3;
inline constexpr std::array<const char*, kMetrics> kMetricNames{"weak_md5", "weak_md6", "strong_md6"};

struct SimulationConfig {
  std::uint64_t runs = 1'000'000;
  std::uint64_t seed = 42;
  TieBreakRule rule = TieBreakRule::HeadToHead;
  ModelParams params = presets::four_p_pot();
  // Rating of the team from each pot; pot index by default.
  std::array<double, kTeams> ratings{1.0, 2.0, 3.0, 4.0};
  std::vector<ScheduleSpec> schedules = enumerate_schedules();
  CountingMode counting = CountingMode::PerMatchFraction;
  SentinelGoals sentinel{};
  unsigned threads = 1;
  // The first this-many runs also check, by brute force over every
  // completion, that nothing is settled after three matchdays.
  std::uint64_t early_audit_runs = 0;

  void validate() const {
    if (runs < 1) throw InvalidInput("runs must be at least 1");
    if (schedules.empty()) throw InvalidInput("no schedules to simulate");
    if (threads < 1) throw InvalidInput("threads must be at least 1");
    for (const auto& s : schedules) {
      if (!is_valid_schedule(s)) throw InvalidSchedule("invalid schedule " + s.label());
    }
    if (params.family == ModelFamily::Baseline) throw UnsupportedFamily("simulation needs a parametric model");
    params.validate();
    for (double r : ratings) (void)Rating(r);
  }
};

struct MetricSet {
  std::array<double, kMetrics> p{};
  std::array<double, kMetrics> se{};
  std::array<int, kMetrics> rank{};

  double operator[](Metric m) const { return p[static_cast<int>(m)]; }
};

struct ScheduleRow {
  ScheduleSpec schedule;
  MetricSet at_least_one;
  MetricSet per_match;
  // Share of runs where a ranking behind the matchday-5 fixedness test was
  // decided by pot order.
  double fallback_tie_rate = 0.0;
  std::uint64_t strong_md5_matches = 0;

  const MetricSet& metrics(CountingMode m) const {
    return m == CountingMode::AtLeastOnePerMatchday ? at_least_one : per_match;
  }
};

struct StakelessReport {
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  TieBreakRule rule = TieBreakRule::HeadToHead;
  CountingMode counting = CountingMode::PerMatchFraction;
  std::vector<ScheduleRow> rows;
  // Mean squared per-run difference between schedules i and j, indexed
  // [mode][metric][i * rows + j]. Empty when the report was not simulated.
  std::array<std::array<std::vector<double>, kMetrics>, 2> paired_msd;
  double final_table_fallback_rate = 0.0;
  std::uint64_t strong_md5_total = 0;
  std::uint64_t md4_middle_fixed = 0;
  std::uint64_t early_audited = 0;
  std::uint64_t early_violations = 0;

  const MetricSet& metrics(std::size_t row) const { return rows.at(row).metrics(counting); }

  const ScheduleRow* find(std::string_view label) const {
    for (const auto& r : rows) {
      if (r.schedule.label() == label) return &r;
    }
    return nullptr;
  }

  /// Standard error of p_i - p_j for one metric, paired when available.
  double difference_se(std::size_t i, std::size_t j, Metric m) const {
    const int k = static_cast<int>(m);
    const auto& a = metrics(i);
    const auto& b = metrics(j);
    const auto& msd = paired_msd[static_cast<int>(counting)][k];
    if (msd.empty()) return std::sqrt(a.se[k] * a.se[k] + b.se[k] * b.se[k]);
    const double d = a.p[k] - b.p[k];
    const double var = std::max(0.0, msd[i * rows.size() + j] - d * d);
    return std::sqrt(var / static_cast<double>(runs));
  }
};

/// Binomial standard error of a simulated probability.
inline double error_bound(double p, std::uint64_t n) {
  if (n < 1) throw InvalidInput("sample size must be positive");
  if (p < 0.0 || p > 1.0) throw InvalidInput("probability outside [0, 1]");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

namespace detail {

// Rank 1 = lowest probability; equal values share the better rank.
inline void assign_ranks(std::vector<ScheduleRow>& rows, MetricSet ScheduleRow::*set) {
  for (int k = 0; k < kMetrics; ++k) {
    for (auto& r : rows) {
      int better = 0;
      for (const auto& o : rows) better += (o.*set).p[k] < (r.*set).p[k];
      (r.*set).rank[k] = better + 1;
    }
  }
}

struct SimulationTally {
  explicit SimulationTally(std::size_t n)
      : any(n), matches(n), fallback(n), strong_md5(n), msd_any(kMetrics, std::vector<std::uint64_t>(n * n)),
        msd_matches(kMetrics, std::vector<std::uint64_t>(n * n)) {}

  std::vector<std::array<std::uint64_t, kMetrics>> any;
  std::vector<std::array<std::uint64_t, kMetrics>> matches;
  std::vector<std::uint64_t> fallback;
  std::vector<std::uint64_t> strong_md5;
  std::vector<std::vector<std::uint64_t>> msd_any;
  std::vector<std::vector<std::uint64_t>> msd_matches;
  std::uint64_t final_fallback = 0;
  std::uint64_t md4_middle_fixed = 0;
  std::uint64_t early_audited = 0;
  std::uint64_t early_violations = 0;

  void merge(const SimulationTally& o) {
    for (std::size_t i = 0; i < any.size(); ++i) {
      for (int k = 0; k < kMetrics; ++k) {
        any[i][k] += o.any[i][k];
        matches[i][k] += o.matches[i][k];
      }
      fallback[i] += o.fallback[i];
      strong_md5[i] += o.strong_md5[i];
    }
    for (int k = 0; k < kMetrics; ++k) {
      for (std::size_t i = 0; i < msd_any[k].size(); ++i) {
        msd_any[k][i] += o.msd_any[k][i];
        msd_matches[k][i] += o.msd_matches[k][i];
      }
    }
    final_fallback += o.final_fallback;
    md4_middle_fixed += o.md4_middle_fixed;
    early_audited += o.early_audited;
    early_violations += o.early_violations;
  }
};

struct SimulationPlan {
  const SimulationConfig& cfg;
  std::array<std::array<Rates, kTeams>, kTeams> rates{};
  double shared = 0.0;
  std::vector<FullFixture> fixtures;
};

inline void simulate_range(const SimulationPlan& plan, std::uint64_t begin, std::uint64_t end, SimulationTally& t) {
  const auto& cfg = plan.cfg;
  const std::size_t n = cfg.schedules.size();
  std::array<std::array<Score, kTeams>, kTeams> results{};
  std::vector<std::array<int, kMetrics>> counts(n);

  for (std::uint64_t run = begin; run < end; ++run) {
    RandomStream rng = RandomStream::derived(cfg.seed, run);
    GroupAggregate full;
    for (int h = 0; h < kTeams; ++h) {
      for (int a = 0; a < kTeams; ++a) {
        if (h == a) continue;
        results[h][a] = sample_score(plan.rates[h][a], plan.shared, rng);
        full.apply(h, a, results[h][a], +1);
      }
    }
    if (rank(full, cfg.rule).used_fallback()) ++t.final_fallback;

    for (std::size_t si = 0; si < n; ++si) {
      const auto& spec = cfg.schedules[si];
      GroupAggregate g = full;
      for (const auto& f : spec.md5) g.apply(f.home.zero_based(), f.away.zero_based(), results[f.home.zero_based()][f.away.zero_based()], -1);
      for (const auto& f : spec.md6) g.apply(f.home.zero_based(), f.away.zero_based(), results[f.home.zero_based()][f.away.zero_based()], -1);

      const Fixedness after4 = fixed_after_md4(g, cfg.rule);
      for (int p = 0; p < kTeams; ++p) {
        const auto pos = after4.position(PotSlot::from_zero_based(p));
        if (pos && (*pos == 2 || *pos == 3)) ++t.md4_middle_fixed;
      }
      int weak5 = 0, strong5 = 0;
      for (auto c : classify_matchday(after4, spec.md5)) {
        weak5 += c == MatchClass::WeaklyStakeless;
        strong5 += c == MatchClass::StronglyStakeless;
      }

      for (const auto& f : spec.md5) g.apply(f.home.zero_based(), f.away.zero_based(), results[f.home.zero_based()][f.away.zero_based()], +1);
      bool fallback = false;
      const Fixedness after5 = fixed_after_md5(g, spec.md6, cfg.rule, cfg.sentinel, &fallback);
      int weak6 = 0, strong6 = 0;
      for (auto c : classify_matchday(after5, spec.md6)) {
        weak6 += c == MatchClass::WeaklyStakeless;
        strong6 += c == MatchClass::StronglyStakeless;
      }

      counts[si] = {weak5, weak6, strong6};
      for (int k = 0; k < kMetrics; ++k) {
        t.any[si][k] += counts[si][k] > 0;
        t.matches[si][k] += counts[si][k];
      }
      t.fallback[si] += fallback;
      t.strong_md5[si] += strong5;
    }

    for (int k = 0; k < kMetrics; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const int dm = counts[i][k] - counts[j][k];
          const int da = int{counts[i][k] > 0} - int{counts[j][k] > 0};
          t.msd_any[k][i * n + j] += da * da;
          t.msd_matches[k][i * n + j] += dm * dm;
        }
      }
    }

    if (run < cfg.early_audit_runs) {
      for (const auto& fx : plan.fixtures) {
        const auto prefix = played_prefix(fx, results, 3);
        ++t.early_audited;
        if (!fixed_oracle(prefix, cfg.rule).all_open()) ++t.early_violations;
      }
    }
  }
}

}  // namespace detail

/// Simulates `cfg.runs` group stages and classifies the matchday-5 and
/// matchday-6 games of every requested schedule. All schedules see the same
/// sampled results in a run; run i draws from the stream (seed, i), so the
/// report does not depend on the number of threads.
inline StakelessReport run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.schedules.size();

  detail::SimulationPlan plan{cfg, {}, is_bivariate(cfg.params.family) ? cfg.params.c : 0.0, {}};
  for (int h = 0; h < kTeams; ++h) {
    for (int a = 0; a < kTeams; ++a) {
      if (h != a) plan.rates[h][a] = rates(cfg.params, Rating(cfg.ratings[h]), Rating(cfg.ratings[a]));
    }
  }
  for (const auto& s : cfg.schedules) plan.fixtures.push_back(expand_fixture(s));

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(cfg.threads, cfg.runs));
  std::vector<detail::SimulationTally> tallies(workers, detail::SimulationTally(n));
  if (workers == 1) {
    detail::simulate_range(plan, 0, cfg.runs, tallies[0]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = cfg.runs * w / workers;
      const std::uint64_t end = cfg.runs * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] { detail::simulate_range(plan, begin, end, tallies[w]); });
    }
  }
  for (unsigned w = 1; w < workers; ++w) tallies[0].merge(tallies[w]);
  const auto& t = tallies[0];

  StakelessReport rep;
  rep.runs = cfg.runs;
  rep.seed = cfg.seed;
  rep.rule = cfg.rule;
  rep.counting = cfg.counting;
  const double runs = static_cast<double>(cfg.runs);
  for (std::size_t i = 0; i < n; ++i) {
    ScheduleRow row{cfg.schedules[i], {}, {}, 0.0, t.strong_md5[i]};
    for (int k = 0; k < kMetrics; ++k) {
      const double any = static_cast<double>(t.any[i][k]) / runs;
      row.at_least_one.p[k] = any;
      row.at_least_one.se[k] = error_bound(any, cfg.runs);
      const double frac = static_cast<double>(t.matches[i][k]) / (2.0 * runs);
      row.per_match.p[k] = frac;
      row.per_match.se[k] = error_bound(frac, cfg.runs);
    }
    row.fallback_tie_rate = static_cast<double>(t.fallback[i]) / runs;
    rep.strong_md5_total += t.strong_md5[i];
    rep.rows.push_back(row);
  }
  detail::assign_ranks(rep.rows, &ScheduleRow::at_least_one);
  detail::assign_ranks(rep.rows, &ScheduleRow::per_match);

  for (int k = 0; k < kMetrics; ++k) {
    auto& any = rep.paired_msd[static_cast<int>(CountingMode::AtLeastOnePerMatchday)][k];
    auto& frac = rep.paired_msd[static_cast<int>(CountingMode::PerMatchFraction)][k];
    any.assign(n * n, 0.0);
    frac.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        any[i * n + j] = any[j * n + i] = static_cast<double>(t.msd_any[k][i * n + j]) / runs;
        // Per-match values are counts / 2.
        frac[i * n + j] = frac[j * n + i] = static_cast<double>(t.msd_matches[k][i * n + j]) / (4.0 * runs);
      }
    }
  }
  rep.final_table_fallback_rate = static_cast<double>(t.final_fallback) / runs;
  rep.md4_middle_fixed = t.md4_middle_fixed;
  rep.early_audited = t.early_audited;
  rep.early_violations = t.early_violations;
  return rep;
}

/// Report from externally known probabilities (e.g. published values), one
/// row per label with {weak_md5, weak_md6, strong_md6}.
inline StakelessReport report_from_probabilities(
    const std::vector<std::pair<std::string, std::array<double, kMetrics>>>& values, std::uint64_t runs) {
  StakelessReport rep;
  rep.runs = runs;
  for (const auto& [label, p] : values) {
    ScheduleRow row{parse_schedule_label(label), {}, {}, 0.0, 0};
    row.at_least_one.p = p;
    for (int k = 0; k < kMetrics; ++k) row.at_least_one.se[k] = error_bound(p[k], runs);
    row.per_match = row.at_least_one;
    rep.rows.push_back(row);
  }
  detail::assign_ranks(rep.rows, &ScheduleRow::at_least_one);
  detail::assign_ranks(rep.rows, &ScheduleRow::per_match);
  return rep;
}

/// w5 * P(weak, md5) + P(weak, md6) + r * P(strong, md6).
inline double weighted_cost(const MetricSet& m, double w5, double r) {
  return w5 * m[Metric::WeakMd5] + m[Metric::WeakMd6] + r * m[Metric::StrongMd6];
}

inline double weighted_cost(const StakelessReport& rep, std::size_t row, double w5, double r) {
  return weighted_cost(rep.metrics(row), w5, r);
}

struct CostCurve {
  std::string schedule;
  std::vector<std::pair<double, double>> points;  // (r, cost)
};

inline std::vector<CostCurve> cost_curve(const StakelessReport& rep, double w5, const std::vector<double>& r_values) {
  std::vector<CostCurve> out;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CostCurve c{rep.rows[i].schedule.label(), {}};
    for (double r : r_values) c.points.emplace_back(r, weighted_cost(rep, i, w5, r));
    out.push_back(std::move(c));
  }
  return out;
}

struct Dominance {
  std::string dominated;
  std::string dominator;
};

/// Schedules beaten by another schedule: no worse on any metric and better on
/// at least one by more than three standard errors of the difference. Each
/// dominated schedule is listed once, against the dominator with the lowest
/// summed probability.
inline std::vector<Dominance> find_dominated(const StakelessReport& rep) {
  const std::size_t n = rep.rows.size();
  if (n < 2) throw InvalidInput("dominance needs at least two schedules");
  auto total = [&](std::size_t i) {
    const auto& m = rep.metrics(i);
    return m.p[0] + m.p[1] + m.p[2];
  };
  std::vector<Dominance> out;
  for (std::size_t s = 0; s < n; ++s) {
    const auto& ms = rep.metrics(s);
    std::size_t best = n;
    for (std::size_t d = 0; d < n; ++d) {
      if (d == s) continue;
      const auto& md = rep.metrics(d);
      bool no_worse = true;
      bool clearly_better = false;
      for (int k = 0; k < kMetrics; ++k) {
        if (md.p[k] > ms.p[k]) no_worse = false;
        if (ms.p[k] - md.p[k] > 3.0 * rep.difference_se(s, d, static_cast<Metric>(k))) clearly_better = true;
      }
      if (no_worse && clearly_better && (best == n || total(d) < total(best))) best = d;
    }
    if (best != n) out.push_back({rep.rows[s].schedule.label(), rep.rows[best].schedule.label()});
  }
  return out;
}

}  // namespace stakeless
