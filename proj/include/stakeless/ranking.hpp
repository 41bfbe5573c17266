#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <span>
#include <vector>

#include "stakeless/domain.hpp"

namespace stakeless {

struct StandingRow {
  PotSlot slot{1};
  int played = 0;
  int won = 0;
  int drawn = 0;
  int lost = 0;
  int goals_for = 0;
  int goals_against = 0;

  constexpr int points() const { return 3 * won + drawn; }
  constexpr int goal_diff() const { return goals_for - goals_against; }
};

/// Which criterion put one row above the next.
enum class SeparatedBy {
  Points,
  HeadToHeadPoints,
  HeadToHeadGoalDiff,
  HeadToHeadPointsRepeat,
  HeadToHeadGoalDiffRepeat,
  GoalDiff,
  GoalsFor,
  PotFallback,
};

struct RankingTable {
  std::array<StandingRow, kTeams> rows;
  // separation[i] tells how rows[i] was ranked above rows[i + 1].
  std::array<SeparatedBy, kTeams - 1> separation{};

  /// 1-based final position of `slot`.
  int position_of(PotSlot slot) const {
    for (int i = 0; i < kTeams; ++i) {
      if (rows[i].slot == slot) return i + 1;
    }
    return 0;
  }

  bool used_fallback() const {
    return std::ranges::any_of(separation, [](SeparatedBy s) { return s == SeparatedBy::PotFallback; });
  }
};

/// Running totals of a group: per-team rows plus the record of every team
/// against every other team, which is all the head-to-head criteria need.
class GroupAggregate {
 public:
  struct PairRecord {
    int points = 0;
    int goals_for = 0;
    int goals_against = 0;
    int meetings = 0;
  };

  GroupAggregate() {
    for (int i = 0; i < kTeams; ++i) rows_[i].slot = PotSlot::from_zero_based(i);
  }

  explicit GroupAggregate(std::span<const MatchRecord> matches) : GroupAggregate() {
    for (const auto& m : matches) add(m);
  }

  void add(const MatchRecord& m) { apply(m.home().zero_based(), m.away().zero_based(), m.score, +1); }
  void remove(const MatchRecord& m) { apply(m.home().zero_based(), m.away().zero_based(), m.score, -1); }

  /// Adds (sign = +1) or retracts (sign = -1) one result. Indices are 0-based.
  void apply(int home, int away, Score s, int sign) {
    auto& h = rows_[home];
    auto& a = rows_[away];
    h.played += sign;
    a.played += sign;
    h.goals_for += sign * s.home_goals;
    h.goals_against += sign * s.away_goals;
    a.goals_for += sign * s.away_goals;
    a.goals_against += sign * s.home_goals;
    auto& ph = pairs_[home][away];
    auto& pa = pairs_[away][home];
    ph.meetings += sign;
    pa.meetings += sign;
    ph.goals_for += sign * s.home_goals;
    ph.goals_against += sign * s.away_goals;
    pa.goals_for += sign * s.away_goals;
    pa.goals_against += sign * s.home_goals;
    switch (outcome(s)) {
      case Outcome::HomeWin:
        h.won += sign;
        a.lost += sign;
        ph.points += 3 * sign;
        break;
      case Outcome::Draw:
        h.drawn += sign;
        a.drawn += sign;
        ph.points += sign;
        pa.points += sign;
        break;
      case Outcome::AwayWin:
        a.won += sign;
        h.lost += sign;
        pa.points += 3 * sign;
        break;
    }
  }

  const StandingRow& row(int i) const { return rows_[i]; }
  const PairRecord& pair(int i, int j) const { return pairs_[i][j]; }
  int points(int i) const { return rows_[i].points(); }

 private:
  std::array<StandingRow, kTeams> rows_{};
  std::array<std::array<PairRecord, kTeams>, kTeams> pairs_{};
};

struct HeadToHeadStats {
  PotSlot slot{1};
  int points = 0;
  int goal_diff = 0;
  int goals_for = 0;
};

namespace detail {

constexpr int kKeyLength = 8;
using RankKey = std::array<int, kKeyLength>;

// Key slots line up with SeparatedBy, so the first differing slot between two
// adjacent rows names the deciding criterion.
static_assert(static_cast<int>(SeparatedBy::PotFallback) == kKeyLength - 1);

struct MiniStats {
  int points = 0;
  int goal_diff = 0;
};

template <std::size_t N>
inline void head_to_head_among(const GroupAggregate& g, const std::array<int, N>& members, int count,
                               std::array<MiniStats, kTeams>& out) {
  for (int x = 0; x < count; ++x) {
    const int i = members[x];
    MiniStats s;
    for (int y = 0; y < count; ++y) {
      const int j = members[y];
      if (i == j) continue;
      const auto& p = g.pair(i, j);
      s.points += p.points;
      s.goal_diff += p.goals_for - p.goals_against;
    }
    out[i] = s;
  }
}

}  // namespace detail

/// Orders the four teams of `g` under `rule`.
///
/// Points first. Goal-difference rule then uses overall goal difference and
/// goals for. Head-to-head rule compares points and goal difference in the
/// matches among the teams level on points; a strict subset still level after
/// that gets the same two criteria once more, restricted to itself, before
/// overall goal difference and goals for. Ties surviving everything fall back
/// to ascending pot index.
inline RankingTable rank(const GroupAggregate& g, TieBreakRule rule) {
  std::array<detail::RankKey, kTeams> keys{};
  for (int i = 0; i < kTeams; ++i) {
    const auto& r = g.row(i);
    keys[i] = {r.points(), 0, 0, 0, 0, r.goal_diff(), r.goals_for, -i};
  }

  if (rule == TieBreakRule::HeadToHead) {
    std::array<bool, kTeams> done{};
    for (int i = 0; i < kTeams; ++i) {
      if (done[i]) continue;
      std::array<int, kTeams> tied{};
      int n = 0;
      for (int j = i; j < kTeams; ++j) {
        if (!done[j] && keys[j][0] == keys[i][0]) {
          tied[n++] = j;
          done[j] = true;
        }
      }
      if (n < 2) continue;

      std::array<detail::MiniStats, kTeams> first{};
      detail::head_to_head_among(g, tied, n, first);
      for (int x = 0; x < n; ++x) {
        keys[tied[x]][1] = first[tied[x]].points;
        keys[tied[x]][2] = first[tied[x]].goal_diff;
      }

      // Repeat on each strict subset still level after the first pass.
      std::array<bool, kTeams> grouped{};
      for (int x = 0; x < n; ++x) {
        const int a = tied[x];
        if (grouped[a]) continue;
        std::array<int, kTeams> sub{};
        int m = 0;
        for (int y = x; y < n; ++y) {
          const int b = tied[y];
          if (!grouped[b] && keys[b][1] == keys[a][1] && keys[b][2] == keys[a][2]) {
            sub[m++] = b;
            grouped[b] = true;
          }
        }
        if (m < 2 || m == n) continue;
        std::array<detail::MiniStats, kTeams> second{};
        detail::head_to_head_among(g, sub, m, second);
        for (int y = 0; y < m; ++y) {
          keys[sub[y]][3] = second[sub[y]].points;
          keys[sub[y]][4] = second[sub[y]].goal_diff;
        }
      }
    }
  }

  std::array<int, kTeams> order{0, 1, 2, 3};
  std::ranges::sort(order, [&](int a, int b) { return keys[a] > keys[b]; });

  RankingTable table;
  for (int p = 0; p < kTeams; ++p) table.rows[p] = g.row(order[p]);
  for (int p = 0; p + 1 < kTeams; ++p) {
    const auto& upper = keys[order[p]];
    const auto& lower = keys[order[p + 1]];
    int k = 0;
    while (k < detail::kKeyLength - 1 && upper[k] == lower[k]) ++k;
    table.separation[p] = static_cast<SeparatedBy>(k);
  }
  return table;
}

/// Standings of any set of played matches (each ordered pair at most once).
inline RankingTable compute_table(std::span<const MatchRecord> matches, TieBreakRule rule) {
  detail::require_distinct_fixtures(matches);
  return rank(GroupAggregate(matches), rule);
}

/// Points, goal difference and goals for of each team in `subset`, counting
/// only the matches between two members of `subset`.
inline std::vector<HeadToHeadStats> head_to_head_stats(std::span<const MatchRecord> matches,
                                                       std::span<const PotSlot> subset) {
  if (subset.size() < 2) throw InvalidInput("head-to-head needs at least two teams");
  std::array<bool, kTeams> member{};
  for (auto s : subset) {
    if (member[s.zero_based()]) throw InvalidInput("team listed twice in head-to-head subset");
    member[s.zero_based()] = true;
  }
  detail::require_distinct_fixtures(matches);

  std::array<HeadToHeadStats, kTeams> acc{};
  for (int i = 0; i < kTeams; ++i) acc[i].slot = PotSlot::from_zero_based(i);
  for (const auto& m : matches) {
    const int h = m.home().zero_based();
    const int a = m.away().zero_based();
    if (!member[h] || !member[a]) continue;
    acc[h].goals_for += m.score.home_goals;
    acc[a].goals_for += m.score.away_goals;
    acc[h].goal_diff += m.score.home_goals - m.score.away_goals;
    acc[a].goal_diff += m.score.away_goals - m.score.home_goals;
    switch (outcome(m.score)) {
      case Outcome::HomeWin: acc[h].points += 3; break;
      case Outcome::Draw:
        acc[h].points += 1;
        acc[a].points += 1;
        break;
      case Outcome::AwayWin: acc[a].points += 3; break;
    }
  }

  std::vector<HeadToHeadStats> out;
  out.reserve(subset.size());
  for (auto s : subset) out.push_back(acc[s.zero_based()]);
  return out;
}

}  // namespace stakeless
