#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <vector>

#include "stakeless/domain.hpp"
#include "stakeless/ranking.hpp"

namespace stakeless {

/// Per team: the final position if it can no longer change, otherwise open.
class Fixedness {
 public:
  constexpr Fixedness() = default;

  constexpr bool is_fixed(PotSlot s) const { return position_[s.zero_based()] != 0; }
  constexpr std::optional<int> position(PotSlot s) const {
    const int p = position_[s.zero_based()];
    return p == 0 ? std::nullopt : std::optional<int>(p);
  }

  void fix(PotSlot s, int pos) {
    if (pos < 1 || pos > kTeams) throw InvalidInput("position out of range");
    for (int i = 0; i < kTeams; ++i) {
      if (i != s.zero_based() && position_[i] == pos) throw InvalidInput("two teams fixed at one position");
    }
    position_[s.zero_based()] = pos;
  }

  constexpr int fixed_count() const {
    int n = 0;
    for (int p : position_) n += p != 0;
    return n;
  }
  constexpr bool all_open() const { return fixed_count() == 0; }

  constexpr bool operator==(const Fixedness&) const = default;

 private:
  std::array<int, kTeams> position_{};
};

/// Goals scored in a "best/worst case" result. Must exceed any goal
/// difference reachable from validated scores.
struct SentinelGoals {
  int goals = 100;
};

inline constexpr std::array<int, 6> kDefaultOracleGrid{0, 1, 2, 3, 4, 100};

namespace detail {

inline void require_prefix(std::span<const MatchRecord> prefix, int matchdays) {
  if (static_cast<int>(prefix.size()) != 2 * matchdays) {
    throw InvalidState("expected " + std::to_string(2 * matchdays) + " played matches, got " +
                       std::to_string(prefix.size()));
  }
  std::array<std::array<bool, kTeams>, kTeams> seen{};
  std::array<int, kTeams> played{};
  for (const auto& m : prefix) {
    bool& s = seen[m.home().zero_based()][m.away().zero_based()];
    if (s) throw InvalidState("fixture played twice");
    s = true;
    ++played[m.home().zero_based()];
    ++played[m.away().zero_based()];
  }
  for (int p : played) {
    if (p != matchdays) throw InvalidState("every team must have played " + std::to_string(matchdays) + " matches");
  }
}

// Ordered pairs of the full double round-robin missing from `prefix`.
inline std::vector<Fixture> missing_fixtures(std::span<const MatchRecord> prefix) {
  std::array<std::array<bool, kTeams>, kTeams> seen{};
  for (const auto& m : prefix) seen[m.home().zero_based()][m.away().zero_based()] = true;
  std::vector<Fixture> out;
  for (int h = 0; h < kTeams; ++h) {
    for (int a = 0; a < kTeams; ++a) {
      if (h != a && !seen[h][a]) out.emplace_back(h + 1, a + 1);
    }
  }
  return out;
}

}  // namespace detail

/// Fixedness after four matchdays from the points table alone.
///
/// Only first and last place can be settled this early. Leader: a lead of at
/// least seven points, or under head-to-head a lead of exactly six that is
/// seven over third place with both meetings against the runner-up played.
/// Last place is the mirror image.
inline Fixedness fixed_after_md4(const GroupAggregate& g, TieBreakRule rule) {
  std::array<int, kTeams> order{0, 1, 2, 3};
  std::ranges::sort(order, [&](int a, int b) { return g.points(a) > g.points(b); });
  const int first = order[0], second = order[1], third = order[2], fourth = order[3];

  Fixedness f;
  const int lead = g.points(first) - g.points(second);
  const bool top_by_h2h = rule == TieBreakRule::HeadToHead && lead == 6 &&
                          g.points(first) - g.points(third) >= 7 && g.pair(first, second).meetings == 2;
  if (lead >= 7 || top_by_h2h) f.fix(PotSlot::from_zero_based(first), 1);

  const int gap = g.points(third) - g.points(fourth);
  const bool bottom_by_h2h = rule == TieBreakRule::HeadToHead && gap == 6 &&
                             g.points(second) - g.points(fourth) >= 7 && g.pair(fourth, third).meetings == 2;
  if (gap >= 7 || bottom_by_h2h) f.fix(PotSlot::from_zero_based(fourth), 4);
  return f;
}

inline Fixedness fixed_after_md4(std::span<const MatchRecord> prefix, TieBreakRule rule) {
  detail::require_prefix(prefix, 4);
  return fixed_after_md4(GroupAggregate(prefix), rule);
}

/// Fixedness after five matchdays: rank the group under the four extreme
/// completions (each remaining match won by `sentinel` goals to nil by one
/// side or the other); a team is fixed where all four agree. If given,
/// `used_fallback` is set when any of the four tables needed the pot order.
inline Fixedness fixed_after_md5(const GroupAggregate& g, std::span<const Fixture, 2> remaining, TieBreakRule rule,
                                 SentinelGoals sentinel = {}, bool* used_fallback = nullptr) {
  if (used_fallback) *used_fallback = false;
  const Score home_win{sentinel.goals, 0};
  const Score away_win{0, sentinel.goals};
  std::array<int, kTeams> pos{};
  bool first = true;
  std::array<bool, kTeams> stable{true, true, true, true};
  GroupAggregate scenario = g;
  for (const Score s0 : {home_win, away_win}) {
    for (const Score s1 : {home_win, away_win}) {
      scenario.apply(remaining[0].home.zero_based(), remaining[0].away.zero_based(), s0, +1);
      scenario.apply(remaining[1].home.zero_based(), remaining[1].away.zero_based(), s1, +1);
      const auto table = rank(scenario, rule);
      if (used_fallback && table.used_fallback()) *used_fallback = true;
      for (int p = 0; p < kTeams; ++p) {
        const int t = table.rows[p].slot.zero_based();
        if (first) {
          pos[t] = p + 1;
        } else if (pos[t] != p + 1) {
          stable[t] = false;
        }
      }
      first = false;
      scenario.apply(remaining[0].home.zero_based(), remaining[0].away.zero_based(), s0, -1);
      scenario.apply(remaining[1].home.zero_based(), remaining[1].away.zero_based(), s1, -1);
    }
  }
  Fixedness f;
  for (int t = 0; t < kTeams; ++t) {
    if (stable[t]) f.fix(PotSlot::from_zero_based(t), pos[t]);
  }
  return f;
}

inline Fixedness fixed_after_md5(std::span<const MatchRecord> prefix, TieBreakRule rule, SentinelGoals sentinel = {}) {
  detail::require_prefix(prefix, 5);
  if (sentinel.goals <= 0) throw InvalidInput("sentinel must be positive");
  const auto remaining = detail::missing_fixtures(prefix);
  if (remaining.size() != 2 || remaining[0].involves(remaining[1].home) || remaining[0].involves(remaining[1].away)) {
    throw InvalidState("the two unplayed fixtures must form one matchday");
  }
  return fixed_after_md5(GroupAggregate(prefix), std::span<const Fixture, 2>(remaining.data(), 2), rule, sentinel);
}

/// Brute-force fixedness: plays every combination of scores from `grid` in
/// every remaining match and keeps the teams whose position never moves.
inline Fixedness fixed_oracle(std::span<const MatchRecord> prefix, std::span<const Fixture> remaining,
                              TieBreakRule rule, std::span<const int> grid = kDefaultOracleGrid) {
  if (grid.empty()) throw InvalidInput("oracle goal grid is empty");
  if (remaining.size() > 6) throw InvalidInput("too many remaining matches for enumeration");
  for (int x : grid) {
    if (x < 0) throw InvalidInput("negative goals in oracle grid");
  }
  std::vector<MatchRecord> all(prefix.begin(), prefix.end());
  for (const auto& f : remaining) all.push_back(MatchRecord{f, Score{}});
  detail::require_distinct_fixtures(all);

  GroupAggregate g(prefix);
  std::array<int, kTeams> pos{};
  std::array<bool, kTeams> stable{true, true, true, true};
  int open = 0;
  bool first = true;
  const int k = static_cast<int>(remaining.size());

  // Depth-first over the remaining matches; stops once every team has moved.
  auto visit = [&](auto&& self, int depth) -> bool {
    if (depth == k) {
      const auto table = rank(g, rule);
      for (int p = 0; p < kTeams; ++p) {
        const int t = table.rows[p].slot.zero_based();
        if (first) {
          pos[t] = p + 1;
        } else if (stable[t] && pos[t] != p + 1) {
          stable[t] = false;
          ++open;
        }
      }
      first = false;
      return open < kTeams;
    }
    const int h = remaining[depth].home.zero_based();
    const int a = remaining[depth].away.zero_based();
    for (int hg : grid) {
      for (int ag : grid) {
        const Score s{hg, ag};
        g.apply(h, a, s, +1);
        const bool go_on = self(self, depth + 1);
        g.apply(h, a, s, -1);
        if (!go_on) return false;
      }
    }
    return true;
  };
  visit(visit, 0);

  Fixedness f;
  for (int t = 0; t < kTeams; ++t) {
    if (stable[t]) f.fix(PotSlot::from_zero_based(t), pos[t]);
  }
  return f;
}

/// Oracle over the unplayed fixtures of a prefix.
inline Fixedness fixed_oracle(std::span<const MatchRecord> prefix, TieBreakRule rule,
                              std::span<const int> grid = kDefaultOracleGrid) {
  const auto remaining = detail::missing_fixtures(prefix);
  return fixed_oracle(prefix, remaining, rule, grid);
}

inline MatchClass classify_match(const Fixedness& fixed, const Fixture& f) {
  const int n = int{fixed.is_fixed(f.home)} + int{fixed.is_fixed(f.away)};
  return n == 2 ? MatchClass::StronglyStakeless : n == 1 ? MatchClass::WeaklyStakeless : MatchClass::Competitive;
}

inline std::array<MatchClass, 2> classify_matchday(const Fixedness& fixed, std::span<const Fixture, 2> matchday) {
  return {classify_match(fixed, matchday[0]), classify_match(fixed, matchday[1])};
}

}  // namespace stakeless
