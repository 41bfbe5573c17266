#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "stakeless/ranking.hpp"

using namespace stakeless;

namespace {

// Group C 2021/22 after five matchdays, teams identified by pot:
// 1 = Sporting, 2 = Dortmund, 3 = Ajax, 4 = Besiktas.
std::vector<MatchRecord> group_c_md5() {
  return {
      make_match(4, 2, 1, 2), make_match(1, 3, 1, 5),  // MD1
      make_match(3, 4, 2, 0), make_match(2, 1, 1, 0),  // MD2
      make_match(3, 2, 4, 0), make_match(4, 1, 1, 4),  // MD3
      make_match(2, 3, 1, 3), make_match(1, 4, 4, 0),  // MD4
      make_match(4, 3, 1, 2), make_match(1, 2, 3, 1),  // MD5
  };
}

std::vector<int> order(const RankingTable& t) {
  std::vector<int> out;
  for (const auto& r : t.rows) out.push_back(r.slot.index());
  return out;
}

}  // namespace

TEST(Ranking, GroupCAfterMatchdayFive) {
  const auto t = compute_table(group_c_md5(), TieBreakRule::HeadToHead);
  EXPECT_EQ(order(t), (std::vector<int>{3, 1, 2, 4}));
  const StandingRow& ajax = t.rows[0];
  EXPECT_EQ(ajax.won, 5);
  EXPECT_EQ(ajax.goals_for, 16);
  EXPECT_EQ(ajax.goals_against, 3);
  EXPECT_EQ(ajax.points(), 15);
  EXPECT_EQ(t.rows[1].points(), 9);
  EXPECT_EQ(t.rows[1].goal_diff(), 4);
  EXPECT_EQ(t.rows[2].points(), 6);
  EXPECT_EQ(t.rows[2].goal_diff(), -6);
  EXPECT_EQ(t.rows[3].points(), 0);
  EXPECT_EQ(t.rows[3].goal_diff(), -11);
  for (auto s : t.separation) EXPECT_EQ(s, SeparatedBy::Points);
  EXPECT_FALSE(t.used_fallback());
  EXPECT_EQ(order(compute_table(group_c_md5(), TieBreakRule::GoalDifference)), (std::vector<int>{3, 1, 2, 4}));
}

TEST(Ranking, HeadToHeadGoalDifferenceSeparatesLevelPair) {
  // Pots: 1 = Sporting, 2 = Dortmund. Both on 9 points; Dortmund has the
  // better overall goal difference, Sporting the better mutual record.
  const std::vector<MatchRecord> m{
      make_match(2, 1, 1, 0), make_match(1, 2, 3, 1),  // mutual: 3-3 points, Sporting +1
      make_match(1, 4, 1, 0), make_match(4, 1, 0, 1),  //
      make_match(2, 4, 5, 0), make_match(4, 2, 0, 5),  //
      make_match(3, 1, 1, 0), make_match(1, 3, 0, 1),  //
      make_match(3, 2, 1, 0), make_match(2, 3, 0, 1),  //
  };
  const auto h2h = compute_table(m, TieBreakRule::HeadToHead);
  EXPECT_EQ(order(h2h), (std::vector<int>{3, 1, 2, 4}));
  EXPECT_EQ(h2h.separation[1], SeparatedBy::HeadToHeadGoalDiff);
  const auto gd = compute_table(m, TieBreakRule::GoalDifference);
  EXPECT_EQ(order(gd), (std::vector<int>{3, 2, 1, 4}));
  EXPECT_EQ(gd.separation[1], SeparatedBy::GoalDiff);
}

TEST(Ranking, EmptyTableFallsBackToPotOrder) {
  for (auto rule : {TieBreakRule::HeadToHead, TieBreakRule::GoalDifference}) {
    const auto t = compute_table({}, rule);
    EXPECT_EQ(order(t), (std::vector<int>{1, 2, 3, 4}));
    for (auto s : t.separation) EXPECT_EQ(s, SeparatedBy::PotFallback);
    EXPECT_TRUE(t.used_fallback());
  }
}

TEST(Ranking, DuplicatePairRejected) {
  const std::vector<MatchRecord> m{make_match(1, 2, 1, 0), make_match(1, 2, 2, 0)};
  EXPECT_THROW(compute_table(m, TieBreakRule::HeadToHead), InvalidInput);
}

TEST(Ranking, ThreeWayTieSeparatedByMiniLeague) {
  // Pots 1, 2 and 3 all finish on 6 points; mini-league goal difference is
  // +1 for pot 2, 0 for pot 1 and -1 for pot 3.
  const std::vector<MatchRecord> m{
      make_match(1, 2, 1, 0), make_match(2, 3, 2, 0), make_match(3, 1, 1, 0),  //
      make_match(2, 1, 1, 0), make_match(3, 2, 1, 0), make_match(1, 3, 1, 0),  //
  };
  const auto stats = head_to_head_stats(m, std::vector<PotSlot>{PotSlot(1), PotSlot(2), PotSlot(3)});
  for (const auto& s : stats) EXPECT_EQ(s.points, 6);
  const auto t = compute_table(m, TieBreakRule::HeadToHead);
  EXPECT_EQ(order(t), (std::vector<int>{2, 1, 3, 4}));
  EXPECT_EQ(t.separation[0], SeparatedBy::HeadToHeadGoalDiff);
  EXPECT_EQ(t.separation[1], SeparatedBy::HeadToHeadGoalDiff);
  EXPECT_EQ(t.separation[2], SeparatedBy::Points);
}

TEST(HeadToHead, SubsetStatistics) {
  const std::vector<MatchRecord> m{make_match(2, 1, 1, 0), make_match(1, 2, 3, 1), make_match(3, 4, 2, 2)};
  const auto s = head_to_head_stats(m, std::vector<PotSlot>{PotSlot(1), PotSlot(2)});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].points, 3);
  EXPECT_EQ(s[0].goal_diff, 1);
  EXPECT_EQ(s[0].goals_for, 3);
  EXPECT_EQ(s[1].points, 3);
  EXPECT_EQ(s[1].goal_diff, -1);
  EXPECT_EQ(s[1].goals_for, 2);

  const auto none = head_to_head_stats(m, std::vector<PotSlot>{PotSlot(1), PotSlot(4)});
  for (const auto& x : none) {
    EXPECT_EQ(x.points, 0);
    EXPECT_EQ(x.goal_diff, 0);
    EXPECT_EQ(x.goals_for, 0);
  }
  EXPECT_THROW(head_to_head_stats(m, std::vector<PotSlot>{PotSlot(1)}), InvalidInput);
}

namespace {

std::vector<MatchRecord> random_matches(std::mt19937_64& rng, bool complete) {
  std::vector<MatchRecord> out;
  std::uniform_int_distribution<int> goals(0, 4);
  std::bernoulli_distribution keep(0.6);
  for (int h = 1; h <= 4; ++h) {
    for (int a = 1; a <= 4; ++a) {
      if (h != a && (complete || keep(rng))) out.push_back(make_match(h, a, goals(rng), goals(rng)));
    }
  }
  return out;
}

}  // namespace

TEST(HeadToHead, FullSubsetEqualsOverall) {
  std::mt19937_64 rng(5);
  const auto m = random_matches(rng, true);
  const std::vector<PotSlot> all{PotSlot(1), PotSlot(2), PotSlot(3), PotSlot(4)};
  const auto s = head_to_head_stats(m, all);
  const GroupAggregate g(m);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(s[i].points, g.row(i).points());
    EXPECT_EQ(s[i].goal_diff, g.row(i).goal_diff());
    EXPECT_EQ(s[i].goals_for, g.row(i).goals_for);
  }
}

TEST(RankingProperties, PermutationInvariance) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 500; ++rep) {
    auto m = random_matches(rng, rep % 2 == 0);
    for (auto rule : {TieBreakRule::HeadToHead, TieBreakRule::GoalDifference}) {
      const auto base = compute_table(m, rule);
      std::shuffle(m.begin(), m.end(), rng);
      const auto again = compute_table(m, rule);
      EXPECT_EQ(order(base), order(again));
      EXPECT_EQ(base.separation, again.separation);
    }
  }
}

TEST(RankingProperties, RowInvariants) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const auto m = random_matches(rng, false);
    const auto t = compute_table(m, TieBreakRule::HeadToHead);
    std::vector<int> slots;
    for (const auto& r : t.rows) {
      EXPECT_EQ(r.played, r.won + r.drawn + r.lost);
      EXPECT_EQ(r.points(), 3 * r.won + r.drawn);
      slots.push_back(r.slot.index());
    }
    std::ranges::sort(slots);
    EXPECT_EQ(slots, (std::vector<int>{1, 2, 3, 4}));
    for (int p = 0; p + 1 < 4; ++p) EXPECT_GE(t.rows[p].points(), t.rows[p + 1].points());
  }
}

TEST(RankingProperties, AddingWinNeverLowersPoints) {
  GroupAggregate g;
  g.add(make_match(1, 2, 0, 0));
  const int before = g.points(2);
  g.add(make_match(3, 4, 0, 1));
  EXPECT_EQ(g.points(3), before + 3);
  g.remove(make_match(3, 4, 0, 1));
  EXPECT_EQ(g.points(3), before);
}

TEST(RankingProperties, GoalDifferenceRuleUsesOnlyTriples) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const auto m = random_matches(rng, true);
    const auto t = compute_table(m, TieBreakRule::GoalDifference);
    for (int p = 0; p + 1 < 4; ++p) {
      const auto& a = t.rows[p];
      const auto& b = t.rows[p + 1];
      const auto ka = std::tuple(a.points(), a.goal_diff(), a.goals_for, -a.slot.index());
      const auto kb = std::tuple(b.points(), b.goal_diff(), b.goals_for, -b.slot.index());
      EXPECT_GT(ka, kb);
    }
  }
}
