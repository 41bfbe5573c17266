#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stakeless {

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Too few observations for the requested estimate.
class InsufficientData : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class BootstrapUnstable : public Error {
 public:
  using Error::Error;
};

// Teams ----------------------------------------------------------------------

inline constexpr int kTeams = 4;
inline constexpr int kMatchdays = 6;
inline constexpr int kMatches = kTeams * (kTeams - 1);

// Largest goal count accepted from validated input. Sentinel scores used when
// probing extreme outcomes live above this cap.
inline constexpr int kMaxGoals = 99;

/// A team, identified by the seeding pot it was drawn from (1 = strongest).
class PotSlot {
 public:
  constexpr explicit PotSlot(int index) : index_(index) {
    if (index < 1 || index > kTeams) throw InvalidInput("pot index out of range: " + std::to_string(index));
  }

  static constexpr PotSlot from_zero_based(int i) { return PotSlot(i + 1); }

  constexpr int index() const { return index_; }
  constexpr int zero_based() const { return index_ - 1; }

  constexpr auto operator<=>(const PotSlot&) const = default;

 private:
  int index_;
};

// Scores ---------------------------------------------------------------------

enum class Outcome { HomeWin, Draw, AwayWin };

struct Score {
  int home_goals = 0;
  int away_goals = 0;

  constexpr auto operator<=>(const Score&) const = default;
};

constexpr Outcome outcome(Score s) {
  if (s.home_goals > s.away_goals) return Outcome::HomeWin;
  if (s.home_goals == s.away_goals) return Outcome::Draw;
  return Outcome::AwayWin;
}

/// Checks a score read from user input (0..kMaxGoals per side).
inline Score validated_score(int home_goals, int away_goals) {
  if (home_goals < 0 || away_goals < 0 || home_goals > kMaxGoals || away_goals > kMaxGoals) {
    throw InvalidInput("goals must lie in 0.." + std::to_string(kMaxGoals));
  }
  return Score{home_goals, away_goals};
}

// Matches --------------------------------------------------------------------

/// An ordered pairing: `home` hosts `away`.
struct Fixture {
  PotSlot home;
  PotSlot away;

  constexpr Fixture(PotSlot h, PotSlot a) : home(h), away(a) {
    if (h == a) throw InvalidInput("a team cannot play itself");
  }
  constexpr Fixture(int h, int a) : Fixture(PotSlot(h), PotSlot(a)) {}

  constexpr Fixture mirrored() const { return Fixture(away, home); }
  constexpr bool involves(PotSlot s) const { return home == s || away == s; }
  constexpr bool same_pairing(const Fixture& o) const {
    return (home == o.home && away == o.away) || (home == o.away && away == o.home);
  }

  constexpr bool operator==(const Fixture&) const = default;
};

struct MatchRecord {
  Fixture fixture;
  Score score;

  constexpr PotSlot home() const { return fixture.home; }
  constexpr PotSlot away() const { return fixture.away; }

  constexpr bool operator==(const MatchRecord&) const = default;
};

inline MatchRecord make_match(int home, int away, int home_goals, int away_goals) {
  return MatchRecord{Fixture(home, away), validated_score(home_goals, away_goals)};
}

using Matchday = std::array<MatchRecord, 2>;

enum class TieBreakRule { GoalDifference, HeadToHead };

enum class MatchClass { Competitive, WeaklyStakeless, StronglyStakeless };

inline const char* to_string(TieBreakRule r) {
  return r == TieBreakRule::GoalDifference ? "goal-difference" : "head-to-head";
}

inline const char* to_string(MatchClass c) {
  switch (c) {
    case MatchClass::Competitive: return "competitive";
    case MatchClass::WeaklyStakeless: return "weakly-stakeless";
    case MatchClass::StronglyStakeless: return "strongly-stakeless";
  }
  return "?";
}

namespace detail {

// Throws InvalidInput if an ordered pair is listed twice.
inline void require_distinct_fixtures(std::span<const MatchRecord> matches) {
  std::array<std::array<bool, kTeams>, kTeams> seen{};
  for (const auto& m : matches) {
    bool& s = seen[m.home().zero_based()][m.away().zero_based()];
    if (s) {
      throw InvalidInput("fixture " + std::to_string(m.home().index()) + "-" + std::to_string(m.away().index()) +
                         " listed twice");
    }
    s = true;
  }
}

}  // namespace detail

/// Results of a (possibly partial) double round-robin, one entry per matchday.
class GroupResults {
 public:
  GroupResults() = default;

  explicit GroupResults(std::vector<Matchday> matchdays) : matchdays_(std::move(matchdays)) {
    if (matchdays_.size() > kMatchdays) throw InvalidInput("more than six matchdays");
    for (const auto& md : matchdays_) {
      const auto& [a, b] = md;
      if (a.fixture.involves(b.home()) || a.fixture.involves(b.away())) {
        throw InvalidInput("a team appears twice within one matchday");
      }
    }
    const auto all = matches();
    detail::require_distinct_fixtures(all);
  }

  std::size_t matchdays_played() const { return matchdays_.size(); }
  bool complete() const { return matchdays_.size() == kMatchdays; }
  const std::vector<Matchday>& matchdays() const { return matchdays_; }

  /// Matches of the first `k` matchdays, flattened.
  std::vector<MatchRecord> prefix(std::size_t k) const {
    if (k > matchdays_.size()) throw InvalidInput("prefix longer than the played matchdays");
    std::vector<MatchRecord> out;
    out.reserve(2 * k);
    for (std::size_t i = 0; i < k; ++i) out.insert(out.end(), matchdays_[i].begin(), matchdays_[i].end());
    return out;
  }

  std::vector<MatchRecord> matches() const { return prefix(matchdays_.size()); }

 private:
  std::vector<Matchday> matchdays_;
};

}  // namespace stakeless
