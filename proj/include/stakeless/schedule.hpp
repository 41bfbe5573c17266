#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "stakeless/domain.hpp"

namespace stakeless {

/// The last two matchdays of a group. The rest of the calendar follows from
/// the mirror structure, see expand_fixture().
struct ScheduleSpec {
  std::array<Fixture, 2> md5;
  std::array<Fixture, 2> md6;

  /// Four digits: home and away pot of the first matchday-5 match, then of
  /// the first matchday-6 match.
  std::string label() const {
    return {static_cast<char>('0' + md5[0].home.index()), static_cast<char>('0' + md5[0].away.index()),
            static_cast<char>('0' + md6[0].home.index()), static_cast<char>('0' + md6[0].away.index())};
  }

  constexpr bool operator==(const ScheduleSpec&) const = default;
};

using FixtureMatchday = std::array<Fixture, 2>;
using FullFixture = std::array<FixtureMatchday, kMatchdays>;

inline constexpr int kScheduleCount = 12;

// Valid final-two-matchday schedules, in the customary order.
inline constexpr std::array<ScheduleSpec, kScheduleCount> kSchedules{{
    {{Fixture(1, 2), Fixture(4, 3)}, {Fixture(3, 1), Fixture(2, 4)}},  // 1231
    {{Fixture(2, 1), Fixture(3, 4)}, {Fixture(1, 3), Fixture(4, 2)}},  // 2113
    {{Fixture(1, 2), Fixture(3, 4)}, {Fixture(4, 1), Fixture(2, 3)}},  // 1241
    {{Fixture(2, 1), Fixture(4, 3)}, {Fixture(1, 4), Fixture(3, 2)}},  // 2114
    {{Fixture(1, 3), Fixture(4, 2)}, {Fixture(2, 1), Fixture(3, 4)}},  // 1321
    {{Fixture(3, 1), Fixture(2, 4)}, {Fixture(1, 2), Fixture(4, 3)}},  // 3112
    {{Fixture(1, 3), Fixture(2, 4)}, {Fixture(4, 1), Fixture(3, 2)}},  // 1341
    {{Fixture(3, 1), Fixture(4, 2)}, {Fixture(1, 4), Fixture(2, 3)}},  // 3114
    {{Fixture(1, 4), Fixture(3, 2)}, {Fixture(2, 1), Fixture(4, 3)}},  // 1421
    {{Fixture(4, 1), Fixture(2, 3)}, {Fixture(1, 2), Fixture(3, 4)}},  // 4112
    {{Fixture(1, 4), Fixture(2, 3)}, {Fixture(3, 1), Fixture(4, 2)}},  // 1431
    {{Fixture(4, 1), Fixture(3, 2)}, {Fixture(1, 3), Fixture(2, 4)}},  // 4113
}};

namespace detail {

// Team 1 meets one of three opponents on matchday 5, one of the remaining two
// on matchday 6, and is at home on exactly one of those days. Every team has
// one home and one away game over the two days, which orients the other match.
constexpr std::array<ScheduleSpec, kScheduleCount> generate_schedules() {
  std::array<ScheduleSpec, kScheduleCount> out{kSchedules};
  int n = 0;
  for (int x = 2; x <= 4; ++x) {
    for (int y = 2; y <= 4; ++y) {
      if (y == x) continue;
      const int z = 9 - x - y;  // the remaining team; 2 + 3 + 4 = 9
      for (bool home_on_md5 : {true, false}) {
        // y meets team 1 on matchday 6 at the venue opposite to team 1's, so
        // y's own matchday-5 venue is also opposite to team 1's.
        const Fixture md5_first = home_on_md5 ? Fixture(1, x) : Fixture(x, 1);
        const Fixture md5_second = home_on_md5 ? Fixture(z, y) : Fixture(y, z);
        const Fixture md6_first = home_on_md5 ? Fixture(y, 1) : Fixture(1, y);
        const Fixture md6_second = home_on_md5 ? Fixture(x, z) : Fixture(z, x);
        out[n++] = ScheduleSpec{{md5_first, md5_second}, {md6_first, md6_second}};
      }
    }
  }
  return out;
}

static_assert(generate_schedules() == kSchedules, "hard-coded schedule table disagrees with its construction");

}  // namespace detail

inline std::vector<ScheduleSpec> enumerate_schedules() { return {kSchedules.begin(), kSchedules.end()}; }

inline bool is_valid_schedule(const ScheduleSpec& s) { return std::ranges::find(kSchedules, s) != kSchedules.end(); }

/// Looks up a schedule by its four-digit label.
inline ScheduleSpec parse_schedule_label(std::string_view label) {
  for (const auto& s : kSchedules) {
    if (s.label() == label) return s;
  }
  std::string valid;
  for (const auto& s : kSchedules) valid += (valid.empty() ? "" : ",") + s.label();
  throw InvalidSchedule("unknown schedule '" + std::string(label) + "'; valid labels: " + valid);
}

inline FixtureMatchday mirrored(const FixtureMatchday& md) { return {md[0].mirrored(), md[1].mirrored()}; }

/// Full six-matchday calendar: matchdays 4/5/6 mirror 3/2/1. Matchdays 3 and
/// 4 hold the two legs of the pairing left over by matchdays 5 and 6; the
/// lower pot of each such match hosts on matchday 4.
inline FullFixture expand_fixture(const ScheduleSpec& spec) {
  if (!is_valid_schedule(spec)) throw InvalidSchedule("not one of the twelve valid schedules");
  const PotSlot one(1);
  PotSlot partner(1);
  for (int t = 2; t <= kTeams; ++t) {
    const PotSlot s(t);
    const Fixture probe(one, s);
    if (!probe.same_pairing(spec.md5[0]) && !probe.same_pairing(spec.md6[0])) partner = s;
  }
  std::array<int, 2> others{};
  int k = 0;
  for (int t = 2; t <= kTeams; ++t) {
    if (t != partner.index()) others[k++] = t;
  }
  const FixtureMatchday md4{Fixture(one, partner), Fixture(PotSlot(others[0]), PotSlot(others[1]))};
  return FullFixture{mirrored(spec.md6), mirrored(spec.md5), mirrored(md4), md4, spec.md5, spec.md6};
}

enum class FixtureViolation {
  SlotTwiceInMatchday,
  DuplicatePairing,
  MissingPairing,
  MirrorViolation,
  ThreeConsecutiveHome,
  ThreeConsecutiveAway,
  OpeningVenueImbalance,
  ClosingVenueImbalance,
};

inline const char* to_string(FixtureViolation v) {
  switch (v) {
    case FixtureViolation::SlotTwiceInMatchday: return "SlotTwiceInMatchday";
    case FixtureViolation::DuplicatePairing: return "DuplicatePairing";
    case FixtureViolation::MissingPairing: return "MissingPairing";
    case FixtureViolation::MirrorViolation: return "MirrorViolation";
    case FixtureViolation::ThreeConsecutiveHome: return "ThreeConsecutiveHome";
    case FixtureViolation::ThreeConsecutiveAway: return "ThreeConsecutiveAway";
    case FixtureViolation::OpeningVenueImbalance: return "OpeningVenueImbalance";
    case FixtureViolation::ClosingVenueImbalance: return "ClosingVenueImbalance";
  }
  return "?";
}

/// All broken calendar rules, each reported once; empty means valid.
inline std::vector<FixtureViolation> validate_fixture(const FullFixture& f) {
  std::vector<FixtureViolation> out;
  auto flag = [&](FixtureViolation v) {
    if (std::ranges::find(out, v) == out.end()) out.push_back(v);
  };

  std::array<std::array<int, kTeams>, kTeams> count{};
  // venue[t][d]: +1 home, -1 away, 0 idle.
  std::array<std::array<int, kMatchdays>, kTeams> venue{};
  for (int d = 0; d < kMatchdays; ++d) {
    for (const auto& m : f[d]) {
      ++count[m.home.zero_based()][m.away.zero_based()];
      int& vh = venue[m.home.zero_based()][d];
      int& va = venue[m.away.zero_based()][d];
      if (vh != 0 || va != 0) flag(FixtureViolation::SlotTwiceInMatchday);
      vh = +1;
      va = -1;
    }
  }
  for (int h = 0; h < kTeams; ++h) {
    for (int a = 0; a < kTeams; ++a) {
      if (h == a) continue;
      if (count[h][a] > 1) flag(FixtureViolation::DuplicatePairing);
      if (count[h][a] == 0) flag(FixtureViolation::MissingPairing);
    }
  }
  for (int d = 0; d < 3; ++d) {
    const auto expect = mirrored(f[2 - d]);
    const auto& got = f[3 + d];
    const bool same = (got[0] == expect[0] && got[1] == expect[1]) || (got[0] == expect[1] && got[1] == expect[0]);
    if (!same) flag(FixtureViolation::MirrorViolation);
  }
  for (int t = 0; t < kTeams; ++t) {
    const auto& v = venue[t];
    for (int d = 0; d + 2 < kMatchdays; ++d) {
      if (v[d] == 1 && v[d + 1] == 1 && v[d + 2] == 1) flag(FixtureViolation::ThreeConsecutiveHome);
      if (v[d] == -1 && v[d + 1] == -1 && v[d + 2] == -1) flag(FixtureViolation::ThreeConsecutiveAway);
    }
    if (v[0] + v[1] != 0 || v[0] == 0) flag(FixtureViolation::OpeningVenueImbalance);
    if (v[4] + v[5] != 0 || v[4] == 0) flag(FixtureViolation::ClosingVenueImbalance);
  }
  return out;
}

/// Played matches of the first `k` matchdays, given a result for every
/// ordered pair (`results[home][away]`, 0-based).
inline std::vector<MatchRecord> played_prefix(const FullFixture& f,
                                              const std::array<std::array<Score, kTeams>, kTeams>& results, int k) {
  std::vector<MatchRecord> out;
  for (int d = 0; d < k; ++d) {
    for (const auto& m : f[d]) out.push_back(MatchRecord{m, results[m.home.zero_based()][m.away.zero_based()]});
  }
  return out;
}

}  // namespace stakeless
