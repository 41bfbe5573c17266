#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "stakeless/classify.hpp"
#include "stakeless/domain.hpp"
#include "stakeless/fit.hpp"
#include "stakeless/model.hpp"
#include "stakeless/montecarlo.hpp"
#include "stakeless/version.hpp"

namespace stakeless::io {

// CSV helpers -----------------------------------------------------------------

namespace detail {

inline std::string at_line(std::size_t line, std::string_view msg) {
  return "line " + std::to_string(line) + ": " + std::string(msg);
}

/// Splits one CSV record; double quotes may enclose commas and "" escapes.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  if (quoted) throw InvalidInput("unterminated quote");
  return out;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw InvalidInput(std::string(what) + " is not an integer");
  return v;
}

inline double parse_real(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " is not a number");
  }
  return v;
}

// Shortest text that parses back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace detail

// Match dataset -----------------------------------------------------------------

inline constexpr std::string_view kDatasetHeader =
    "season,home_name,away_name,home_pot,away_pot,home_coeff,away_coeff,home_goals,away_goals";

struct DatasetRow {
  std::string season;
  std::string home_name;
  std::string away_name;
  int home_pot = 1;
  int away_pot = 2;
  double home_coeff = 0.0;
  double away_coeff = 0.0;
  int home_goals = 0;
  int away_goals = 0;
  std::size_t line = 0;  // source line, 0 if not read from a file

  bool operator==(const DatasetRow& o) const {
    return season == o.season && home_name == o.home_name && away_name == o.away_name && home_pot == o.home_pot &&
           away_pot == o.away_pot && home_coeff == o.home_coeff && away_coeff == o.away_coeff &&
           home_goals == o.home_goals && away_goals == o.away_goals;
  }
};

/// Reads a dataset with the header line above. Errors name the line.
inline std::vector<DatasetRow> read_dataset(std::istream& in) {
  std::vector<DatasetRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kDatasetHeader) throw InvalidInput(detail::at_line(lineno, "expected header " + std::string(kDatasetHeader)));
      header = true;
      continue;
    }
    try {
      const auto f = detail::split_csv(line);
      if (f.size() != 9) throw InvalidInput("expected 9 fields, got " + std::to_string(f.size()));
      DatasetRow r;
      r.season = f[0];
      r.home_name = f[1];
      r.away_name = f[2];
      r.home_pot = detail::parse_int(f[3], "home_pot");
      r.away_pot = detail::parse_int(f[4], "away_pot");
      r.home_coeff = detail::parse_real(f[5], "home_coeff");
      r.away_coeff = detail::parse_real(f[6], "away_coeff");
      r.home_goals = detail::parse_int(f[7], "home_goals");
      r.away_goals = detail::parse_int(f[8], "away_goals");
      r.line = lineno;
      if (r.season.empty()) throw InvalidInput("season is empty");
      (void)PotSlot(r.home_pot);
      (void)PotSlot(r.away_pot);
      if (r.home_coeff < 0.0 || r.away_coeff < 0.0) throw InvalidInput("coefficients must be non-negative");
      (void)validated_score(r.home_goals, r.away_goals);
      rows.push_back(std::move(r));
    } catch (const InvalidInput& e) {
      throw InvalidInput(detail::at_line(lineno, e.what()));
    }
  }
  if (!header) throw InvalidInput("dataset is empty");
  return rows;
}

inline void write_dataset(std::ostream& out, std::span<const DatasetRow> rows) {
  out << kDatasetHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_field(r.season) << ',' << detail::csv_field(r.home_name) << ',' << detail::csv_field(r.away_name)
        << ',' << r.home_pot << ',' << r.away_pot << ',' << detail::format_real(r.home_coeff) << ','
        << detail::format_real(r.away_coeff) << ',' << r.home_goals << ',' << r.away_goals << '\n';
  }
}

/// Observations for a model family: pot-based and baseline models rate a
/// team by its pot, the others by its coefficient (which must be positive).
inline std::vector<MatchObservation> to_observations(std::span<const DatasetRow> rows, ModelFamily family) {
  const bool by_pot = is_pot_based(family) || family == ModelFamily::Baseline;
  std::vector<MatchObservation> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const double rh = by_pot ? r.home_pot : r.home_coeff;
    const double ra = by_pot ? r.away_pot : r.away_coeff;
    if (!by_pot && (rh <= 0.0 || ra <= 0.0)) {
      throw InvalidInput(detail::at_line(r.line, "coefficient-based models need positive coefficients"));
    }
    out.push_back(make_observation(r.season, rh, ra, Score{r.home_goals, r.away_goals}));
  }
  return out;
}

// Group state files -------------------------------------------------------------

/// Played matches of the first `matchdays` rounds plus the unplayed fixtures.
struct GroupState {
  int matchdays = 0;
  std::vector<MatchRecord> played;
  std::vector<Fixture> remaining;
};

/// Parses lines `MD<k>: <home>-<away> <h>:<a>` (played) or
/// `MD<k>: <home>-<away>` (unplayed). Blank lines and '#' comments are skipped.
/// Without unplayed lines the remaining fixtures are the missing pairs.
inline GroupState read_state(std::istream& in) {
  static const std::regex pattern(R"(^\s*MD([1-6])\s*:\s*([1-4])\s*-\s*([1-4])(?:\s+(\d+)\s*:\s*(\d+))?\s*$)");
  std::vector<std::vector<MatchRecord>> by_day(kMatchdays);
  std::vector<std::pair<int, Fixture>> unplayed;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::smatch m;
    if (!std::regex_match(line, m, pattern)) {
      throw InvalidInput(detail::at_line(lineno, "expected 'MD<k>: <home>-<away> [<h>:<a>]'"));
    }
    try {
      const int day = std::stoi(m[1]);
      const Fixture f(std::stoi(m[2]), std::stoi(m[3]));
      if (m[4].matched) {
        by_day[day - 1].push_back(MatchRecord{f, validated_score(std::stoi(m[4]), std::stoi(m[5]))});
      } else {
        unplayed.emplace_back(day, f);
      }
    } catch (const InvalidInput& e) {
      throw InvalidInput(detail::at_line(lineno, e.what()));
    } catch (const std::out_of_range&) {
      throw InvalidInput(detail::at_line(lineno, "goal count too large"));
    }
  }

  GroupState s;
  while (s.matchdays < kMatchdays && by_day[s.matchdays].size() == 2) ++s.matchdays;
  for (int d = s.matchdays; d < kMatchdays; ++d) {
    if (!by_day[d].empty()) {
      throw InvalidState("matchday " + std::to_string(d + 1) +
                         " has results but an earlier matchday is incomplete or it has more than two");
    }
  }
  std::vector<Matchday> days;
  for (int d = 0; d < s.matchdays; ++d) days.push_back({by_day[d][0], by_day[d][1]});
  try {
    const GroupResults results(days);
    s.played = results.prefix(static_cast<std::size_t>(s.matchdays));
  } catch (const InvalidInput& e) {
    throw InvalidState(e.what());
  }
  for (const auto& [day, f] : unplayed) {
    if (day <= s.matchdays) throw InvalidState("unplayed fixture listed on a completed matchday");
    s.remaining.push_back(f);
  }
  if (s.remaining.empty()) {
    s.remaining = stakeless::detail::missing_fixtures(s.played);
  } else {
    std::vector<MatchRecord> all = s.played;
    for (const auto& f : s.remaining) all.push_back(MatchRecord{f, Score{}});
    try {
      stakeless::detail::require_distinct_fixtures(all);
    } catch (const InvalidInput& e) {
      throw InvalidState(e.what());
    }
    if (all.size() != static_cast<std::size_t>(kMatches)) {
      throw InvalidState("played and unplayed fixtures must cover all twelve ordered pairs");
    }
  }
  return s;
}

// Reports -------------------------------------------------------------------------

struct Manifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string version = std::string(kVersion);
  double wall_clock_seconds = 0.0;
  std::string started_at;  // UTC, ISO 8601
};

inline nlohmann::ordered_json to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["started_at"] = m.started_at;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  return j;
}

inline nlohmann::ordered_json to_json(const MetricSet& m) {
  nlohmann::ordered_json j;
  for (int k = 0; k < kMetrics; ++k) {
    j[std::string("p_") + kMetricNames[k]] = m.p[k];
    j[std::string("se_") + kMetricNames[k]] = m.se[k];
    j[std::string("rank_") + kMetricNames[k]] = m.rank[k];
  }
  return j;
}

inline nlohmann::ordered_json to_json(const StakelessReport& rep, const std::vector<Dominance>& dominated) {
  nlohmann::ordered_json j;
  j["runs"] = rep.runs;
  j["seed"] = rep.seed;
  j["rule"] = to_string(rep.rule);
  j["counting"] = to_string(rep.counting);
  j["final_table_fallback_rate"] = rep.final_table_fallback_rate;
  j["strong_md5_matches"] = rep.strong_md5_total;
  j["md4_middle_positions_fixed"] = rep.md4_middle_fixed;
  j["early_states_audited"] = rep.early_audited;
  j["early_state_violations"] = rep.early_violations;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    nlohmann::ordered_json row;
    row["schedule"] = r.schedule.label();
    row["metrics"] = to_json(r.metrics(rep.counting));
    row["at_least_one"] = to_json(r.at_least_one);
    row["per_match"] = to_json(r.per_match);
    row["fallback_tie_rate"] = r.fallback_tie_rate;
    rows.push_back(std::move(row));
  }
  j["schedules"] = std::move(rows);
  auto dom = nlohmann::ordered_json::array();
  for (const auto& d : dominated) dom.push_back({{"dominated", d.dominated}, {"dominator", d.dominator}});
  j["dominated"] = std::move(dom);
  return j;
}

/// One row per schedule and counting mode.
inline void write_report_csv(std::ostream& out, const StakelessReport& rep) {
  out << "schedule,counting";
  for (const char* name : kMetricNames) out << ",p_" << name << ",se_" << name << ",rank_" << name;
  out << ",fallback_tie_rate\n";
  for (const auto& r : rep.rows) {
    for (auto mode : {CountingMode::AtLeastOnePerMatchday, CountingMode::PerMatchFraction}) {
      const auto& m = r.metrics(mode);
      out << r.schedule.label() << ',' << to_string(mode);
      for (int k = 0; k < kMetrics; ++k) {
        out << ',' << detail::format_real(m.p[k]) << ',' << detail::format_real(m.se[k]) << ',' << m.rank[k];
      }
      out << ',' << detail::format_real(r.fallback_tie_rate) << '\n';
    }
  }
}

inline void write_cost_curve_csv(std::ostream& out, const std::vector<CostCurve>& curves) {
  out << "schedule,r,cost\n";
  for (const auto& c : curves) {
    for (const auto& [r, cost] : c.points) {
      out << c.schedule << ',' << detail::format_real(r) << ',' << detail::format_real(cost) << '\n';
    }
  }
}

/// Flat key=value fit report.
inline std::string fit_report(const FitResult& fit, std::size_t observations) {
  std::ostringstream out;
  out << "family=" << to_string(fit.params.family) << '\n'
      << "observations=" << observations << '\n'
      << "log_likelihood=" << detail::format_real(fit.log_likelihood) << '\n'
      << "converged=" << (fit.converged ? "true" : "false") << '\n'
      << "iterations=" << fit.iterations << '\n';
  for (auto name : free_parameters(fit.params.family)) {
    out << name << '=' << detail::format_real(parameter(fit.params, name)) << '\n';
  }
  if (fit.bootstrap_ci) {
    out << "bootstrap_resamples=" << fit.bootstrap_ci->resamples << '\n'
        << "bootstrap_dropped=" << fit.bootstrap_ci->dropped << '\n';
    for (const auto& iv : fit.bootstrap_ci->intervals) {
      out << iv.name << "_ci_lower=" << detail::format_real(iv.lower) << '\n'
          << iv.name << "_ci_upper=" << detail::format_real(iv.upper) << '\n';
    }
  }
  return out.str();
}

}  // namespace stakeless::io
