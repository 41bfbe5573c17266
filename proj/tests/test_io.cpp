#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "stakeless/io.hpp"

using namespace stakeless;

namespace {

std::string data_file(const std::string& name) { return std::string(STAKELESS_TEST_DATA) + "/" + name; }

io::GroupState state_from(const std::string& text) {
  std::istringstream in(text);
  return io::read_state(in);
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Dataset, RoundTrip) {
  std::vector<io::DatasetRow> rows{
      {"2003-04", "Alpha, FC", "Beta \"B\"", 1, 4, 120.5, 7.25, 3, 0, 0},
      {"2004-05", "Gamma", "Delta", 3, 2, 0.1, 1e-3, 0, 99, 0},
  };
  std::ostringstream out;
  io::write_dataset(out, rows);
  std::istringstream in(out.str());
  const auto back = io::read_dataset(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], rows[0]);
  EXPECT_EQ(back[1], rows[1]);
  EXPECT_EQ(back[0].line, 2u);
  std::ostringstream again;
  io::write_dataset(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Dataset, ErrorsNameTheLine) {
  std::ifstream f(data_file("pot5.csv"));
  ASSERT_TRUE(f);
  const auto msg = message_of([&] { io::read_dataset(f); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;

  const std::string header(io::kDatasetHeader);
  for (const std::string bad : {"s,a,b,1,2,1,1,x,0", "s,a,b,1,2,1,1,-1,0", "s,a,b,1,2,1,1,0", ",a,b,1,2,1,1,0,0"}) {
    std::istringstream in(header + "\n" + bad + "\n");
    const auto m = message_of([&] { io::read_dataset(in); });
    EXPECT_NE(m.find("line 2"), std::string::npos) << bad << ": " << m;
  }
  std::istringstream no_header("s,a,b,1,2,1,1,0,0\n");
  EXPECT_THROW(io::read_dataset(no_header), InvalidInput);
}

TEST(Dataset, ObservationsByFamily) {
  const std::vector<io::DatasetRow> rows{{"s", "a", "b", 1, 3, 80.0, 0.0, 1, 1, 7}};
  const auto pot = io::to_observations(rows, ModelFamily::FourPPot);
  EXPECT_EQ(pot[0].home_rating.value(), 1.0);
  EXPECT_EQ(pot[0].away_rating.value(), 3.0);
  try {
    io::to_observations(rows, ModelFamily::FourPCoeff);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(State, GroupCFile) {
  std::ifstream f(data_file("group_c_md5.txt"));
  const auto s = io::read_state(f);
  EXPECT_EQ(s.matchdays, 5);
  EXPECT_EQ(s.played.size(), 10u);
  ASSERT_EQ(s.remaining.size(), 2u);
  EXPECT_EQ(s.remaining[0], Fixture(3, 1));
  EXPECT_EQ(s.remaining[1], Fixture(2, 4));
  EXPECT_EQ(s.played[1].score, (Score{1, 5}));
}

TEST(State, MissingFixturesInferred) {
  const auto s = state_from("MD1: 1-2 1:0\nMD1: 3-4 0:0\n");
  EXPECT_EQ(s.matchdays, 1);
  EXPECT_EQ(s.remaining.size(), 10u);
}

TEST(State, Rejections) {
  std::ifstream twice(data_file("pair_twice.txt"));
  EXPECT_THROW(io::read_state(twice), InvalidState);
  // Matchday 3 played while matchday 2 is incomplete.
  EXPECT_THROW(state_from("MD1: 1-2 1:0\nMD1: 3-4 0:0\nMD3: 1-3 0:0\nMD3: 2-4 0:0\n"), InvalidState);
  // Team twice on one matchday.
  EXPECT_THROW(state_from("MD1: 1-2 1:0\nMD1: 1-3 0:0\n"), InvalidState);
  // Unplayed list that does not complete the calendar.
  EXPECT_THROW(state_from("MD1: 1-2 1:0\nMD1: 3-4 0:0\nMD2: 2-1\n"), InvalidState);
  const auto m = message_of([] { state_from("MD1: 1-2 1:0\nMD7: 3-4\n"); });
  EXPECT_NE(m.find("line 2"), std::string::npos) << m;
  EXPECT_THROW(state_from("MD1: 1-1 1:0\n"), InvalidInput);
}

TEST(Reports, CsvLayout) {
  const auto rep = report_from_probabilities({{"4112", {0.0284, 0.2692, 0.0968}}, {"4113", {0.0397, 0.3334, 0.0722}}},
                                             1'000'000);
  std::ostringstream out;
  io::write_report_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "schedule,counting,p_weak_md5,se_weak_md5,rank_weak_md5,p_weak_md6,se_weak_md6,rank_weak_md6,"
            "p_strong_md6,se_strong_md6,rank_strong_md6,fallback_tie_rate");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 4);

  std::ostringstream curve;
  io::write_cost_curve_csv(curve, cost_curve(rep, 1.0, {1.0}));
  EXPECT_NE(curve.str().find("4112,1,0.3944"), std::string::npos) << curve.str();
}

TEST(Reports, Json) {
  const auto rep = report_from_probabilities({{"4112", {0.0284, 0.2692, 0.0968}}, {"4113", {0.0397, 0.3334, 0.0722}}},
                                             1000);
  const auto j = io::to_json(rep, find_dominated(rep));
  EXPECT_EQ(j["schedules"].size(), 2u);
  EXPECT_TRUE(j["dominated"].is_array());
  io::Manifest m{"simulate", {{"runs", 1000}}, 42, "0.1.0", 1.5, "2026-01-01T00:00:00Z"};
  const auto mj = io::to_json(m);
  EXPECT_EQ(mj["seed"], 42);
  EXPECT_EQ(mj["command"], "simulate");
}

TEST(Reports, FitReportKeys) {
  FitResult r;
  r.params = presets::four_p_pot();
  r.converged = true;
  r.bootstrap_ci = BootstrapSummary{{{"alpha_h", 0.4, 0.45}}, 200, 0};
  const auto text = io::fit_report(r, 1632);
  EXPECT_NE(text.find("observations=1632\n"), std::string::npos);
  EXPECT_NE(text.find("alpha_h=0.424\n"), std::string::npos);
  EXPECT_NE(text.find("alpha_h_ci_lower=0.4\n"), std::string::npos);
  EXPECT_EQ(text.find("gamma_h"), std::string::npos);
}
