#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "stakeless/io.hpp"
#include "stakeless/schedule.hpp"

using namespace stakeless;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("stakeless_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static fs::path path(const std::string& name) { return dir_ / name; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static CliResult run(const std::string& args) {
    const auto out = path("stdout.txt");
    const auto err = path("stderr.txt");
    const std::string cmd =
        std::string(STAKELESS_CLI_PATH) + " " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string data(const std::string& name) { return std::string(STAKELESS_TEST_DATA) + "/" + name; }

  static inline fs::path dir_;
};

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST_F(Cli, SynthCorpusSizeAndDeterminism) {
  const auto a = path("synth_a.csv");
  const auto b = path("synth_b.csv");
  ASSERT_EQ(run("synth --out " + a.string() + " --seasons 17 --seed 42").code, 0);
  ASSERT_EQ(run("synth --out " + b.string() + " --seasons 17 --seed 42").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  std::ifstream in(a);
  const auto rows = io::read_dataset(in);
  ASSERT_EQ(rows.size(), 1632u);
  int goalless = 0;
  for (const auto& r : rows) goalless += r.home_goals == 0 && r.away_goals == 0;
  // Expected 103 with binomial standard deviation about 9.8.
  EXPECT_NEAR(goalless, 103.0, 3 * 9.8);
  ASSERT_EQ(run("synth --out " + b.string() + " --seasons 17 --seed 43").code, 0);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST_F(Cli, FitRoundTripWithBootstrap) {
  const auto csv = path("big.csv");
  ASSERT_EQ(run("synth --out " + csv.string() + " --seasons 209 --seed 7").code, 0);
  const auto out = path("fit");
  const auto r = run("fit --data " + csv.string() + " --family 4p-pot --bootstrap 200 --threads 4 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(slurp(out / "fit_report.txt"));
  EXPECT_GE(std::stoi(kv.at("observations")), 20000);
  EXPECT_NEAR(std::stod(kv.at("alpha_h")), 0.424, 0.02);
  EXPECT_NEAR(std::stod(kv.at("beta_h")), -0.169, 0.02);
  EXPECT_LT(std::stod(kv.at("alpha_h_ci_lower")), std::stod(kv.at("alpha_h_ci_upper")));
  const auto params = params_from_key_value(slurp(out / "params.txt"));
  EXPECT_EQ(params.family, ModelFamily::FourPPot);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST_F(Cli, FitInputErrors) {
  const auto r = run("fit --data " + data("pot5.csv") + " --out " + path("bad").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;

  const auto small = path("small.csv");
  ASSERT_EQ(run("synth --out " + small.string() + " --seasons 1 --seed 1").code, 0);
  std::ifstream in(small);
  auto rows = io::read_dataset(in);
  rows.resize(40);
  std::ofstream(path("forty.csv")) << [&] {
    std::ostringstream s;
    io::write_dataset(s, rows);
    return s.str();
  }();
  EXPECT_EQ(run("fit --data " + path("forty.csv").string() + " --out " + path("f40").string()).code, 3);
  EXPECT_EQ(run("fit --data " + small.string() + " --family nonsense --out " + path("f").string()).code, 2);
  EXPECT_EQ(run("fit --out x").code, 2);
}

TEST_F(Cli, EvaluateWritesMetrics) {
  const auto csv = path("eval.csv");
  ASSERT_EQ(run("synth --out " + csv.string() + " --seasons 17 --seed 3").code, 0);
  const auto out = path("eval");
  const auto r = run("evaluate --data " + csv.string() + " --params 4p-pot --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = slurp(out / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')),
            "model,group,matches,hit_probability,distance_score,distance_score_outcome");
  EXPECT_NE(metrics.find("baseline,all,1632,"), std::string::npos);
  EXPECT_NE(metrics.find("4p-pot,2003-04,96,"), std::string::npos);
  EXPECT_EQ(run("evaluate --data " + csv.string() + " --params 4p-pot --pi 0.4 --out " + out.string()).code, 2);
}

TEST_F(Cli, ClassifyGroupC) {
  const auto r = run("classify --state " + data("group_c_md5.txt") + " --oracle");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pot 1: fixed at 2"), std::string::npos);
  EXPECT_NE(r.out.find("pot 2: fixed at 3"), std::string::npos);
  EXPECT_NE(r.out.find("pot 3: fixed at 1"), std::string::npos);
  EXPECT_NE(r.out.find("pot 4: fixed at 4"), std::string::npos);
  EXPECT_NE(r.out.find("3-1: strongly-stakeless"), std::string::npos);
  EXPECT_NE(r.out.find("2-4: strongly-stakeless"), std::string::npos);
  EXPECT_NE(r.out.find("oracle: agrees"), std::string::npos);
}

TEST_F(Cli, ClassifyThreeMatchdays) {
  const auto r = run("classify --state " + data("lopsided_md3.txt") + " --oracle");
  ASSERT_EQ(r.code, 0) << r.err;
  for (int t = 1; t <= 4; ++t) EXPECT_NE(r.out.find("pot " + std::to_string(t) + ": open"), std::string::npos);
  EXPECT_EQ(r.out.find("stakeless"), std::string::npos);
  EXPECT_NE(r.out.find("oracle: agrees"), std::string::npos);
}

TEST_F(Cli, ClassifyRejectsInconsistentState) {
  EXPECT_EQ(run("classify --state " + data("pair_twice.txt")).code, 2);
  EXPECT_EQ(run("classify --state " + path("missing.txt").string()).code, 2);
  EXPECT_EQ(run("classify --state " + data("group_c_md5.txt") + " --rule coin-toss").code, 2);
}

TEST_F(Cli, ClassifyAgreesWithOracleOnRandomStates) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> goals(0, 4);
  int disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& spec = kSchedules[i % kScheduleCount];
    const auto cal = expand_fixture(spec);
    const int played = 4 + i % 2;
    std::ostringstream s;
    for (int d = 0; d < kMatchdays; ++d) {
      for (const auto& f : cal[d]) {
        s << "MD" << d + 1 << ": " << f.home.index() << '-' << f.away.index();
        if (d < played) s << ' ' << goals(rng) << ':' << goals(rng);
        s << '\n';
      }
    }
    const auto file = path("state.txt");
    std::ofstream(file) << s.str();
    const auto rule = i % 4 < 2 ? "head-to-head" : "goal-difference";
    const auto r = run("classify --oracle --rule " + std::string(rule) + " --state " + file.string());
    ASSERT_NE(r.code, 2) << r.err;
    disagreements += r.code != 0;
  }
  EXPECT_EQ(disagreements, 0);
}

TEST_F(Cli, SimulateSubsetAndDeterminism) {
  const auto a = path("sim_a");
  const auto b = path("sim_b");
  const std::string args = "simulate --runs 1000 --schedules 4112,4113 --threads 2 --out ";
  ASSERT_EQ(run(args + a.string()).code, 0);
  ASSERT_EQ(run(args + b.string()).code, 0);
  const auto csv = slurp(a / "report.csv");
  EXPECT_EQ(csv, slurp(b / "report.csv"));
  EXPECT_EQ(slurp(a / "cost_curve.csv"), slurp(b / "cost_curve.csv"));
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 1 + 2 * 2);
  const auto json = nlohmann::json::parse(slurp(a / "report.json"));
  EXPECT_EQ(json["schedules"].size(), 2u);
  EXPECT_EQ(json["manifest"]["seed"], 42);
  EXPECT_TRUE(fs::exists(a / "manifest.json"));
}

TEST_F(Cli, SimulateStrongColumnAtDeskScale) {
  const auto out = path("sim_desk");
  const auto r = run("simulate --runs 100000 --threads 4 --schedules 4113 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto json = nlohmann::json::parse(slurp(out / "report.json"));
  const double strong = json["schedules"][0]["per_match"]["p_strong_md6"];
  EXPECT_NEAR(strong, 0.0722, 0.007);
}

TEST_F(Cli, SimulateRejectsUnknownSchedule) {
  const auto r = run("simulate --runs 10 --schedules 1234 --out " + path("sim_bad").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("4113"), std::string::npos) << r.err;
  EXPECT_EQ(run("simulate --runs 0").code, 2);
  EXPECT_EQ(run("simulate --runs 10 --model 9p-pot").code, 2);
}
