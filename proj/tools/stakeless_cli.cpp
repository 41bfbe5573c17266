// Command-line driver: simulate, fit, evaluate, classify, synth.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stakeless/classify.hpp"
#include "stakeless/fit.hpp"
#include "stakeless/io.hpp"
#include "stakeless/model.hpp"
#include "stakeless/montecarlo.hpp"
#include "stakeless/schedule.hpp"

namespace fs = std::filesystem;
using namespace stakeless;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInputError = 2, kInsufficientData = 3, kNonConvergence = 4 };

class NonConvergence : public Error {
 public:
  using Error::Error;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

std::vector<io::DatasetRow> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return io::read_dataset(in);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

TieBreakRule parse_rule(const std::string& s) {
  if (s == "head-to-head") return TieBreakRule::HeadToHead;
  if (s == "goal-difference") return TieBreakRule::GoalDifference;
  throw InvalidInput("unknown rule '" + s + "' (head-to-head, goal-difference)");
}

CountingMode parse_counting(const std::string& s) {
  if (s == "at-least-one") return CountingMode::AtLeastOnePerMatchday;
  if (s == "per-match") return CountingMode::PerMatchFraction;
  throw InvalidInput("unknown counting mode '" + s + "' (at-least-one, per-match)");
}

std::vector<ScheduleSpec> parse_schedules(const std::string& s) {
  if (s == "all") return enumerate_schedules();
  std::vector<ScheduleSpec> out;
  std::stringstream in(s);
  std::string label;
  while (std::getline(in, label, ',')) out.push_back(parse_schedule_label(label));
  if (out.empty()) throw InvalidInput("no schedules given");
  return out;
}

/// Preset name or a key=value parameter file.
ModelParams load_params(const std::string& spec) {
  if (fs::exists(spec)) return params_from_key_value(slurp(spec));
  return presets::for_family(parse_family(spec));
}

unsigned threads_from_env(unsigned fallback) {
  if (const char* v = std::getenv("STAKELESS_THREADS")) {
    try {
      const int n = std::stoi(v);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw InvalidInput("STAKELESS_THREADS must be a positive integer");
  }
  return fallback;
}

void write_manifest(const fs::path& dir, const io::Manifest& m) {
  auto out = open_out(dir / "manifest.json");
  out << io::to_json(m).dump(2) << '\n';
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::uint64_t runs = 1'000'000;
  std::uint64_t seed = 42;
  std::string model = "4p-pot";
  std::string rule = "head-to-head";
  std::string schedules = "all";
  std::string counting = "per-match";
  std::vector<double> ratings{1.0, 2.0, 3.0, 4.0};
  unsigned threads = 0;
  std::uint64_t audit = 0;
  double w5 = 1.0;
  double r_max = 10.0;
  double r_step = 0.1;
  std::string out = "out";
};

int run_simulate(const SimulateArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  io::Manifest man{"simulate", {}, a.seed, std::string(kVersion), 0.0, utc_now()};

  SimulationConfig cfg;
  cfg.runs = a.runs;
  cfg.seed = a.seed;
  cfg.rule = parse_rule(a.rule);
  cfg.params = load_params(a.model);
  if (a.ratings.size() != kTeams) throw InvalidInput("--ratings needs four values");
  std::copy(a.ratings.begin(), a.ratings.end(), cfg.ratings.begin());
  cfg.schedules = parse_schedules(a.schedules);
  cfg.counting = parse_counting(a.counting);
  cfg.threads = a.threads > 0 ? a.threads : threads_from_env(1);
  cfg.early_audit_runs = a.audit;
  if (!(a.r_step > 0.0) || a.r_max < 0.0 || a.w5 < 0.0) throw InvalidInput("cost weights must be non-negative");

  const auto rep = run_simulation(cfg);
  if (rep.strong_md5_total != 0) throw InvalidState("strongly stakeless matchday-5 game found");
  const auto dominated = rep.rows.size() >= 2 ? find_dominated(rep) : std::vector<Dominance>{};
  std::vector<double> rs;
  for (int i = 0; i * a.r_step <= a.r_max + 1e-9; ++i) rs.push_back(i * a.r_step);
  const auto curves = cost_curve(rep, a.w5, rs);

  man.config = {{"runs", a.runs},         {"seed", a.seed},     {"model", a.model},
                {"params", to_key_value(cfg.params)},          {"rule", a.rule},
                {"schedules", a.schedules}, {"counting", a.counting}, {"ratings", a.ratings},
                {"threads", cfg.threads},  {"audit_runs", a.audit}, {"w5", a.w5},
                {"r_max", a.r_max},        {"r_step", a.r_step}};
  man.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(a.out);
  auto json = io::to_json(rep, dominated);
  json["manifest"] = io::to_json(man);
  open_out(dir / "report.json") << json.dump(2) << '\n';
  auto csv = open_out(dir / "report.csv");
  io::write_report_csv(csv, rep);
  auto cc = open_out(dir / "cost_curve.csv");
  io::write_cost_curve_csv(cc, curves);
  write_manifest(dir, man);

  std::cout << "schedule  weak_md5  weak_md6  strong_md6   (" << to_string(rep.counting) << ", " << rep.runs
            << " runs)\n";
  std::cout << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& m = rep.metrics(i);
    std::cout << rep.rows[i].schedule.label() << "      " << std::setw(6) << 100 * m.p[0] << "    " << std::setw(6)
              << 100 * m.p[1] << "    " << std::setw(6) << 100 * m.p[2] << '\n';
  }
  for (const auto& d : dominated) std::cout << d.dominated << " is dominated by " << d.dominator << '\n';
  std::cout << "wrote " << (dir / "report.json").string() << '\n';
  return kOk;
}

// fit --------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string family = "4p-pot";
  int bootstrap = 0;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::string out = "out";
};

int run_fit(const FitArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelFamily family = parse_family(a.family);
  if (family == ModelFamily::Baseline) throw UnsupportedFamily("the baseline model is not fitted; use evaluate");
  const auto rows = load_dataset(a.data);
  const auto obs = io::to_observations(rows, family);
  auto fit = fit_mle(obs, family);
  if (a.bootstrap > 0) {
    fit.bootstrap_ci = bootstrap_ci(obs, family, a.bootstrap, a.seed, a.threads > 0 ? a.threads : threads_from_env(1));
  }

  const fs::path dir(a.out);
  open_out(dir / "params.txt") << to_key_value(fit.params);
  open_out(dir / "fit_report.txt") << io::fit_report(fit, obs.size());
  io::Manifest man{"fit", {}, a.seed, std::string(kVersion), 0.0, utc_now()};
  man.config = {{"data", a.data}, {"family", a.family}, {"bootstrap", a.bootstrap}, {"seed", a.seed}};
  man.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, man);

  std::cout << io::fit_report(fit, obs.size());
  if (!fit.converged) throw NonConvergence("maximum likelihood did not converge; best parameters written");
  return kOk;
}

// evaluate ---------------------------------------------------------------------

struct EvaluateArgs {
  std::string data;
  std::string params;
  double pi = 0.9;
  std::string out = "out";
};

int run_evaluate(const EvaluateArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  require_pi(a.pi);
  const ModelParams params = load_params(a.params);
  const auto rows = load_dataset(a.data);
  if (rows.size() < kMinFitObservations) {
    throw InsufficientData("evaluation needs at least " + std::to_string(kMinFitObservations) + " matches");
  }
  const auto obs = io::to_observations(rows, params.family);
  std::vector<Score> scores;
  for (const auto& o : obs) scores.push_back(o.score);

  const std::vector<std::pair<std::string, Predictor>> models{
      {to_string(params.family), Predictor(params)},
      {"baseline", Predictor(BaselineTable::from_scores(scores))},
  };

  nlohmann::ordered_json json = nlohmann::ordered_json::array();
  const fs::path dir(a.out);
  auto csv = open_out(dir / "metrics.csv");
  csv << "model,group,matches,hit_probability,distance_score,distance_score_outcome\n";
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& [name, pred] : models) {
    const auto hit = avg_hit_probability(pred, obs);
    const auto ds = avg_distance(pred, obs, DistanceMetric::Score, a.pi);
    const auto dso = avg_distance(pred, obs, DistanceMetric::ScoreAndOutcome, a.pi);
    for (std::size_t i = 0; i < hit.size(); ++i) {
      csv << name << ',' << io::detail::csv_field(hit[i].group) << ',' << hit[i].matches << ','
          << io::detail::format_real(hit[i].value) << ',' << io::detail::format_real(ds[i].value) << ','
          << io::detail::format_real(dso[i].value) << '\n';
      json.push_back({{"model", name},
                      {"group", hit[i].group},
                      {"matches", hit[i].matches},
                      {"hit_probability", hit[i].value},
                      {"distance_score", ds[i].value},
                      {"distance_score_outcome", dso[i].value}});
      if (hit[i].group == kPooledGroup) {
        std::cout << std::setw(10) << name << "  hit " << hit[i].value << "  distance " << ds[i].value
                  << "  distance+outcome " << dso[i].value << '\n';
      }
    }
  }
  io::Manifest man{"evaluate", {}, 0, std::string(kVersion), 0.0, utc_now()};
  man.config = {{"data", a.data}, {"params", a.params}, {"pi", a.pi}};
  man.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json report{{"metrics", json}, {"manifest", io::to_json(man)}};
  open_out(dir / "metrics.json") << report.dump(2) << '\n';
  write_manifest(dir, man);
  return kOk;
}

// classify ---------------------------------------------------------------------

struct ClassifyArgs {
  std::string state;
  std::string rule = "head-to-head";
  bool oracle = false;
};

int run_classify(const ClassifyArgs& a) {
  const TieBreakRule rule = parse_rule(a.rule);
  std::ifstream in(a.state);
  if (!in) throw InvalidInput("cannot open " + a.state);
  const auto st = io::read_state(in);

  Fixedness fixed;
  if (st.matchdays == 4) {
    fixed = fixed_after_md4(st.played, rule);
  } else if (st.matchdays == 5) {
    if (st.remaining.size() != 2) throw InvalidState("after five matchdays exactly two fixtures remain");
    fixed = fixed_after_md5(GroupAggregate(st.played), std::span<const Fixture, 2>(st.remaining.data(), 2), rule);
  } else if (st.matchdays == kMatchdays) {
    const auto table = compute_table(st.played, rule);
    for (int p = 0; p < kTeams; ++p) fixed.fix(table.rows[p].slot, p + 1);
  }
  // Three or fewer matchdays: nothing can be settled yet.

  std::cout << "matchdays played: " << st.matchdays << " (" << to_string(rule) << ")\n";
  for (int t = 1; t <= kTeams; ++t) {
    const auto pos = fixed.position(PotSlot(t));
    std::cout << "pot " << t << ": " << (pos ? "fixed at " + std::to_string(*pos) : std::string("open")) << '\n';
  }
  for (const auto& f : st.remaining) {
    std::cout << f.home.index() << '-' << f.away.index() << ": " << to_string(classify_match(fixed, f)) << '\n';
  }
  if (a.oracle) {
    const auto brute = fixed_oracle(st.played, st.remaining, rule);
    if (brute == fixed) {
      std::cout << "oracle: agrees\n";
    } else {
      std::cout << "oracle: DISAGREES\n";
      return kFailure;
    }
  }
  return kOk;
}

// synth ------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int seasons = 17;
  std::uint64_t seed = 42;
  std::string params = "4p-pot";
  int first_season = 2003;
};

// Coefficient band per pot for synthetic clubs.
constexpr std::array<std::array<double, 2>, kTeams> kCoeffBand{{{80.0, 140.0}, {40.0, 80.0}, {15.0, 40.0}, {5.0, 15.0}}};

int run_synth(const SynthArgs& a) {
  if (a.seasons < 1) throw InvalidInput("--seasons must be positive");
  const ModelParams params = load_params(a.params);
  std::vector<io::DatasetRow> rows;
  constexpr int kGroups = 8;
  for (int s = 0; s < a.seasons; ++s) {
    std::ostringstream season;
    season << a.first_season + s << '-' << std::setw(2) << std::setfill('0') << (a.first_season + s + 1) % 100;
    for (int g = 0; g < kGroups; ++g) {
      RandomStream rng = RandomStream::derived(a.seed, static_cast<std::uint64_t>(s * kGroups + g));
      std::array<double, kTeams> coeff{};
      for (int t = 0; t < kTeams; ++t) {
        const auto [lo, hi] = kCoeffBand[t];
        coeff[t] = std::round((lo + (hi - lo) * rng.uniform()) * 1000.0) / 1000.0;
      }
      const char group = static_cast<char>('A' + g);
      for (int h = 0; h < kTeams; ++h) {
        for (int aw = 0; aw < kTeams; ++aw) {
          if (h == aw) continue;
          const bool by_pot = is_pot_based(params.family);
          const Rating rh(by_pot ? h + 1.0 : coeff[h]);
          const Rating ra(by_pot ? aw + 1.0 : coeff[aw]);
          const Score sc = sample_score(params, rh, ra, rng);
          io::DatasetRow r;
          r.season = season.str();
          r.home_name = std::string("G") + group + "-P" + std::to_string(h + 1);
          r.away_name = std::string("G") + group + "-P" + std::to_string(aw + 1);
          r.home_pot = h + 1;
          r.away_pot = aw + 1;
          r.home_coeff = coeff[h];
          r.away_coeff = coeff[aw];
          r.home_goals = std::min(sc.home_goals, kMaxGoals);
          r.away_goals = std::min(sc.away_goals, kMaxGoals);
          rows.push_back(std::move(r));
        }
      }
    }
  }
  auto out = open_out(a.out);
  io::write_dataset(out, rows);
  std::cout << "wrote " << rows.size() << " matches to " << a.out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stakeless-game analysis for four-team double round-robin groups"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Estimate stakeless-game probabilities per schedule");
  s->add_option("--runs", sim.runs, "Simulated group stages")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--model", sim.model, "Model preset name or parameter file")->capture_default_str();
  s->add_option("--rule", sim.rule, "head-to-head or goal-difference")->capture_default_str();
  s->add_option("--schedules", sim.schedules, "'all' or comma-separated labels")->capture_default_str();
  s->add_option("--counting", sim.counting, "per-match or at-least-one")->capture_default_str();
  s->add_option("--ratings", sim.ratings, "Rating of the team from each pot")->expected(4)->delimiter(',');
  s->add_option("--threads", sim.threads, "Worker threads (default: STAKELESS_THREADS or 1)");
  s->add_option("--audit", sim.audit, "Runs whose three-matchday states are checked by enumeration")
      ->capture_default_str();
  s->add_option("--w5", sim.w5, "Cost of a weakly stakeless matchday-5 game")->capture_default_str();
  s->add_option("--r-max", sim.r_max, "Largest strong/weak cost ratio in cost_curve.csv")->capture_default_str();
  s->add_option("--r-step", sim.r_step, "Cost ratio step in cost_curve.csv")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory")->capture_default_str();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Maximum-likelihood fit of a scoring model");
  f->add_option("--data", fit.data, "Dataset CSV")->required();
  f->add_option("--family", fit.family, "6p-coeff, 4p-coeff, 6p-pot, 4p-pot or bivariate")->capture_default_str();
  f->add_option("--bootstrap", fit.bootstrap, "Bootstrap resamples (0 = none, else >= 100)")->capture_default_str();
  f->add_option("--seed", fit.seed, "Bootstrap seed")->capture_default_str();
  f->add_option("--threads", fit.threads, "Worker threads (default: STAKELESS_THREADS or 1)");
  f->add_option("--out", fit.out, "Output directory")->capture_default_str();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Hit probability and distance metrics against the empirical baseline");
  e->add_option("--data", ev.data, "Dataset CSV")->required();
  e->add_option("--params", ev.params, "Parameter file or preset name")->required();
  e->add_option("--pi", ev.pi, "Weight of a shared goal, in (1/2, 1)")->capture_default_str();
  e->add_option("--out", ev.out, "Output directory")->capture_default_str();

  ClassifyArgs cl;
  auto* c = app.add_subcommand("classify", "Fixed positions and stakeless remaining games of a group state");
  c->add_option("--state", cl.state, "State file")->required();
  c->add_option("--rule", cl.rule, "head-to-head or goal-difference")->capture_default_str();
  c->add_flag("--oracle", cl.oracle, "Cross-check against exhaustive enumeration");

  SynthArgs sy;
  auto* y = app.add_subcommand("synth", "Write a synthetic match dataset");
  y->add_option("--out", sy.out, "Output CSV")->required();
  y->add_option("--seasons", sy.seasons, "Seasons of 8 groups")->capture_default_str();
  y->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
  y->add_option("--params", sy.params, "Parameter file or preset name")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*s) return run_simulate(sim);
    if (*f) return run_fit(fit);
    if (*e) return run_evaluate(ev);
    if (*c) return run_classify(cl);
    if (*y) return run_synth(sy);
  } catch (const InsufficientData& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInsufficientData;
  } catch (const NonConvergence& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kNonConvergence;
  } catch (const BootstrapUnstable& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kNonConvergence;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInputError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kOk;
}
