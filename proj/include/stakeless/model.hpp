#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stakeless/domain.hpp"
#include "stakeless/random.hpp"

namespace stakeless {

enum class ModelFamily { SixPCoeff, FourPCoeff, SixPPot, FourPPot, BivariateCoeff, Baseline };

inline const char* to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::SixPCoeff: return "6p-coeff";
    case ModelFamily::FourPCoeff: return "4p-coeff";
    case ModelFamily::SixPPot: return "6p-pot";
    case ModelFamily::FourPPot: return "4p-pot";
    case ModelFamily::BivariateCoeff: return "bivariate";
    case ModelFamily::Baseline: return "baseline";
  }
  return "?";
}

inline ModelFamily parse_family(std::string_view name) {
  for (auto f : {ModelFamily::SixPCoeff, ModelFamily::FourPCoeff, ModelFamily::SixPPot, ModelFamily::FourPPot,
                 ModelFamily::BivariateCoeff, ModelFamily::Baseline}) {
    if (name == to_string(f)) return f;
  }
  throw InvalidInput("unknown model family '" + std::string(name) + "'");
}

constexpr bool is_pot_based(ModelFamily f) { return f == ModelFamily::SixPPot || f == ModelFamily::FourPPot; }
constexpr bool has_gamma(ModelFamily f) {
  return f == ModelFamily::SixPCoeff || f == ModelFamily::SixPPot || f == ModelFamily::BivariateCoeff;
}
constexpr bool is_bivariate(ModelFamily f) { return f == ModelFamily::BivariateCoeff; }

/// Team strength fed to the rate equations: a club coefficient, or for
/// pot-based families the pot index itself.
class Rating {
 public:
  explicit Rating(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidInput("rating must be positive");
  }
  static Rating from_pot(PotSlot s) { return Rating(s.index()); }

  double value() const { return value_; }

 private:
  double value_;
};

/// log(rate_home) = alpha_h + beta_h * (R_home - gamma_h * R_away)
/// log(rate_away) = alpha_a + beta_a * (R_away - gamma_a * R_home)
/// plus a shared Poisson component `c` for the bivariate family.
struct ModelParams {
  ModelFamily family = ModelFamily::FourPPot;
  double alpha_h = 0.0;
  double alpha_a = 0.0;
  double beta_h = 0.0;
  double beta_a = 0.0;
  double gamma_h = 1.0;
  double gamma_a = 1.0;
  double c = 0.0;

  void validate() const {
    if (!(c >= 0.0)) throw InvalidParameter("covariance parameter c must be non-negative");
    if (!is_bivariate(family) && c != 0.0) throw InvalidParameter("c must be zero for independent families");
    if (!has_gamma(family) && (gamma_h != 1.0 || gamma_a != 1.0)) {
      throw InvalidParameter("gamma is fixed to 1 in four-parameter families");
    }
  }

  bool operator==(const ModelParams&) const = default;
};

namespace presets {

// Published point estimates (1632 group matches, 2003/04 to 2019/20).
inline ModelParams six_p_coeff() { return {ModelFamily::SixPCoeff, 0.335, 0.087, 0.006, 0.006, 0.833, 0.963, 0.0}; }
inline ModelParams four_p_coeff() { return {ModelFamily::FourPCoeff, 0.409, 0.102, 0.006, 0.006, 1.0, 1.0, 0.0}; }
inline ModelParams six_p_pot() { return {ModelFamily::SixPPot, 0.464, 0.143, -0.177, -0.182, 0.910, 0.922, 0.0}; }
inline ModelParams four_p_pot() { return {ModelFamily::FourPPot, 0.424, 0.108, -0.169, -0.175, 1.0, 1.0, 0.0}; }
inline ModelParams bivariate_coeff() {
  return {ModelFamily::BivariateCoeff, 0.335, 0.087, 0.006, 0.006, 0.833, 0.963, std::exp(-12.458)};
}

inline ModelParams for_family(ModelFamily f) {
  switch (f) {
    case ModelFamily::SixPCoeff: return six_p_coeff();
    case ModelFamily::FourPCoeff: return four_p_coeff();
    case ModelFamily::SixPPot: return six_p_pot();
    case ModelFamily::FourPPot: return four_p_pot();
    case ModelFamily::BivariateCoeff: return bivariate_coeff();
    case ModelFamily::Baseline: break;
  }
  throw UnsupportedFamily("the baseline model has no parametric preset");
}

}  // namespace presets

struct Rates {
  double home = 0.0;
  double away = 0.0;
};

inline Rates rates(const ModelParams& p, Rating r_home, Rating r_away) {
  if (p.family == ModelFamily::Baseline) throw UnsupportedFamily("baseline model has no scoring rates");
  const double rh = r_home.value();
  const double ra = r_away.value();
  return {std::exp(p.alpha_h + p.beta_h * (rh - p.gamma_h * ra)), std::exp(p.alpha_a + p.beta_a * (ra - p.gamma_a * rh))};
}

inline double log_poisson_pmf(double lambda, int k) {
  if (k == 0) return -lambda;
  return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}

/// Log-probability of `s` given the two rates and the shared component `c`;
/// -infinity for impossible scores.
inline double log_score_pmf(Rates r, double c, Score s) {
  const int h = s.home_goals;
  const int a = s.away_goals;
  if (h < 0 || a < 0) return -std::numeric_limits<double>::infinity();
  if (c <= 0.0) return log_poisson_pmf(r.home, h) + log_poisson_pmf(r.away, a);
  const double lh = std::log(r.home), la = std::log(r.away), lc = std::log(c);
  // log-sum-exp over the shared count k
  const int kmax = std::min(h, a);
  std::vector<double> terms(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    terms[k] = (h - k) * lh + (a - k) * la + k * lc - std::lgamma(h - k + 1.0) - std::lgamma(a - k + 1.0) -
               std::lgamma(k + 1.0);
  }
  const double top = *std::ranges::max_element(terms);
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return -(r.home + r.away + c) + top + std::log(sum);
}

/// Probability of `s` given the two rates and the shared component `c`.
inline double score_pmf(Rates r, double c, Score s) { return std::exp(log_score_pmf(r, c, s)); }

inline double score_pmf(const ModelParams& p, Rating r_home, Rating r_away, Score s) {
  return score_pmf(rates(p, r_home, r_away), is_bivariate(p.family) ? p.c : 0.0, s);
}

inline Score sample_score(Rates r, double c, RandomStream& rng) {
  const int h = rng.poisson(r.home);
  const int a = rng.poisson(r.away);
  if (c <= 0.0) return {h, a};
  const int shared = rng.poisson(c);
  return {h + shared, a + shared};
}

inline Score sample_score(const ModelParams& p, Rating r_home, Rating r_away, RandomStream& rng) {
  return sample_score(rates(p, r_home, r_away), is_bivariate(p.family) ? p.c : 0.0, rng);
}

/// Empirical score distribution: relative frequency of each final score.
class BaselineTable {
 public:
  BaselineTable() = default;

  template <typename Range>
  static BaselineTable from_scores(const Range& scores) {
    BaselineTable t;
    double n = 0.0;
    for (const Score& s : scores) {
      t.freq_[s] += 1.0;
      n += 1.0;
    }
    if (n == 0.0) throw InvalidInput("baseline needs at least one score");
    for (auto& [_, f] : t.freq_) f /= n;
    return t;
  }

  double probability(Score s) const {
    const auto it = freq_.find(s);
    return it == freq_.end() ? 0.0 : it->second;
  }

  const std::map<Score, double>& frequencies() const { return freq_; }

 private:
  std::map<Score, double> freq_;
};

inline double baseline_pmf(const BaselineTable& t, Score s) { return t.probability(s); }

// Parameter files ------------------------------------------------------------

inline std::string to_key_value(const ModelParams& p) {
  std::ostringstream out;
  out.precision(17);
  out << "family=" << to_string(p.family) << '\n'
      << "alpha_h=" << p.alpha_h << '\n'
      << "alpha_a=" << p.alpha_a << '\n'
      << "beta_h=" << p.beta_h << '\n'
      << "beta_a=" << p.beta_a << '\n'
      << "gamma_h=" << p.gamma_h << '\n'
      << "gamma_a=" << p.gamma_a << '\n'
      << "c=" << p.c << '\n';
  return out.str();
}

inline ModelParams params_from_key_value(std::string_view text) {
  ModelParams p;
  bool have_family = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "family") {
      p.family = parse_family(value);
      have_family = true;
      continue;
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InvalidInput("line " + std::to_string(lineno) + ": bad number '" + value + "'");
    }
    if (key == "alpha_h") p.alpha_h = v;
    else if (key == "alpha_a") p.alpha_a = v;
    else if (key == "beta_h") p.beta_h = v;
    else if (key == "beta_a") p.beta_a = v;
    else if (key == "gamma_h") p.gamma_h = v;
    else if (key == "gamma_a") p.gamma_a = v;
    else if (key == "c") p.c = v;
    else throw InvalidInput("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (!have_family) throw InvalidInput("parameter file lacks 'family'");
  if (p.family == ModelFamily::Baseline) throw UnsupportedFamily("baseline has no parameter file");
  p.validate();
  return p;
}

}  // namespace stakeless
