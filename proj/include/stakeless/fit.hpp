#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stakeless/domain.hpp"
#include "stakeless/model.hpp"
#include "stakeless/random.hpp"

namespace stakeless {

struct MatchObservation {
  std::string season;
  Rating home_rating;
  Rating away_rating;
  Score score;
};

inline MatchObservation make_observation(std::string season, double home_rating, double away_rating, Score s) {
  return {std::move(season), Rating(home_rating), Rating(away_rating), validated_score(s.home_goals, s.away_goals)};
}

// Parameters ------------------------------------------------------------------

/// Field names of ModelParams that a family estimates.
inline std::vector<std::string_view> free_parameters(ModelFamily f) {
  if (f == ModelFamily::Baseline) throw UnsupportedFamily("the baseline model has no parameters");
  std::vector<std::string_view> out{"alpha_h", "alpha_a", "beta_h", "beta_a"};
  if (has_gamma(f)) {
    out.push_back("gamma_h");
    out.push_back("gamma_a");
  }
  if (is_bivariate(f)) out.push_back("c");
  return out;
}

inline double& parameter(ModelParams& p, std::string_view name) {
  if (name == "alpha_h") return p.alpha_h;
  if (name == "alpha_a") return p.alpha_a;
  if (name == "beta_h") return p.beta_h;
  if (name == "beta_a") return p.beta_a;
  if (name == "gamma_h") return p.gamma_h;
  if (name == "gamma_a") return p.gamma_a;
  if (name == "c") return p.c;
  throw InvalidInput("unknown parameter '" + std::string(name) + "'");
}

inline double parameter(const ModelParams& p, std::string_view name) {
  return parameter(const_cast<ModelParams&>(p), name);
}

/// Gradient with respect to every ModelParams field, in declaration order
/// (alpha_h, alpha_a, beta_h, beta_a, gamma_h, gamma_a, c).
using ParamGradient = std::array<double, 7>;

// Likelihood --------------------------------------------------------------------

inline double log_likelihood(const ModelParams& p, std::span<const MatchObservation> data) {
  if (data.empty()) throw InvalidInput("log-likelihood needs at least one observation");
  const double c = is_bivariate(p.family) ? p.c : 0.0;
  double sum = 0.0;
  for (const auto& m : data) {
    const double l = log_score_pmf(rates(p, m.home_rating, m.away_rating), c, m.score);
    if (l == -std::numeric_limits<double>::infinity()) return l;
    sum += l;
  }
  return sum;
}

namespace detail {

// Derivatives of the log-pmf with respect to the two rates and c.
struct RateScore {
  double d_home = 0.0;
  double d_away = 0.0;
  double d_c = 0.0;
  double expected_shared = 0.0;  // E[k | score]
};

inline RateScore rate_score(Rates r, double c, Score s) {
  const int h = s.home_goals;
  const int a = s.away_goals;
  RateScore out;
  if (c <= 0.0) {
    out.d_home = h / r.home - 1.0;
    out.d_away = a / r.away - 1.0;
    out.d_c = static_cast<double>(h) * a / (r.home * r.away) - 1.0;
    return out;
  }
  const double lh = std::log(r.home), la = std::log(r.away), lc = std::log(c);
  const int kmax = std::min(h, a);
  std::vector<double> w(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    w[k] = (h - k) * lh + (a - k) * la + k * lc - std::lgamma(h - k + 1.0) - std::lgamma(a - k + 1.0) -
           std::lgamma(k + 1.0);
  }
  const double top = *std::ranges::max_element(w);
  double total = 0.0, ek = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    w[k] = std::exp(w[k] - top);
    total += w[k];
    ek += k * w[k];
  }
  ek /= total;
  out.expected_shared = ek;
  out.d_home = (h - ek) / r.home - 1.0;
  out.d_away = (a - ek) / r.away - 1.0;
  out.d_c = ek / c - 1.0;
  return out;
}

}  // namespace detail

/// Analytic gradient of log_likelihood.
inline ParamGradient log_likelihood_gradient(const ModelParams& p, std::span<const MatchObservation> data) {
  if (data.empty()) throw InvalidInput("gradient needs at least one observation");
  const double c = is_bivariate(p.family) ? p.c : 0.0;
  ParamGradient g{};
  for (const auto& m : data) {
    const double rh = m.home_rating.value(), ra = m.away_rating.value();
    const Rates r = rates(p, m.home_rating, m.away_rating);
    const auto d = detail::rate_score(r, c, m.score);
    const double uh = d.d_home * r.home;  // d ll / d log rate_home
    const double ua = d.d_away * r.away;
    g[0] += uh;
    g[1] += ua;
    g[2] += uh * (rh - p.gamma_h * ra);
    g[3] += ua * (ra - p.gamma_a * rh);
    g[4] += -uh * p.beta_h * ra;
    g[5] += -ua * p.beta_a * rh;
    g[6] += d.d_c;
  }
  return g;
}

// Estimation --------------------------------------------------------------------

struct ParameterInterval {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapSummary {
  std::vector<ParameterInterval> intervals;
  int resamples = 0;
  int dropped = 0;
};

struct FitResult {
  ModelParams params;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  std::optional<BootstrapSummary> bootstrap_ci;
};

inline constexpr std::size_t kMinFitObservations = 50;

namespace detail {

// Linear predictors: log rate_home = th[0] + th[1]*x1 + th[2]*x2 (6p) with
// x1 = R_home, x2 = R_away; 4p uses the single covariate R_home - R_away.
struct Design {
  Eigen::MatrixXd home;
  Eigen::MatrixXd away;
  Eigen::VectorXd y_home;
  Eigen::VectorXd y_away;
};

inline Design make_design(std::span<const MatchObservation> data, bool gamma) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index k = gamma ? 3 : 2;
  Design d{Eigen::MatrixXd(n, k), Eigen::MatrixXd(n, k), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = data[static_cast<std::size_t>(i)];
    const double rh = m.home_rating.value(), ra = m.away_rating.value();
    d.home(i, 0) = 1.0;
    d.away(i, 0) = 1.0;
    if (gamma) {
      d.home(i, 1) = rh;
      d.home(i, 2) = ra;
      d.away(i, 1) = ra;
      d.away(i, 2) = rh;
    } else {
      d.home(i, 1) = rh - ra;
      d.away(i, 1) = ra - rh;
    }
    d.y_home(i) = m.score.home_goals;
    d.y_away(i) = m.score.away_goals;
  }
  return d;
}

// Mean Poisson log-likelihood without the constant log(y!) term.
inline double poisson_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& b) {
  const Eigen::VectorXd eta = x * b;
  return (y.array() * eta.array() - eta.array().exp()).mean();
}

struct NewtonResult {
  Eigen::VectorXd beta;
  Eigen::MatrixXd information;  // mean observed information at the optimum
  bool converged = false;
  int iterations = 0;
};

// Newton-Raphson with step halving; convergence is measured on the mean
// gradient. Minimum-norm steps keep rank-deficient designs well defined.
inline NewtonResult poisson_newton(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tol, int max_iter) {
  const double n = static_cast<double>(x.rows());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
  const double ybar = y.mean();
  b(0) = std::log(std::max(ybar, 1e-3));
  NewtonResult out;
  double f = poisson_objective(x, y, b);
  for (int it = 0; it <= max_iter; ++it) {
    const Eigen::VectorXd mu = (x * b).array().exp();
    const Eigen::VectorXd g = x.transpose() * (y - mu) / n;
    const Eigen::MatrixXd h = x.transpose() * mu.asDiagonal() * x / n;
    out.iterations = it;
    out.information = h;
    if (g.norm() < tol) {
      out.converged = true;
      break;
    }
    if (it == max_iter) break;
    const Eigen::VectorXd step = h.completeOrthogonalDecomposition().solve(g);
    double t = 1.0;
    bool moved = false;
    for (int halve = 0; halve < 60; ++halve, t *= 0.5) {
      const Eigen::VectorXd cand = b + t * step;
      const double fc = poisson_objective(x, y, cand);
      if (std::isfinite(fc) && fc >= f) {
        b = cand;
        f = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.beta = b;
  return out;
}

inline void set_side(ModelParams& p, bool home, const Eigen::VectorXd& th, bool gamma) {
  double& alpha = home ? p.alpha_h : p.alpha_a;
  double& beta = home ? p.beta_h : p.beta_a;
  double& g = home ? p.gamma_h : p.gamma_a;
  alpha = th(0);
  beta = th(1);
  // b2 = -beta * gamma; gamma is unidentified when beta is exactly zero.
  g = gamma ? (th(1) != 0.0 ? -th(2) / th(1) : 1.0) : 1.0;
}

// Bivariate family: joint quasi-Newton over (home predictor, away predictor,
// log c), maximizing the mean log-likelihood.
inline ModelParams bivariate_params(const Eigen::VectorXd& th) {
  ModelParams p;
  p.family = ModelFamily::BivariateCoeff;
  set_side(p, true, th.segment(0, 3), true);
  set_side(p, false, th.segment(3, 3), true);
  p.c = std::exp(th(6));
  return p;
}

// Mean log-likelihood and its gradient in theta coordinates.
inline double bivariate_objective(std::span<const MatchObservation> data, const Eigen::VectorXd& th,
                                  Eigen::VectorXd* grad) {
  const double c = std::exp(th(6));
  double f = 0.0;
  if (grad) grad->setZero(7);
  for (const auto& m : data) {
    const double rh = m.home_rating.value(), ra = m.away_rating.value();
    const Rates r{std::exp(th(0) + th(1) * rh + th(2) * ra), std::exp(th(3) + th(4) * ra + th(5) * rh)};
    f += log_score_pmf(r, c, m.score);
    if (grad) {
      const auto d = rate_score(r, c, m.score);
      const double uh = d.d_home * r.home, ua = d.d_away * r.away;
      (*grad)(0) += uh;
      (*grad)(1) += uh * rh;
      (*grad)(2) += uh * ra;
      (*grad)(3) += ua;
      (*grad)(4) += ua * ra;
      (*grad)(5) += ua * rh;
      (*grad)(6) += d.expected_shared - c;
    }
  }
  const double n = static_cast<double>(data.size());
  if (grad) *grad /= n;
  return f / n;
}

// Central differences of the analytic gradient, symmetrized.
inline Eigen::MatrixXd bivariate_hessian(std::span<const MatchObservation> data, const Eigen::VectorXd& th) {
  Eigen::MatrixXd h(7, 7);
  Eigen::VectorXd gp(7), gm(7);
  for (int j = 0; j < 7; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(th(j)));
    Eigen::VectorXd t = th;
    t(j) = th(j) + step;
    bivariate_objective(data, t, &gp);
    t(j) = th(j) - step;
    bivariate_objective(data, t, &gm);
    h.col(j) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

// Damped Newton: the negated Hessian is shifted until it is positive
// definite, then an Armijo backtracking line search is applied.
inline FitResult fit_bivariate(std::span<const MatchObservation> data, double tol, int max_iter) {
  const Design d = make_design(data, true);
  const auto home = poisson_newton(d.home, d.y_home, tol, 200);
  const auto away = poisson_newton(d.away, d.y_away, tol, 200);

  Eigen::VectorXd th(7);
  th << home.beta, away.beta, std::log(0.05);
  Eigen::VectorXd g(7);
  double f = bivariate_objective(data, th, &g);
  int it = 0;
  for (; it < max_iter && g.norm() >= tol; ++it) {
    const Eigen::MatrixXd neg_h = -bivariate_hessian(data, th);
    const double scale = std::max(1e-12, neg_h.diagonal().cwiseAbs().maxCoeff());
    Eigen::VectorXd dir;
    for (double shift = 0.0;; shift = shift == 0.0 ? 1e-10 * scale : shift * 10.0) {
      Eigen::LLT<Eigen::MatrixXd> llt(neg_h + shift * Eigen::MatrixXd::Identity(7, 7));
      if (llt.info() == Eigen::Success) {
        dir = llt.solve(g);
        break;
      }
      if (shift > 1e6 * scale) {
        dir = g;
        break;
      }
    }
    double t = 1.0;
    bool moved = false;
    Eigen::VectorXd g_new(7);
    for (int halve = 0; halve < 60; ++halve, t *= 0.5) {
      const Eigen::VectorXd cand = th + t * dir;
      const double fc = bivariate_objective(data, cand, &g_new);
      if (std::isfinite(fc) && fc >= f + 1e-4 * t * dir.dot(g)) {
        th = cand;
        f = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    g = g_new;
  }
  FitResult out;
  out.params = bivariate_params(th);
  out.converged = g.norm() < tol;
  out.iterations = it + home.iterations + away.iterations;
  out.log_likelihood = log_likelihood(out.params, data);
  return out;
}

}  // namespace detail

/// Maximum-likelihood fit. `tolerance` bounds the norm of the gradient of
/// the mean log-likelihood in the fitting coordinates.
inline FitResult fit_mle(std::span<const MatchObservation> data, ModelFamily family, double tolerance = 1e-8,
                         int max_iterations = 500) {
  if (family == ModelFamily::Baseline) throw UnsupportedFamily("the baseline model is not fitted by likelihood");
  if (data.size() < kMinFitObservations) {
    throw InsufficientData("fitting needs at least " + std::to_string(kMinFitObservations) + " observations, got " +
                       std::to_string(data.size()));
  }
  if (is_bivariate(family)) return detail::fit_bivariate(data, tolerance, max_iterations);

  const bool gamma = has_gamma(family);
  const auto d = detail::make_design(data, gamma);
  const auto home = detail::poisson_newton(d.home, d.y_home, tolerance, max_iterations);
  const auto away = detail::poisson_newton(d.away, d.y_away, tolerance, max_iterations);
  FitResult out;
  out.params.family = family;
  detail::set_side(out.params, true, home.beta, gamma);
  detail::set_side(out.params, false, away.beta, gamma);
  out.converged = home.converged && away.converged;
  out.iterations = home.iterations + away.iterations;
  out.log_likelihood = log_likelihood(out.params, data);
  return out;
}

namespace detail {

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Percentile bootstrap. Resample b is drawn from stream (seed, b) and refit;
/// non-converged refits are dropped.
inline BootstrapSummary bootstrap_ci(std::span<const MatchObservation> data, ModelFamily family, int resamples,
                                     std::uint64_t seed, unsigned threads = 1, double tolerance = 1e-8) {
  if (resamples < 100) throw InvalidInput("bootstrap needs at least 100 resamples");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
  const auto names = free_parameters(family);
  std::vector<std::optional<ModelParams>> fits(static_cast<std::size_t>(resamples));

  auto work = [&](int begin, int end) {
    std::vector<MatchObservation> sample;
    sample.reserve(data.size());
    for (int b = begin; b < end; ++b) {
      RandomStream rng = RandomStream::derived(seed, static_cast<std::uint64_t>(b));
      sample.clear();
      for (std::size_t i = 0; i < data.size(); ++i) sample.push_back(data[rng.below(data.size())]);
      const auto r = fit_mle(sample, family, tolerance);
      if (r.converged) fits[static_cast<std::size_t>(b)] = r.params;
    }
  };
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(resamples));
  if (workers == 1) {
    work(0, resamples);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(resamples) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(resamples) * (w + 1) / workers);
      pool.emplace_back(work, begin, end);
    }
  }

  BootstrapSummary out;
  out.resamples = resamples;
  for (const auto& f : fits) out.dropped += !f.has_value();
  if (out.dropped * 10 > resamples) {
    throw BootstrapUnstable(std::to_string(out.dropped) + " of " + std::to_string(resamples) +
                            " bootstrap refits did not converge");
  }
  for (auto name : names) {
    std::vector<double> v;
    for (const auto& f : fits) {
      if (f) v.push_back(parameter(*f, name));
    }
    std::ranges::sort(v);
    out.intervals.push_back({std::string(name), detail::quantile_sorted(v, 0.025), detail::quantile_sorted(v, 0.975)});
  }
  return out;
}

// Evaluation --------------------------------------------------------------------

/// Forecast distribution over exact scores for one match: a parametric model
/// or the empirical score table.
class Predictor {
 public:
  explicit Predictor(ModelParams p) : model_(p) { p.validate(); }
  explicit Predictor(BaselineTable t) : model_(std::move(t)) {}

  double operator()(const MatchObservation& m, Score s) const {
    if (const auto* p = std::get_if<ModelParams>(&model_)) return score_pmf(*p, m.home_rating, m.away_rating, s);
    return std::get<BaselineTable>(model_).probability(s);
  }

 private:
  std::variant<ModelParams, BaselineTable> model_;
};

inline constexpr std::string_view kPooledGroup = "all";

struct GroupMetric {
  std::string group;
  double value = 0.0;
  std::size_t matches = 0;
};

namespace detail {

// Per-season means of a per-match quantity, in order of first appearance,
// followed by the pooled mean over every match.
template <typename PerMatch>
std::vector<GroupMetric> grouped_mean(std::span<const MatchObservation> data, PerMatch&& per_match) {
  std::vector<GroupMetric> out;
  double pooled = 0.0;
  for (const auto& m : data) {
    const double v = per_match(m);
    auto it = std::ranges::find(out, m.season, &GroupMetric::group);
    if (it == out.end()) {
      out.push_back({m.season, 0.0, 0});
      it = out.end() - 1;
    }
    it->value += v;
    ++it->matches;
    pooled += v;
  }
  for (auto& g : out) g.value /= static_cast<double>(g.matches);
  if (!data.empty()) out.push_back({std::string(kPooledGroup), pooled / static_cast<double>(data.size()), data.size()});
  return out;
}

}  // namespace detail

/// Mean forecast probability of the realized exact score, per season and pooled.
template <typename Pmf>
std::vector<GroupMetric> avg_hit_probability(const Pmf& pmf, std::span<const MatchObservation> data) {
  return detail::grouped_mean(data, [&](const MatchObservation& m) { return pmf(m, m.score); });
}

inline void require_pi(double pi) {
  if (!(pi > 0.5 && pi < 1.0)) throw InvalidParameter("pi must lie strictly between 1/2 and 1");
}

/// Distance between two scores; a shared extra goal for both sides costs
/// less than a goal for one side.
inline double score_distance(Score r1, Score r2, double pi) {
  require_pi(pi);
  const double dh = r1.home_goals - r2.home_goals;
  const double da = r1.away_goals - r2.away_goals;
  return std::sqrt(std::max(0.0, dh * dh + da * da - 2.0 * pi * dh * da));
}

/// Penalty for a wrong outcome: 1 between a draw and a decisive result, 2
/// between a home and an away win.
inline int outcome_penalty(Score r1, Score r2) {
  const Outcome o1 = outcome(r1), o2 = outcome(r2);
  if (o1 == o2) return 0;
  if (o1 == Outcome::Draw || o2 == Outcome::Draw) return 1;
  return 2;
}

inline double outcome_distance(Score r1, Score r2, double pi) {
  return score_distance(r1, r2, pi) + outcome_penalty(r1, r2);
}

enum class DistanceMetric { Score, ScoreAndOutcome };

inline constexpr int kForecastMaxGoals = 10;

/// Expected distance between the realized score and a forecast drawn from
/// the predictive distribution on 0..10 goals per side (renormalized).
template <typename Pmf>
std::vector<GroupMetric> avg_distance(const Pmf& pmf, std::span<const MatchObservation> data, DistanceMetric metric,
                                      double pi) {
  require_pi(pi);
  return detail::grouped_mean(data, [&](const MatchObservation& m) {
    double mass = 0.0, sum = 0.0;
    for (int h = 0; h <= kForecastMaxGoals; ++h) {
      for (int a = 0; a <= kForecastMaxGoals; ++a) {
        const Score f{h, a};
        const double p = pmf(m, f);
        if (p <= 0.0) continue;
        mass += p;
        sum += p * (metric == DistanceMetric::Score ? score_distance(m.score, f, pi) : outcome_distance(m.score, f, pi));
      }
    }
    if (!(mass > 0.0)) throw InvalidInput("forecast has no mass on scores up to 10 goals");
    return sum / mass;
  });
}

}  // namespace stakeless
