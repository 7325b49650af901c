#include "bentrank/bent_line.hpp"

#include "bentrank/error.hpp"
#include "bentrank/ls_baseline.hpp"
#include "bentrank/random.hpp"
#include "bentrank/stats.hpp"
#include "segmented.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace bentrank {

void FitConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "ci_level must lie in (0, 1)");
  }
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "damping must lie in (0, 1]");
  }
  if (!(gamma_floor >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma_floor is negative");
}

namespace detail {

Matrix base_design(const Dataset& data, double tau) {
  const auto n = data.n();
  const auto p = data.p();
  Matrix d(n, p + 2);
  d.leftCols(p) = data.x();
  d.col(p) = data.z();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zi = data.z()[i];
    d(i, p + 1) = zi > tau ? zi - tau : 0.0;
  }
  return d;
}

void require_strata(const Dataset& data, double tau) {
  const auto below = (data.z().array() <= tau).count();
  const auto above = data.n() - below;
  if (below < 3 || above < 3) {
    throw Error(ErrorKind::Unidentified,
                "fewer than 3 observations on one side of tau = " + std::to_string(tau) +
                    " (" + std::to_string(below) + " below, " + std::to_string(above) +
                    " above)");
  }
}

double profile_objective(const Dataset& data, double tau, const LinearEngine& engine) {
  return engine.min_objective(data.y(), base_design(data, tau));
}

std::vector<double> decile_starts(const Dataset& data) {
  const Vector& z = data.z();
  std::vector<double> sorted(z.data(), z.data() + z.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> starts;
  for (int d = 1; d <= 9; ++d) {
    const double tau = sorted_quantile(sorted, d / 10.0);
    const auto below = (z.array() <= tau).count();
    if (below < 3 || data.n() - below < 3) continue;
    if (!starts.empty() && starts.back() == tau) continue;
    starts.push_back(tau);
  }
  return starts;
}

namespace {

struct Trajectory {
  double tau = 0.0;
  /// Working value of the last linearized fit.
  double tau_linearized = 0.0;
  double profile = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Reached a z-interval already explored from an earlier start.
  bool merged = false;
};

// Within one interval between consecutive z values the linearized design
// spans the same columns, so the fit and the proposed tau do not depend on
// where tau sits inside it; `visited` holds intervals (as counts of z <= tau)
// already linearized by earlier starts.
Trajectory iterate(const Dataset& data, const FitConfig& config, const LinearEngine& engine,
                   double tau, double tau_lo, double tau_hi, std::vector<Eigen::Index>& visited) {
  const auto p = data.p();
  const auto interval = [&](double t) { return (data.z().array() <= t).count(); };
  require_strata(data, tau);
  Trajectory t;
  EngineFit base = engine.fit(data.y(), base_design(data, tau), false);
  Vector theta_prev = base.coefficients;
  t.profile = base.objective;
  std::vector<Eigen::Index> mine;
  while (t.iterations < config.max_iter) {
    const Eigen::Index here = interval(tau);
    if (std::find(visited.begin(), visited.end(), here) != visited.end()) {
      t.merged = true;
      break;
    }
    if (std::find(mine.begin(), mine.end(), here) == mine.end()) mine.push_back(here);
    const EngineFit lin = engine.fit(data.y(), linearized_design(data, tau), false);
    t.tau_linearized = tau;
    ++t.iterations;
    const Vector theta = lin.coefficients.head(p + 2);
    const double gamma = theta[p + 1];
    const double eta = lin.coefficients[p + 2];
    if (!(std::abs(gamma) >= config.gamma_floor) || gamma == 0.0) {
      throw Error(ErrorKind::Unidentified,
                  "slope change vanished at iteration " + std::to_string(t.iterations) +
                      "; test for the existence of a change point first");
    }

    // Step on tau, halved until the refitted objective at the candidate
    // falls strictly below the one at the current tau.
    const double slack = 1e-12 * (1.0 + std::abs(t.profile));
    double step = config.damping * eta / gamma;
    double next_tau = tau;
    for (int halving = 0; halving <= 10; ++halving, step *= 0.5) {
      const double cand = std::clamp(tau + step, tau_lo, tau_hi);
      if (cand == tau) break;
      const auto below = (data.z().array() <= cand).count();
      if (below < 3 || data.n() - below < 3) continue;
      const double obj = profile_objective(data, cand, engine);
      if (obj < t.profile - slack) {
        next_tau = cand;
        t.profile = obj;
        break;
      }
    }

    const double change = (theta - theta_prev).cwiseAbs().maxCoeff();
    theta_prev = theta;
    tau = next_tau;
    if (change < config.tol) {
      t.converged = true;
      break;
    }
  }
  t.tau = tau;
  visited.insert(visited.end(), mine.begin(), mine.end());
  return t;
}

bool better(const Trajectory& a, const Trajectory& b) {
  if (a.merged != b.merged) return !a.merged;
  if (a.converged != b.converged) return a.converged;
  return a.profile < b.profile;
}

}  // namespace

BentLineFit fit_segmented(const Dataset& data, const FitConfig& config,
                          const LinearEngine& engine) {
  config.validate();
  const auto p = data.p();
  const double spacing =
      (data.z_max() - data.z_min()) / static_cast<double>(data.distinct_z() - 1);
  const double tau_lo = data.z_min() + spacing;
  const double tau_hi = data.z_max() - spacing;
  const auto clamp = [&](double t) { return std::clamp(t, tau_lo, tau_hi); };

  std::vector<double> starts;
  if (config.tau_init) {
    if (*config.tau_init < data.z_min() || *config.tau_init > data.z_max()) {
      throw Error(ErrorKind::InvalidArgument, "tau_init lies outside the range of z");
    }
    starts.push_back(clamp(*config.tau_init));
  } else {
    for (const double s : decile_starts(data)) starts.push_back(clamp(s));
    if (starts.empty()) {
      throw Error(ErrorKind::Unidentified, "no decile of z leaves 3 observations on each side");
    }
  }

  std::optional<Trajectory> best;
  std::optional<Error> first_error;
  std::vector<Eigen::Index> visited;
  for (const double start : starts) {
    try {
      const Trajectory t = iterate(data, config, engine, start, tau_lo, tau_hi, visited);
      if (!best || better(t, *best)) best = t;
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  if (!best) throw *first_error;

  const EngineFit last = engine.fit(data.y(), linearized_design(data, best->tau_linearized));
  const double eta = last.coefficients[p + 2];

  BentLineFit fit;
  fit.params = BentLineParams{last.coefficients.head(p), last.coefficients[p],
                              last.coefficients[p + 1], best->tau};
  fit.eta_final = eta;
  fit.covariance = last.covariance;
  fit.scale = last.scale;
  fit.iterations = best->iterations;
  fit.converged = best->converged;
  fit.ci_level = config.ci_level;

  const Eigen::Matrix2d block = last.covariance.block(p + 1, p + 1, 2, 2);
  fit.se_tau = se_tau(block, fit.params.gamma, eta);
  const double half = normal_quantile(0.5 + config.ci_level / 2.0) * fit.se_tau;
  fit.ci_tau = {fit.params.tau - half, fit.params.tau + half};
  fit.residuals = data.y() - predict(fit.params, data);
  fit.objective = engine.objective(fit.residuals);
  return fit;
}

}  // namespace detail

Matrix linearized_design(const Dataset& data, double tau0) {
  if (tau0 < data.z_min() || tau0 > data.z_max()) {
    throw Error(ErrorKind::InvalidArgument, "tau0 lies outside the range of z");
  }
  const auto p = data.p();
  Matrix d(data.n(), p + 3);
  d.leftCols(p + 2) = detail::base_design(data, tau0);
  for (Eigen::Index i = 0; i < data.n(); ++i) d(i, p + 2) = data.z()[i] > tau0 ? -1.0 : 0.0;
  if ((d.col(p + 2).array() == 0.0).all()) {
    throw Error(ErrorKind::RankDeficient,
                "no observation exceeds tau0; hinge and indicator columns vanish");
  }
  return d;
}

BentLineFit fit_bent_line(const Dataset& data, const FitConfig& config) {
  const auto engine = detail::make_rank_engine(config.score);
  return detail::fit_segmented(data, config, *engine);
}

double se_tau(const Eigen::Matrix2d& cov_gamma_eta, double gamma_hat, double eta_hat) {
  if (!(std::abs(gamma_hat) > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "gamma must be non-zero");
  }
  const double ratio = eta_hat / gamma_hat;
  const double var = cov_gamma_eta(1, 1) + cov_gamma_eta(0, 0) * ratio * ratio +
                     2.0 * ratio * cov_gamma_eta(0, 1);
  const double scale = std::abs(cov_gamma_eta(1, 1)) + std::abs(cov_gamma_eta(0, 0)) * ratio * ratio;
  if (var < -1e-12 * std::max(scale, 1e-300)) {
    throw Error(ErrorKind::NumericalDegeneracy,
                "negative variance for tau; covariance is not positive semidefinite");
  }
  return std::sqrt(std::max(var, 0.0)) / std::abs(gamma_hat);
}

double profile_dispersion(const Dataset& data, double tau, ScoreFunction score) {
  const auto engine = detail::make_rank_engine(score);
  return detail::profile_objective(data, tau, *engine);
}

std::vector<double> profile_dispersion(const Dataset& data, const std::vector<double>& taus,
                                       ScoreFunction score) {
  const auto engine = detail::make_rank_engine(score);
  std::vector<double> out;
  out.reserve(taus.size());
  for (const double tau : taus) {
    const auto below = (data.z().array() <= tau).count();
    if (below < 3 || data.n() - below < 3) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.push_back(detail::profile_objective(data, tau, *engine));
    }
  }
  return out;
}

PredictionError kfold_prediction_error(const Dataset& data, int k, const FitConfig& config,
                                       std::uint64_t seed, Method method) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "k-fold needs k >= 2");
  const auto n = data.n();
  if (n < k) throw Error(ErrorKind::FoldTooSmall, "fewer observations than folds");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = make_rng(seed, kStreamFolds, 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  PredictionError pe;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      (static_cast<int>(i % static_cast<std::size_t>(k)) == fold ? test : train)
          .push_back(perm[i]);
    }
    if (static_cast<Eigen::Index>(train.size()) < data.p() + 4) {
      throw Error(ErrorKind::FoldTooSmall,
                  "fold " + std::to_string(fold) + " leaves " + std::to_string(train.size()) +
                      " training observations");
    }
    Dataset train_set;
    try {
      train_set = data.subset(train);
    } catch (const Error& e) {
      throw Error(ErrorKind::FoldTooSmall,
                  "fold " + std::to_string(fold) + " training set is degenerate: " + e.what());
    }
    const BentLineFit fit = method == Method::Rank ? fit_bent_line(train_set, config)
                                                   : fit_ls_bent_line(train_set, config);
    pe.all_converged = pe.all_converged && fit.converged;
    double sse = 0.0;
    for (const auto i : test) {
      const double r = data.y()[i] - predict(fit.params, data.x().row(i).transpose(), data.z()[i]);
      sse += r * r;
    }
    pe.per_fold.push_back(sse);
    pe.fold_sizes.push_back(test.size());
    pe.total += sse;
  }
  return pe;
}

}  // namespace bentrank
