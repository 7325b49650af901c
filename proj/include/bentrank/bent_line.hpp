#pragma once

#include "bentrank/dataset.hpp"
#include "bentrank/rank_regression.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bentrank {

enum class Method { Rank, LeastSquares };

/// Controls for the iterative change-point fit.
struct FitConfig {
  /// Starting change point; empty starts from every decile of z and keeps the best fit.
  std::optional<double> tau_init;
  /// Recorded in reports only; each linearized fit estimates eta directly.
  double eta_init = 0.01;
  /// Sup-norm tolerance on successive (alpha, beta, gamma).
  double tol = 1e-5;
  int max_iter = 100;
  double ci_level = 0.95;
  double gamma_floor = 1e-8;
  /// Multiplier on every tau step, in (0, 1].
  double damping = 1.0;
  ScoreFunction score = ScoreFunction::wilcoxon();

  void validate() const;
};

/// Columns X, Z, (Z - tau0)_+, -I(Z > tau0) of the first-order expansion of
/// the hinge around tau0.
Matrix linearized_design(const Dataset& data, double tau0);

/// Rank-based bent line fit by iterative linear reparameterization of the
/// change point.
BentLineFit fit_bent_line(const Dataset& data, const FitConfig& config = {});

/// Standard error of tau from the covariance of (gamma, eta), given in that
/// order, and the point estimates of gamma and eta.
double se_tau(const Eigen::Matrix2d& cov_gamma_eta, double gamma_hat, double eta_hat);

/// Minimum rank dispersion over (alpha, beta, gamma) with the change point
/// held at tau.
double profile_dispersion(const Dataset& data, double tau,
                          ScoreFunction score = ScoreFunction::wilcoxon());

/// profile_dispersion at each tau, in order. Entries where fewer than 3
/// observations fall on a side of tau are NaN.
std::vector<double> profile_dispersion(const Dataset& data, const std::vector<double>& taus,
                                       ScoreFunction score = ScoreFunction::wilcoxon());

struct PredictionError {
  std::vector<double> per_fold;
  std::vector<std::size_t> fold_sizes;
  double total = 0.0;
  bool all_converged = true;
};

/// K-fold cross-validated sum of squared out-of-fold prediction errors.
/// Fold membership comes from a seeded shuffle.
PredictionError kfold_prediction_error(const Dataset& data, int k, const FitConfig& config,
                                       std::uint64_t seed, Method method = Method::Rank);

}  // namespace bentrank
