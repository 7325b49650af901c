#pragma once

#include "bentrank/dataset.hpp"

#include <optional>

namespace bentrank {

enum class ScoreKind { Wilcoxon, Sign };

/// Rank score function phi on (0, 1), standardized so that
/// int phi = 0 and int phi^2 = 1.
struct ScoreFunction {
  ScoreKind kind = ScoreKind::Wilcoxon;

  double operator()(double t) const;

  static ScoreFunction wilcoxon() { return {ScoreKind::Wilcoxon}; }
  static ScoreFunction sign() { return {ScoreKind::Sign}; }
};

/// Midranks (ties receive the average of the ranks they span), 1-based.
Vector ranks(const Eigen::Ref<const Vector>& values);

/// Jaeckel's dispersion sum_i phi(R_i / (n + 1)) e_i.
double dispersion(const Eigen::Ref<const Vector>& residuals,
                  ScoreFunction score = ScoreFunction::wilcoxon());

struct RankFitOptions {
  /// Floor on |e_i - e_j| inside the IRLS weights.
  double smoothing = 1e-8;
  /// Streaming IRLS (very large n) stops once the sup-norm coefficient change
  /// drops below tol * (1 + |b|_inf).
  double tol = 1e-8;
  int max_iter = 200;
  /// IRLS hands over to exact vertex descent at this relative change.
  double irls_handoff = 1e-3;
  int max_pivots = 500;
  /// Starting coefficients; ignored when the size does not match.
  std::optional<Vector> start;
  /// IRLS steps taken before vertex descent when a start is supplied.
  int warm_irls = 1;
  /// When false only coefficients, residuals and dispersion are filled in.
  bool inference = true;
};

struct RankLinearFit {
  Vector coefficients;
  /// Median of y - w b (sign-score location estimate).
  double intercept = 0.0;
  /// y - w b; excludes the intercept so rank statistics are translation free.
  Vector residuals;
  /// c_phi^2 (Wc' Wc)^{-1} with Wc the column-centered design.
  Matrix covariance;
  /// tau_S^2 / n + wbar' cov wbar, the variance of the intercept.
  double intercept_variance = 0.0;
  /// Cov(intercept, coefficients) = -cov wbar.
  Vector intercept_covariance;
  double c_phi_hat = 0.0;
  double tau_s_hat = 0.0;
  double dispersion_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the rank dispersion of y - w b over b. The columns of w must be
/// linearly independent and non-constant; the intercept is estimated
/// separately as the median of the final residuals.
RankLinearFit fit_rank_linear(const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Matrix>& w,
                              ScoreFunction score = ScoreFunction::wilcoxon(),
                              const RankFitOptions& options = {});

/// Silverman's rule h = mult * sd(residuals) * n^{-1/5}.
double silverman_bandwidth(const Eigen::Ref<const Vector>& residuals, double mult = 1.06);

/// Plug-in estimate of the rank scale c_phi. Wilcoxon: 1 / (sqrt(12) int fhat^2)
/// with a Gaussian-kernel density estimate at the given bandwidth. Sign:
/// 1 / (2 fhat(0)) through the order-statistic interval estimator.
double estimate_c_phi(const Eigen::Ref<const Vector>& residuals, ScoreFunction score,
                      double bandwidth);

/// estimate_c_phi at Silverman's bandwidth.
double estimate_c_phi(const Eigen::Ref<const Vector>& residuals,
                      ScoreFunction score = ScoreFunction::wilcoxon());

/// Order-statistic confidence-interval estimator of 1 / (2 f(0)), used for
/// the variance of the median-based intercept; q is the number of slopes.
double estimate_tau_s(const Eigen::Ref<const Vector>& residuals, Eigen::Index q);

}  // namespace bentrank
