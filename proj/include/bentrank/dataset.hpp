#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace bentrank {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Observations (y_i, x_i, z_i). The linear covariate matrix carries no
/// implicit intercept: add a constant column when one is wanted.
class Dataset {
 public:
  Dataset() = default;

  const Vector& y() const noexcept { return y_; }
  const Matrix& x() const noexcept { return x_; }
  const Vector& z() const noexcept { return z_; }

  Eigen::Index n() const noexcept { return y_.size(); }
  Eigen::Index p() const noexcept { return x_.cols(); }

  double z_min() const noexcept { return z_min_; }
  double z_max() const noexcept { return z_max_; }
  Eigen::Index distinct_z() const noexcept { return distinct_z_; }

  /// Rows selected by index, in the given order.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;

  friend Dataset validate_dataset(Vector y, Matrix x, Vector z);

 private:
  Vector y_;
  Matrix x_;
  Vector z_;
  double z_min_ = 0.0;
  double z_max_ = 0.0;
  Eigen::Index distinct_z_ = 0;
};

/// Checks shapes, finiteness and that z has at least three distinct values.
Dataset validate_dataset(Vector y, Matrix x, Vector z);

struct BentLineParams {
  Vector alpha;
  double beta = 0.0;
  double gamma = 0.0;
  double tau = 0.0;
};

/// alpha'x + beta z + gamma (z - tau)_+
double predict(const BentLineParams& params, const Eigen::Ref<const Vector>& x_row,
               double z_value);

/// Predictions for every row of a dataset.
Vector predict(const BentLineParams& params, const Dataset& data);

struct BentLineFit {
  BentLineParams params;
  double eta_final = 0.0;
  /// Covariance of (alpha, beta, gamma, eta), (p+3) x (p+3).
  Matrix covariance;
  double se_tau = 0.0;
  std::pair<double, double> ci_tau{0.0, 0.0};
  double ci_level = 0.95;
  /// Scale of the error law: the rank scale c_phi, or sigma for least squares.
  double scale = 0.0;
  /// Dispersion (rank) or residual sum of squares (LS) of the full model.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  Vector residuals;

  /// Standard errors of (alpha, beta, gamma) followed by tau.
  Vector standard_errors() const;
  /// Wald interval for coefficient index j in (alpha, beta, gamma) order.
  std::pair<double, double> coefficient_ci(Eigen::Index j) const;
};

struct NullFit {
  /// Coefficients on W = (X, Z).
  Vector xi;
  Vector residuals;
  Vector ecdf_at_residuals;
  Vector density_at_residuals;
  Matrix s_wn;
  double c_phi_hat = 0.0;
  double bandwidth = 0.0;
};

struct CusumTestResult {
  double t_n = 0.0;
  Vector tau_grid;
  Vector r_n_path;
  Vector bootstrap_stats;
  double p_value = 1.0;
  int nb = 0;
  double bandwidth = 0.0;
  std::uint64_t seed = 0;
};

}  // namespace bentrank
