#pragma once

#include "bentrank/dataset.hpp"
#include "bentrank/rank_regression.hpp"

#include <memory>

namespace bentrank::detail {

/// Linear fit on a design that may carry one constant (intercept) column.
struct EngineFit {
  Vector coefficients;
  Matrix covariance;
  /// y - design * coefficients
  Vector residuals;
  double objective = 0.0;
  double scale = 0.0;
};

/// The loss-specific half of the segmented iteration: rank dispersion or
/// residual sum of squares. The rank engine warm-starts each fit from the
/// previous solution of the same width, so an engine belongs to one thread.
class LinearEngine {
 public:
  virtual ~LinearEngine() = default;
  /// Without inference the covariance is left empty and scale is zero.
  virtual EngineFit fit(const Vector& y, const Matrix& design, bool inference) const = 0;
  virtual double objective(const Vector& residuals) const = 0;

  EngineFit fit(const Vector& y, const Matrix& design) const { return fit(y, design, true); }
  double min_objective(const Vector& y, const Matrix& design) const {
    return fit(y, design, false).objective;
  }
};

std::unique_ptr<LinearEngine> make_rank_engine(ScoreFunction score);
std::unique_ptr<LinearEngine> make_ls_engine();

/// Index of the constant column of a design, or -1; throws when more than
/// one column is constant.
Eigen::Index constant_column(const Matrix& design);

}  // namespace bentrank::detail
