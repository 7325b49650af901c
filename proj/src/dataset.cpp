#include "bentrank/dataset.hpp"

#include "bentrank/error.hpp"
#include "bentrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bentrank {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::LengthMismatch: return "length_mismatch";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::DegenerateThreshold: return "degenerate_threshold";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::NotConverged: return "not_converged";
    case ErrorKind::Unidentified: return "unidentified_change_point";
    case ErrorKind::NumericalDegeneracy: return "numerical_degeneracy";
    case ErrorKind::FoldTooSmall: return "fold_too_small";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

Dataset validate_dataset(Vector y, Matrix x, Vector z) {
  const auto n = y.size();
  if (n < 1) throw Error(ErrorKind::LengthMismatch, "dataset is empty");
  if (z.size() != n || x.rows() != n) {
    throw Error(ErrorKind::LengthMismatch,
                "length mismatch: y has " + std::to_string(n) + ", z has " +
                    std::to_string(z.size()) + ", x has " + std::to_string(x.rows()) +
                    " rows");
  }
  if (!y.allFinite() || !z.allFinite() || !x.allFinite()) {
    throw Error(ErrorKind::NonFinite, "dataset contains non-finite entries");
  }

  std::vector<double> sorted(z.data(), z.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < 3) {
    throw Error(ErrorKind::DegenerateThreshold,
                "threshold covariate needs at least 3 distinct values, found " +
                    std::to_string(distinct));
  }

  Dataset d;
  d.y_ = std::move(y);
  d.x_ = std::move(x);
  d.z_ = std::move(z);
  d.z_min_ = sorted.front();
  d.z_max_ = sorted[distinct - 1];
  d.distinct_z_ = distinct;
  return d;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Vector y(m), z(m);
  Matrix x(m, p());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = rows[k];
    y[k] = y_[i];
    z[k] = z_[i];
    x.row(k) = x_.row(i);
  }
  return validate_dataset(std::move(y), std::move(x), std::move(z));
}

double predict(const BentLineParams& params, const Eigen::Ref<const Vector>& x_row,
               double z_value) {
  if (x_row.size() != params.alpha.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "x row has " + std::to_string(x_row.size()) + " entries, alpha has " +
                    std::to_string(params.alpha.size()));
  }
  const double hinge = z_value > params.tau ? z_value - params.tau : 0.0;
  return params.alpha.dot(x_row) + params.beta * z_value + params.gamma * hinge;
}

Vector predict(const BentLineParams& params, const Dataset& data) {
  if (data.p() != params.alpha.size()) {
    throw Error(ErrorKind::DimensionMismatch, "dataset covariates do not match alpha");
  }
  Vector out = data.x() * params.alpha + params.beta * data.z();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double zi = data.z()[i];
    if (zi > params.tau) out[i] += params.gamma * (zi - params.tau);
  }
  return out;
}

Vector BentLineFit::standard_errors() const {
  const auto k = params.alpha.size() + 2;
  Vector se(k + 1);
  for (Eigen::Index j = 0; j < k; ++j) se[j] = std::sqrt(std::max(0.0, covariance(j, j)));
  se[k] = se_tau;
  return se;
}

std::pair<double, double> BentLineFit::coefficient_ci(Eigen::Index j) const {
  const auto p = params.alpha.size();
  double est = 0.0;
  if (j < p) {
    est = params.alpha[j];
  } else if (j == p) {
    est = params.beta;
  } else if (j == p + 1) {
    est = params.gamma;
  } else {
    throw Error(ErrorKind::DimensionMismatch, "coefficient index out of range");
  }
  const double half = normal_quantile(0.5 + ci_level / 2.0) *
                      std::sqrt(std::max(0.0, covariance(j, j)));
  return {est - half, est + half};
}

}  // namespace bentrank
