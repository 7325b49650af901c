#include "linear_engine.hpp"

#include "bentrank/error.hpp"

#include <cmath>
#include <map>

namespace bentrank::detail {

Eigen::Index constant_column(const Matrix& design) {
  Eigen::Index found = -1;
  for (Eigen::Index k = 0; k < design.cols(); ++k) {
    const auto col = design.col(k);
    if (col.maxCoeff() == col.minCoeff()) {
      if (col[0] == 0.0) throw Error(ErrorKind::RankDeficient, "design has an all-zero column");
      if (found >= 0) throw Error(ErrorKind::RankDeficient, "design has two constant columns");
      found = k;
    }
  }
  return found;
}

namespace {

class RankEngine final : public LinearEngine {
 public:
  explicit RankEngine(ScoreFunction score) : score_(score) {}

  EngineFit fit(const Vector& y, const Matrix& design, bool inference) const override {
    const auto cols = design.cols();
    const Eigen::Index c = constant_column(design);
    std::vector<Eigen::Index> map;  // w column -> design column
    const Matrix w = strip_constant(design, c, map);
    RankFitOptions options;
    options.inference = inference;
    const auto cached = warm_.find(w.cols());
    if (cached != warm_.end()) options.start = cached->second;
    const RankLinearFit rf = fit_rank_linear(y, w, score_, options);
    warm_[w.cols()] = rf.coefficients;

    EngineFit out;
    out.coefficients = Vector::Zero(cols);
    for (std::size_t a = 0; a < map.size(); ++a) {
      out.coefficients[map[a]] = rf.coefficients[static_cast<Eigen::Index>(a)];
    }
    out.residuals = rf.residuals;
    const double cval = c >= 0 ? design(0, c) : 0.0;
    if (c >= 0) {
      out.coefficients[c] = rf.intercept / cval;
      out.residuals.array() -= rf.intercept;
    }
    if (inference) {
      out.covariance = Matrix::Zero(cols, cols);
      for (std::size_t a = 0; a < map.size(); ++a) {
        for (std::size_t b = 0; b < map.size(); ++b) {
          out.covariance(map[a], map[b]) =
              rf.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
      }
      if (c >= 0) {
        out.covariance(c, c) = rf.intercept_variance / (cval * cval);
        for (std::size_t a = 0; a < map.size(); ++a) {
          const double v = rf.intercept_covariance[static_cast<Eigen::Index>(a)] / cval;
          out.covariance(c, map[a]) = v;
          out.covariance(map[a], c) = v;
        }
      }
    }
    out.objective = rf.dispersion_value;
    out.scale = rf.c_phi_hat;
    return out;
  }

  double objective(const Vector& residuals) const override {
    return dispersion(residuals, score_);
  }

 private:
  static Matrix strip_constant(const Matrix& design, Eigen::Index c,
                               std::vector<Eigen::Index>& map) {
    Matrix w(design.rows(), c >= 0 ? design.cols() - 1 : design.cols());
    for (Eigen::Index k = 0, m = 0; k < design.cols(); ++k) {
      if (k == c) continue;
      w.col(m++) = design.col(k);
      map.push_back(k);
    }
    return w;
  }

  ScoreFunction score_;
  // last solution per column count, used as the next starting point
  mutable std::map<Eigen::Index, Vector> warm_;
};

class LsEngine final : public LinearEngine {
 public:
  EngineFit fit(const Vector& y, const Matrix& design, bool inference) const override {
    const auto n = design.rows();
    const auto cols = design.cols();
    if (cols >= n) throw Error(ErrorKind::RankDeficient, "need more observations than columns");
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < cols) throw Error(ErrorKind::RankDeficient, "design is rank deficient");
    EngineFit out;
    out.coefficients = qr.solve(y);
    out.residuals = y - design * out.coefficients;
    out.objective = out.residuals.squaredNorm();
    if (!inference) return out;
    const double sigma2 = out.objective / static_cast<double>(n - cols);
    out.scale = std::sqrt(sigma2);
    out.covariance = sigma2 * (design.transpose() * design).inverse();
    return out;
  }

  double objective(const Vector& residuals) const override { return residuals.squaredNorm(); }
};

}  // namespace

std::unique_ptr<LinearEngine> make_rank_engine(ScoreFunction score) {
  return std::make_unique<RankEngine>(score);
}

std::unique_ptr<LinearEngine> make_ls_engine() { return std::make_unique<LsEngine>(); }

}  // namespace bentrank::detail
