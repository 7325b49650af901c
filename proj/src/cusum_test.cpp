#include "bentrank/cusum_test.hpp"

#include "bentrank/error.hpp"
#include "bentrank/parallel.hpp"
#include "bentrank/random.hpp"
#include "bentrank/rank_regression.hpp"
#include "bentrank/stats.hpp"
#include "bootstrap.hpp"
#include "linear_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bentrank {

namespace {
const double kSqrt12 = std::sqrt(12.0);
constexpr int kChunk = 128;
}  // namespace

void TestConfig::validate() const {
  if (nb < 1) throw Error(ErrorKind::InvalidArgument, "nb must be at least 1");
  if (!(bandwidth_mult > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth_mult must be positive");
  if (!(q_lo > 0.0 && q_lo < q_hi && q_hi < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < q_lo < q_hi < 1");
  }
}

void draw_wild_multipliers(std::uint64_t seed, int replicate, Eigen::Ref<Vector> u) {
  Rng rng = make_rng(seed, kStreamBootstrap, static_cast<std::uint64_t>(replicate));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double v = normal(rng);
    const double w = coin(rng) ? 1.0 : -1.0;
    u[i] = v * w;
  }
}

namespace detail {

Matrix null_design(const Dataset& data) {
  Matrix w(data.n(), data.p() + 1);
  w.leftCols(data.p()) = data.x();
  w.col(data.p()) = data.z();
  return w;
}

Matrix cusum_weights(const Dataset& data, const Vector& grid) {
  Matrix h(grid.size(), data.n());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      const double zi = data.z()[i];
      h(g, i) = zi <= grid[g] ? zi - grid[g] : 0.0;
    }
  }
  return h;
}

Matrix inverse_s_wn(const Matrix& s_wn) {
  Eigen::LLT<Matrix> llt(s_wn);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::RankDeficient, "S_wn is singular");
  const Matrix inv = llt.solve(Matrix::Identity(s_wn.rows(), s_wn.cols()));
  if (!inv.allFinite()) throw Error(ErrorKind::RankDeficient, "S_wn is singular");
  return inv;
}

Vector bootstrap_sup(const Matrix& m, const TestConfig& config, const MultiplierFn& multipliers) {
  const auto n = m.cols();
  Vector stats(config.nb);
  const auto chunks = static_cast<std::size_t>((config.nb + kChunk - 1) / kChunk);
  parallel_for(chunks, config.threads, [&](std::size_t c) {
    const int first = static_cast<int>(c) * kChunk;
    const int count = std::min(kChunk, config.nb - first);
    Matrix u(n, count);
    for (int b = 0; b < count; ++b) multipliers(first + b, u.col(b));
    const Matrix r = m * u;
    for (int b = 0; b < count; ++b) stats[first + b] = r.col(b).cwiseAbs().maxCoeff();
  });
  return stats;
}

CusumTestResult finish_test(const Vector& grid, Vector path, Vector stats,
                            const TestConfig& config, double bandwidth) {
  CusumTestResult res;
  res.tau_grid = grid;
  res.t_n = test_statistic(path);
  res.r_n_path = std::move(path);
  const auto exceed = (stats.array() >= res.t_n).count();
  res.p_value = static_cast<double>(exceed) / static_cast<double>(stats.size());
  res.bootstrap_stats = std::move(stats);
  res.nb = config.nb;
  res.bandwidth = bandwidth;
  res.seed = config.seed;
  return res;
}

}  // namespace detail

NullFit fit_null(const Dataset& data, const TestConfig& config) {
  config.validate();
  const Matrix w = detail::null_design(data);
  const auto n = data.n();
  if (w.cols() >= n) throw Error(ErrorKind::RankDeficient, "too few observations for the null fit");
  const auto engine = detail::make_rank_engine(ScoreFunction::wilcoxon());
  const detail::EngineFit ef = engine->fit(data.y(), w);

  NullFit nf;
  nf.xi = ef.coefficients;
  nf.residuals = ef.residuals;
  nf.ecdf_at_residuals = ranks(nf.residuals) / static_cast<double>(n + 1);
  nf.s_wn = w.transpose() * w / static_cast<double>(n);
  nf.c_phi_hat = ef.scale;
  nf.bandwidth = silverman_bandwidth(nf.residuals, config.bandwidth_mult);
  if (nf.bandwidth > 0.0) {
    nf.density_at_residuals = density_at_samples(nf.residuals, nf.bandwidth, config.kernel);
  } else {
    nf.density_at_residuals = Vector::Zero(n);
  }
  return nf;
}

Vector tau_grid(const Dataset& data, double q_lo, double q_hi) {
  const Vector& z = data.z();
  std::vector<double> sorted(z.data(), z.data() + z.size());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted_quantile(sorted, q_lo);
  const double hi = sorted_quantile(sorted, q_hi);
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> grid;
  for (const double v : sorted) {
    if (v >= lo && v <= hi) grid.push_back(v);
  }
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "tau grid is empty");
  return Eigen::Map<const Vector>(grid.data(), static_cast<Eigen::Index>(grid.size()));
}

Vector rn_process(const NullFit& null_fit, const Dataset& data, const Vector& grid) {
  if (grid.size() == 0) throw Error(ErrorKind::InvalidArgument, "tau grid is empty");
  if (grid.minCoeff() < data.z_min() || grid.maxCoeff() > data.z_max()) {
    throw Error(ErrorKind::InvalidArgument, "tau grid leaves the range of z");
  }
  const auto n = data.n();
  if (null_fit.ecdf_at_residuals.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "null fit does not belong to this dataset");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return data.z()[a] < data.z()[b]; });
  // prefix sums of a_i and a_i z_i in z order
  std::vector<double> zs(order.size()), sum_a(order.size() + 1, 0.0), sum_az(order.size() + 1, 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = order[k];
    const double a = kSqrt12 * (null_fit.ecdf_at_residuals[i] - 0.5);
    zs[k] = data.z()[i];
    sum_a[k + 1] = sum_a[k] + a;
    sum_az[k + 1] = sum_az[k] + a * zs[k];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Vector path(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const auto m = static_cast<std::size_t>(std::upper_bound(zs.begin(), zs.end(), grid[g]) - zs.begin());
    path[g] = scale * (sum_az[m] - grid[g] * sum_a[m]);
  }
  return path;
}

double test_statistic(const Eigen::Ref<const Vector>& path) {
  if (path.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty process path");
  return path.cwiseAbs().maxCoeff();
}

CusumTestResult wild_bootstrap(const NullFit& null_fit, const Dataset& data,
                               const TestConfig& config) {
  return wild_bootstrap(null_fit, data, config, [&](int j, Eigen::Ref<Vector> u) {
    draw_wild_multipliers(config.seed, j, u);
  });
}

CusumTestResult wild_bootstrap(const NullFit& null_fit, const Dataset& data,
                               const TestConfig& config, const MultiplierFn& multipliers) {
  config.validate();
  const auto n = data.n();
  const double nn = static_cast<double>(n);
  const Vector grid = tau_grid(data, config.q_lo, config.q_hi);
  Vector path = rn_process(null_fit, data, grid);

  const Matrix w = detail::null_design(data);
  const Matrix s_inv = detail::inverse_s_wn(null_fit.s_wn);
  const Matrix h = detail::cusum_weights(data, grid);
  // S1n(tau_g)' = n^{-1} sum_i sqrt(12) fhat_i (z_i - tau_g) I(z_i <= tau_g) W_i'
  const Matrix weighted_w = (kSqrt12 * null_fit.density_at_residuals).asDiagonal() * w;
  const Matrix s1 = h * weighted_w / nn;
  const Matrix correction = null_fit.c_phi_hat * s1 * s_inv * w.transpose();
  const Vector score = kSqrt12 * (null_fit.ecdf_at_residuals.array() - 0.5).matrix();
  const Matrix m = (h - correction) * score.asDiagonal() / std::sqrt(nn);

  Vector stats = detail::bootstrap_sup(m, config, multipliers);
  return detail::finish_test(grid, std::move(path), std::move(stats), config, null_fit.bandwidth);
}

CusumTestResult run_cusum_test(const Dataset& data, const TestConfig& config) {
  return wild_bootstrap(fit_null(data, config), data, config);
}

}  // namespace bentrank
