#include "bentrank/ls_baseline.hpp"

#include "bootstrap.hpp"
#include "segmented.hpp"

#include <cmath>

namespace bentrank {

LsFit fit_ls_bent_line(const Dataset& data, const FitConfig& config) {
  const auto engine = detail::make_ls_engine();
  return detail::fit_segmented(data, config, *engine);
}

Vector ls_rn_process(const Dataset& data, const Vector& grid) {
  const Matrix w = detail::null_design(data);
  const auto engine = detail::make_ls_engine();
  const Vector residuals = engine->fit(data.y(), w).residuals;
  const Matrix h = detail::cusum_weights(data, grid);
  return h * residuals / std::sqrt(static_cast<double>(data.n()));
}

CusumTestResult ls_cusum_test(const Dataset& data, const TestConfig& config) {
  return ls_cusum_test(data, config, [&](int j, Eigen::Ref<Vector> u) {
    draw_wild_multipliers(config.seed, j, u);
  });
}

CusumTestResult ls_cusum_test(const Dataset& data, const TestConfig& config,
                              const MultiplierFn& multipliers) {
  config.validate();
  const double nn = static_cast<double>(data.n());
  const Vector grid = tau_grid(data, config.q_lo, config.q_hi);
  Vector path = ls_rn_process(data, grid);

  const Matrix w = detail::null_design(data);
  const Matrix s_inv = detail::inverse_s_wn(w.transpose() * w / nn);
  const Matrix h = detail::cusum_weights(data, grid);
  const Matrix s1 = h * w / nn;
  const Matrix m = (h - s1 * s_inv * w.transpose()) / std::sqrt(nn);

  Vector stats = detail::bootstrap_sup(m, config, multipliers);
  return detail::finish_test(grid, std::move(path), std::move(stats), config, 0.0);
}

}  // namespace bentrank
