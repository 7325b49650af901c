#pragma once

#include "bentrank/bent_line.hpp"
#include "bentrank/cusum_test.hpp"

namespace bentrank {

/// Least-squares fit; `scale` holds the residual standard deviation and
/// `objective` the residual sum of squares.
using LsFit = BentLineFit;

/// Segmented least-squares estimator: the same iteration as fit_bent_line
/// with ordinary least squares in place of the rank fit. Covariance is
/// sigma^2 (D'D)^{-1} on the final linearized design D.
LsFit fit_ls_bent_line(const Dataset& data, const FitConfig& config = {});

/// CUSUM test built on the least-squares null fit. The bootstrap process
/// carries no residual weighting, density or scale terms.
CusumTestResult ls_cusum_test(const Dataset& data, const TestConfig& config = {});
CusumTestResult ls_cusum_test(const Dataset& data, const TestConfig& config,
                              const MultiplierFn& multipliers);

/// Observed least-squares process n^{-1/2} sum_i e_i (z_i - tau) I(z_i <= tau)
/// for OLS residuals e of y on (X, Z).
Vector ls_rn_process(const Dataset& data, const Vector& grid);

}  // namespace bentrank
