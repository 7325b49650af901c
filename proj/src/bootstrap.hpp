#pragma once

#include "bentrank/cusum_test.hpp"

namespace bentrank::detail {

/// Columns of W = (X, Z).
Matrix null_design(const Dataset& data);

/// H(g, i) = (z_i - tau_g) I(z_i <= tau_g)
Matrix cusum_weights(const Dataset& data, const Vector& grid);

/// S_wn^{-1} through a Cholesky factorization; throws when singular.
Matrix inverse_s_wn(const Matrix& s_wn);

/// sup_g |(M u_j)_g| for each replicate j, where each row of M already
/// carries the n^{-1/2} factor.
Vector bootstrap_sup(const Matrix& m, const TestConfig& config, const MultiplierFn& multipliers);

/// Assembles the result record and the p-value.
CusumTestResult finish_test(const Vector& grid, Vector path, Vector stats,
                            const TestConfig& config, double bandwidth);

}  // namespace bentrank::detail
