#pragma once

#include "bentrank/bent_line.hpp"
#include "linear_engine.hpp"

#include <vector>

namespace bentrank::detail {

/// X, Z, (Z - tau)_+
Matrix base_design(const Dataset& data, double tau);

/// Throws Unidentified unless at least 3 observations lie on each side of tau.
void require_strata(const Dataset& data, double tau);

double profile_objective(const Dataset& data, double tau, const LinearEngine& engine);

/// Deciles of z (10% to 90%) leaving at least 3 observations on each side.
std::vector<double> decile_starts(const Dataset& data);

/// Iterative linear reparameterization shared by the rank and LS fits.
BentLineFit fit_segmented(const Dataset& data, const FitConfig& config,
                          const LinearEngine& engine);

}  // namespace bentrank::detail
