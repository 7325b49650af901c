#pragma once

#include "bentrank/dataset.hpp"

namespace bentrank {

enum class KernelKind { Epanechnikov, Gaussian };

double kernel(KernelKind kind, double u);

/// fhat(x_i) = n^{-1} sum_j K_h(x_i - x_j) at every sample point.
Vector density_at_samples(const Eigen::Ref<const Vector>& sample, double bandwidth,
                          KernelKind kind = KernelKind::Epanechnikov);

/// fhat(t) at an arbitrary point.
double density_at(const Eigen::Ref<const Vector>& sample, double t, double bandwidth,
                  KernelKind kind = KernelKind::Epanechnikov);

}  // namespace bentrank
