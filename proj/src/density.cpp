#include "bentrank/density.hpp"

#include "bentrank/error.hpp"

#include <cmath>
#include <numbers>

namespace bentrank {

double kernel(KernelKind kind, double u) {
  switch (kind) {
    case KernelKind::Epanechnikov: return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelKind::Gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  }
  return 0.0;
}

Vector density_at_samples(const Eigen::Ref<const Vector>& sample, double bandwidth,
                          KernelKind kind) {
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  const auto n = sample.size();
  Vector f = Vector::Constant(n, kernel(kind, 0.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = kernel(kind, (sample[i] - sample[j]) / bandwidth);
      f[i] += k;
      f[j] += k;
    }
  }
  return f / (static_cast<double>(n) * bandwidth);
}

double density_at(const Eigen::Ref<const Vector>& sample, double t, double bandwidth,
                  KernelKind kind) {
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  double s = 0.0;
  for (Eigen::Index j = 0; j < sample.size(); ++j) s += kernel(kind, (t - sample[j]) / bandwidth);
  return s / (static_cast<double>(sample.size()) * bandwidth);
}

}  // namespace bentrank
