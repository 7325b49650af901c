#pragma once

#include "bentrank/dataset.hpp"
#include "bentrank/random.hpp"

#include <random>

namespace bentrank::testing {

/// Bent line with intercept column; z evenly spaced over [lo, hi] and
/// optional N(0, sd^2) noise.
inline Dataset bent_data(int n, double a0, double beta, double gamma, double tau, double sd,
                         std::uint64_t seed = 1, double lo = -2.0, double hi = 2.0) {
  Rng rng = make_rng(seed, 99, 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Vector y(n), z(n);
  Matrix x = Matrix::Ones(n, 1);
  const BentLineParams truth{Vector::Constant(1, a0), beta, gamma, tau};
  for (int i = 0; i < n; ++i) {
    z[i] = lo + (hi - lo) * (i + 0.5) / n;
    y[i] = predict(truth, x.row(i).transpose(), z[i]) + sd * noise(rng);
  }
  return validate_dataset(y, x, z);
}

inline Vector normal_vector(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 98, 0);
  std::normal_distribution<double> d(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace bentrank::testing
