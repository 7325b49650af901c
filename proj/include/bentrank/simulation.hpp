#pragma once

#include "bentrank/bent_line.hpp"
#include "bentrank/cusum_test.hpp"
#include "bentrank/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bentrank {

enum class ErrorLaw { Normal, T3, ContaminatedNormal };

std::string to_string(ErrorLaw law);
ErrorLaw parse_error_law(const std::string& name);

/// Hinge coefficient shrunk to gamma * a_n / sqrt(n).
struct LocalAlternative {
  double a_n = 1.0;
};

/// Monte Carlo design: y = alpha0 + beta z + gamma (z - tau)_+ + e with
/// z ~ Uniform(z_lo, z_hi).
struct SimScenario {
  int n = 200;
  int reps = 1000;
  ErrorLaw error = ErrorLaw::Normal;
  /// Probability that a ContaminatedNormal error is standard Cauchy.
  double contamination = 0.10;
  BentLineParams truth{Vector::Constant(1, 3.0), 2.5, -4.0, 0.5};
  double z_lo = -2.0;
  double z_hi = 2.0;
  std::optional<double> gamma_override;
  std::optional<LocalAlternative> local_alt;
  std::uint64_t seed = 1;
  /// Separates the random streams of scenarios sharing a seed.
  std::uint64_t scenario_id = 0;

  double effective_gamma() const;
  void validate() const;
};

/// One error draw from the scenario's law.
double draw_error(ErrorLaw law, double contamination, Rng& rng);

/// Replicate rep of the scenario; depends only on (seed, scenario_id, rep).
Dataset generate(const SimScenario& scenario, int rep);

/// Per-parameter Monte Carlo summary. Metrics are empty when no replicate
/// (or, for sd, fewer than two) succeeded.
struct MetricRow {
  std::string method;
  std::string parameter;
  double truth = 0.0;
  int used = 0;
  int failures = 0;
  std::optional<double> bias, sd, ese, mse, cp, al;
};

struct ReplicateEstimate {
  bool ok = false;
  /// (alpha, beta, gamma, tau) and matching standard errors.
  Vector estimates;
  Vector standard_errors;
  std::string failure;
};

struct EstimationReport {
  SimScenario scenario;
  std::vector<MetricRow> rows;
  std::vector<ReplicateEstimate> rank;
  std::vector<ReplicateEstimate> ls;
};

/// Fits both estimators on every replicate and summarizes Bias, SD, ESE,
/// MSE, CP and AL per parameter. Non-converged fits count as failures and
/// are excluded from the metrics.
EstimationReport run_estimation_study(const SimScenario& scenario, const FitConfig& fit = {},
                                      int threads = 1);

struct TestCell {
  ErrorLaw error = ErrorLaw::Normal;
  double gamma = 0.0;
  Method method = Method::Rank;
  int reps = 0;
  int rejections = 0;
  int failures = 0;
  double rejection_rate = 0.0;
};

struct TestStudyConfig {
  int n = 200;
  int reps = 1000;
  std::vector<ErrorLaw> cases{ErrorLaw::Normal, ErrorLaw::T3, ErrorLaw::ContaminatedNormal};
  std::vector<double> gammas{-2.0, -1.0, 0.0, 1.0, 2.0};
  double alpha = 0.05;
  bool include_ls = true;
  std::optional<LocalAlternative> local_alt;
  TestConfig test;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Rejection rate (p-value < alpha) of each test for every (case, gamma) cell.
std::vector<TestCell> run_test_study(const TestStudyConfig& config);

/// p-values of the rank test over the replicates of one cell.
std::vector<double> test_p_values(const SimScenario& scenario, const TestConfig& test,
                                  int threads = 1);

struct SweepPoint {
  double c = 0.0;
  int reps = 0;
  int rejections = 0;
  double size = 0.0;
};

struct SweepSeries {
  ErrorLaw error = ErrorLaw::Normal;
  std::vector<SweepPoint> points;
};

/// Type I error of the rank test under gamma = 0 for each bandwidth
/// multiplier c, on the same replicates for every c.
SweepSeries bandwidth_sweep(ErrorLaw law, const std::vector<double>& c_values, int reps,
                            const TestStudyConfig& base);

struct SimReport {
  std::vector<EstimationReport> estimation;
  std::vector<TestCell> tests;
  std::vector<SweepSeries> sweeps;
};

}  // namespace bentrank
