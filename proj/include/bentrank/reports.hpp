#pragma once

#include "bentrank/bent_line.hpp"
#include "bentrank/cusum_test.hpp"
#include "bentrank/simulation.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace bentrank {

using Json = nlohmann::ordered_json;

std::string version();
std::string to_string(Method method);
Method parse_method(const std::string& name);

/// One line of the parameter table.
struct ParamRow {
  std::string method;
  std::string parameter;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

/// Names alpha0..alpha{p-1}, beta, gamma, tau.
std::vector<std::string> parameter_names(Eigen::Index p);

/// Rows for (alpha, beta, gamma, tau) with Wald intervals at the fit's level.
std::vector<ParamRow> parameter_rows(const std::string& method, const BentLineFit& fit);

/// Header: method,parameter,estimate,se,ci_lower,ci_upper
void write_params_csv(std::ostream& out, const std::vector<ParamRow>& rows);
std::vector<ParamRow> read_params_csv(std::istream& in);

/// Parameters of one method rebuilt from table rows; throws Parse when a
/// parameter is missing.
BentLineParams params_from_rows(const std::vector<ParamRow>& rows, const std::string& method);

/// Evenly spaced z values spanning the observed range.
Vector curve_grid(const Dataset& data, int points = 200);

/// Column means of X, the covariate profile the fitted curve is drawn at.
Vector covariate_means(const Dataset& data);

struct CurveSeries {
  std::string method;
  BentLineParams params;
};

/// Header: method,z,x0..x{p-1},fitted. Every row uses x = covariate_means.
void write_curve_csv(std::ostream& out, const Dataset& data, const std::vector<CurveSeries>& series,
                     int points = 200);

struct TestReport {
  std::string method;
  CusumTestResult result;
};

/// Header: method,statistic,p_value,nb,bandwidth,seed
void write_test_summary_csv(std::ostream& out, const std::vector<TestReport>& tests);
/// Header: method,tau,r_n
void write_test_path_csv(std::ostream& out, const std::vector<TestReport>& tests);
/// Header: method,replicate,statistic
void write_bootstrap_csv(std::ostream& out, const std::vector<TestReport>& tests);

struct CvReport {
  std::string method;
  PredictionError error;
};

/// Header: method,fold,size,sse. A final row per method carries fold=total.
void write_cv_csv(std::ostream& out, const std::vector<CvReport>& reports);

/// Header: case,method,parameter,truth,used,failures,bias,sd,ese,mse,cp,al.
/// Absent metrics are empty cells.
void write_estimation_csv(std::ostream& out, const std::vector<EstimationReport>& reports);
/// Header: case,method,gamma,reps,rejections,failures,rejection_rate
void write_test_study_csv(std::ostream& out, const std::vector<TestCell>& cells);
/// Header: case,c,reps,rejections,size
void write_sweep_csv(std::ostream& out, const std::vector<SweepSeries>& sweeps);

Json to_json(const FitConfig& config);
Json to_json(const TestConfig& config);
Json to_json(const SimScenario& scenario);
Json to_json(const BentLineFit& fit, const std::string& method);
Json to_json(const TestReport& test);
Json to_json(const CvReport& cv);
Json to_json(const EstimationReport& report);
Json to_json(const TestCell& cell);
Json to_json(const SweepSeries& sweep);

/// {"metadata": {tool, version, timestamp}, "command", "seed", "config",
/// "results"}. The timestamp is the only non-deterministic field and is
/// omitted when `timestamp` is empty.
Json envelope(const std::string& command, std::uint64_t seed, Json config, Json results,
              const std::string& timestamp);

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace bentrank
