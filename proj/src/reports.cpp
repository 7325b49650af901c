#include "bentrank/reports.hpp"

#include "bentrank/csv_io.hpp"
#include "bentrank/error.hpp"

#include <chrono>
#include <ctime>
#include <istream>
#include <ostream>

namespace bentrank {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

std::string kernel_name(KernelKind k) {
  return k == KernelKind::Epanechnikov ? "epanechnikov" : "gaussian";
}

std::string score_name(ScoreFunction s) { return s.kind == ScoreKind::Wilcoxon ? "wilcoxon" : "sign"; }

}  // namespace

std::string version() { return "1.0.0"; }

std::string to_string(Method method) { return method == Method::Rank ? "rank" : "ls"; }

Method parse_method(const std::string& name) {
  if (name == "rank") return Method::Rank;
  if (name == "ls") return Method::LeastSquares;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + name + "'");
}

std::vector<std::string> parameter_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("alpha" + std::to_string(j));
  names.insert(names.end(), {"beta", "gamma", "tau"});
  return names;
}

std::vector<ParamRow> parameter_rows(const std::string& method, const BentLineFit& fit) {
  const auto p = fit.params.alpha.size();
  const auto names = parameter_names(p);
  const Vector se = fit.standard_errors();
  std::vector<ParamRow> rows;
  for (Eigen::Index j = 0; j < p + 2; ++j) {
    const double est = j < p ? fit.params.alpha[j] : (j == p ? fit.params.beta : fit.params.gamma);
    const auto ci = fit.coefficient_ci(j);
    rows.push_back({method, names[static_cast<std::size_t>(j)], est, se[j], ci.first, ci.second});
  }
  rows.push_back({method, "tau", fit.params.tau, fit.se_tau, fit.ci_tau.first, fit.ci_tau.second});
  return rows;
}

void write_params_csv(std::ostream& out, const std::vector<ParamRow>& rows) {
  out << "method,parameter,estimate,se,ci_lower,ci_upper\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.parameter << ',' << format_double(r.estimate) << ','
        << format_double(r.se) << ',' << format_double(r.ci_lower) << ','
        << format_double(r.ci_upper) << '\n';
  }
}

std::vector<ParamRow> read_params_csv(std::istream& in) {
  const CsvTable table = parse_csv(in);
  const std::size_t cm = table.column("method"), cp = table.column("parameter"),
                    ce = table.column("estimate"), cs = table.column("se"),
                    cl = table.column("ci_lower"), cu = table.column("ci_upper");
  std::vector<ParamRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    ParamRow row{r[cm], r[cp]};
    const auto number = [&](std::size_t c, double& out) {
      if (!parse_number(r[c], out)) {
        throw Error(ErrorKind::Parse, "row " + std::to_string(i + 2) + ", column '" +
                                          table.header[c] + "': not a number");
      }
    };
    number(ce, row.estimate);
    number(cs, row.se);
    number(cl, row.ci_lower);
    number(cu, row.ci_upper);
    rows.push_back(std::move(row));
  }
  return rows;
}

BentLineParams params_from_rows(const std::vector<ParamRow>& rows, const std::string& method) {
  std::vector<std::pair<std::string, double>> mine;
  for (const auto& r : rows) {
    if (r.method == method) mine.emplace_back(r.parameter, r.estimate);
  }
  const auto find = [&](const std::string& name) {
    for (const auto& [k, v] : mine) {
      if (k == name) return v;
    }
    throw Error(ErrorKind::Parse, "parameter '" + name + "' missing for method '" + method + "'");
  };
  Eigen::Index p = 0;
  while (true) {
    const std::string name = "alpha" + std::to_string(p);
    bool present = false;
    for (const auto& kv : mine) present = present || kv.first == name;
    if (!present) break;
    ++p;
  }
  BentLineParams params;
  params.alpha.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) params.alpha[j] = find("alpha" + std::to_string(j));
  params.beta = find("beta");
  params.gamma = find("gamma");
  params.tau = find("tau");
  return params;
}

Vector curve_grid(const Dataset& data, int points) {
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "a curve needs at least 2 points");
  return Vector::LinSpaced(points, data.z_min(), data.z_max());
}

Vector covariate_means(const Dataset& data) { return data.x().colwise().mean().transpose(); }

void write_curve_csv(std::ostream& out, const Dataset& data, const std::vector<CurveSeries>& series,
                     int points) {
  const Vector grid = curve_grid(data, points);
  const Vector xbar = covariate_means(data);
  out << "method,z";
  for (Eigen::Index j = 0; j < xbar.size(); ++j) out << ",x" << j;
  out << ",fitted\n";
  for (const auto& s : series) {
    for (const double z : grid) {
      out << s.method << ',' << format_double(z);
      for (const double x : xbar) out << ',' << format_double(x);
      out << ',' << format_double(predict(s.params, xbar, z)) << '\n';
    }
  }
}

void write_test_summary_csv(std::ostream& out, const std::vector<TestReport>& tests) {
  out << "method,statistic,p_value,nb,bandwidth,seed\n";
  for (const auto& t : tests) {
    out << t.method << ',' << format_double(t.result.t_n) << ',' << format_double(t.result.p_value)
        << ',' << t.result.nb << ',' << format_double(t.result.bandwidth) << ',' << t.result.seed
        << '\n';
  }
}

void write_test_path_csv(std::ostream& out, const std::vector<TestReport>& tests) {
  out << "method,tau,r_n\n";
  for (const auto& t : tests) {
    for (Eigen::Index k = 0; k < t.result.tau_grid.size(); ++k) {
      out << t.method << ',' << format_double(t.result.tau_grid[k]) << ','
          << format_double(t.result.r_n_path[k]) << '\n';
    }
  }
}

void write_bootstrap_csv(std::ostream& out, const std::vector<TestReport>& tests) {
  out << "method,replicate,statistic\n";
  for (const auto& t : tests) {
    for (Eigen::Index b = 0; b < t.result.bootstrap_stats.size(); ++b) {
      out << t.method << ',' << b << ',' << format_double(t.result.bootstrap_stats[b]) << '\n';
    }
  }
}

void write_cv_csv(std::ostream& out, const std::vector<CvReport>& reports) {
  out << "method,fold,size,sse\n";
  for (const auto& r : reports) {
    std::size_t total = 0;
    for (std::size_t f = 0; f < r.error.per_fold.size(); ++f) {
      out << r.method << ',' << f << ',' << r.error.fold_sizes[f] << ','
          << format_double(r.error.per_fold[f]) << '\n';
      total += r.error.fold_sizes[f];
    }
    out << r.method << ",total," << total << ',' << format_double(r.error.total) << '\n';
  }
}

void write_estimation_csv(std::ostream& out, const std::vector<EstimationReport>& reports) {
  out << "case,method,parameter,truth,used,failures,bias,sd,ese,mse,cp,al\n";
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows) {
      out << to_string(rep.scenario.error) << ',' << r.method << ',' << r.parameter << ','
          << format_double(r.truth) << ',' << r.used << ',' << r.failures << ',' << cell(r.bias)
          << ',' << cell(r.sd) << ',' << cell(r.ese) << ',' << cell(r.mse) << ',' << cell(r.cp)
          << ',' << cell(r.al) << '\n';
    }
  }
}

void write_test_study_csv(std::ostream& out, const std::vector<TestCell>& cells) {
  out << "case,method,gamma,reps,rejections,failures,rejection_rate\n";
  for (const auto& c : cells) {
    out << to_string(c.error) << ',' << to_string(c.method) << ',' << format_double(c.gamma) << ','
        << c.reps << ',' << c.rejections << ',' << c.failures << ','
        << format_double(c.rejection_rate) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepSeries>& sweeps) {
  out << "case,c,reps,rejections,size\n";
  for (const auto& s : sweeps) {
    for (const auto& p : s.points) {
      out << to_string(s.error) << ',' << format_double(p.c) << ',' << p.reps << ','
          << p.rejections << ',' << format_double(p.size) << '\n';
    }
  }
}

Json to_json(const FitConfig& config) {
  Json j;
  j["tau_init"] = optional_json(config.tau_init);
  j["eta_init"] = config.eta_init;
  j["tol"] = config.tol;
  j["max_iter"] = config.max_iter;
  j["ci_level"] = config.ci_level;
  j["gamma_floor"] = config.gamma_floor;
  j["damping"] = config.damping;
  j["score"] = score_name(config.score);
  return j;
}

Json to_json(const TestConfig& config) {
  Json j;
  j["nb"] = config.nb;
  j["bandwidth_mult"] = config.bandwidth_mult;
  j["kernel"] = kernel_name(config.kernel);
  j["q_lo"] = config.q_lo;
  j["q_hi"] = config.q_hi;
  j["seed"] = config.seed;
  return j;
}

Json to_json(const SimScenario& s) {
  Json j;
  j["n"] = s.n;
  j["reps"] = s.reps;
  j["case"] = to_string(s.error);
  j["contamination"] = s.contamination;
  j["alpha"] = vector_json(s.truth.alpha);
  j["beta"] = s.truth.beta;
  j["gamma"] = s.effective_gamma();
  j["tau"] = s.truth.tau;
  j["z_range"] = {s.z_lo, s.z_hi};
  j["local_alternative_a_n"] = s.local_alt ? Json(s.local_alt->a_n) : Json(nullptr);
  j["seed"] = s.seed;
  j["scenario_id"] = s.scenario_id;
  return j;
}

Json to_json(const BentLineFit& fit, const std::string& method) {
  Json j;
  j["method"] = method;
  Json params = Json::array();
  for (const auto& r : parameter_rows(method, fit)) {
    params.push_back({{"parameter", r.parameter},
                      {"estimate", r.estimate},
                      {"se", r.se},
                      {"ci_lower", r.ci_lower},
                      {"ci_upper", r.ci_upper}});
  }
  j["parameters"] = std::move(params);
  j["ci_level"] = fit.ci_level;
  j["eta_final"] = fit.eta_final;
  j["scale"] = fit.scale;
  j["objective"] = fit.objective;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["covariance_alpha_beta_gamma_eta"] = matrix_json(fit.covariance);
  return j;
}

Json to_json(const TestReport& t) {
  Json j;
  j["method"] = t.method;
  j["statistic"] = t.result.t_n;
  j["p_value"] = t.result.p_value;
  j["nb"] = t.result.nb;
  j["bandwidth"] = t.result.bandwidth;
  j["seed"] = t.result.seed;
  j["tau_grid"] = vector_json(t.result.tau_grid);
  j["r_n_path"] = vector_json(t.result.r_n_path);
  j["bootstrap_statistics"] = vector_json(t.result.bootstrap_stats);
  return j;
}

Json to_json(const CvReport& cv) {
  Json j;
  j["method"] = cv.method;
  j["per_fold"] = cv.error.per_fold;
  j["fold_sizes"] = cv.error.fold_sizes;
  j["total"] = cv.error.total;
  j["all_converged"] = cv.error.all_converged;
  return j;
}

Json to_json(const EstimationReport& report) {
  Json j;
  j["scenario"] = to_json(report.scenario);
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"parameter", r.parameter},
                    {"truth", r.truth},
                    {"used", r.used},
                    {"failures", r.failures},
                    {"bias", optional_json(r.bias)},
                    {"sd", optional_json(r.sd)},
                    {"ese", optional_json(r.ese)},
                    {"mse", optional_json(r.mse)},
                    {"cp", optional_json(r.cp)},
                    {"al", optional_json(r.al)}});
  }
  j["metrics"] = std::move(rows);
  return j;
}

Json to_json(const TestCell& c) {
  return {{"case", to_string(c.error)},   {"method", to_string(c.method)},
          {"gamma", c.gamma},             {"reps", c.reps},
          {"rejections", c.rejections},   {"failures", c.failures},
          {"rejection_rate", c.rejection_rate}};
}

Json to_json(const SweepSeries& s) {
  Json points = Json::array();
  for (const auto& p : s.points) {
    points.push_back({{"c", p.c}, {"reps", p.reps}, {"rejections", p.rejections}, {"size", p.size}});
  }
  return {{"case", to_string(s.error)}, {"points", std::move(points)}};
}

Json envelope(const std::string& command, std::uint64_t seed, Json config, Json results,
              const std::string& timestamp) {
  Json j;
  Json meta;
  meta["tool"] = "bentrank";
  meta["version"] = version();
  if (!timestamp.empty()) meta["timestamp"] = timestamp;
  j["metadata"] = std::move(meta);
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = std::move(config);
  j["results"] = std::move(results);
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace bentrank
