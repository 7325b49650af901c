#include "bentrank/cli.hpp"

#include "bentrank/csv_io.hpp"
#include "bentrank/error.hpp"
#include "bentrank/ls_baseline.hpp"
#include "bentrank/parallel.hpp"
#include "bentrank/reports.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace bentrank {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string input;
  std::string response;
  std::string threshold;
  std::vector<std::string> covariates;
  bool no_intercept = false;
  /// Empty until parsed; the default depends on the command.
  std::string method;
  bool run_test = false;
  int nb = 1000;
  double bandwidth_mult = 1.06;
  std::string kernel = "epanechnikov";
  int kfold = 5;
  double ci_level = 0.95;
  std::optional<double> tau_init;
  double tol = 1e-5;
  int max_iter = 100;
  std::string score = "wilcoxon";
  std::uint64_t seed = 20160607;
  int threads = 0;
  std::string out = ".";
  std::vector<std::string> formats{"csv", "json"};
  bool no_timestamp = false;

  // simulate and sweep
  std::vector<std::string> cases{"normal", "t3", "contaminated"};
  int n = 200;
  /// Zero until parsed; the default depends on the command.
  int reps = 0;
  std::vector<double> gammas{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::string study = "both";
  double alpha = 0.05;
  double contamination = 0.10;
  std::vector<double> c_values{0.1, 0.25, 0.5, 0.75, 1.06, 1.5, 2.0};
};

class CommandError : public Error {
 public:
  CommandError(const Error& e, std::string hint) : Error(e.kind(), e.what()), hint_(std::move(hint)) {}
  const std::string& hint() const { return hint_; }

 private:
  std::string hint_;
};

bool wants(const Options& o, const std::string& format) {
  return std::find(o.formats.begin(), o.formats.end(), format) != o.formats.end();
}

std::vector<Method> methods(const Options& o) {
  if (o.method == "both") return {Method::Rank, Method::LeastSquares};
  return {parse_method(o.method)};
}

int thread_count(const Options& o) { return o.threads > 0 ? o.threads : default_threads(); }

FitConfig fit_config(const Options& o) {
  FitConfig c;
  c.tau_init = o.tau_init;
  c.tol = o.tol;
  c.max_iter = o.max_iter;
  c.ci_level = o.ci_level;
  c.score = o.score == "sign" ? ScoreFunction::sign() : ScoreFunction::wilcoxon();
  c.validate();
  return c;
}

TestConfig test_config(const Options& o) {
  TestConfig t;
  t.nb = o.nb;
  t.bandwidth_mult = o.bandwidth_mult;
  t.kernel = o.kernel == "gaussian" ? KernelKind::Gaussian : KernelKind::Epanechnikov;
  t.seed = o.seed;
  t.threads = thread_count(o);
  t.validate();
  return t;
}

Dataset load(const Options& o) {
  if (o.input.empty()) throw Error(ErrorKind::InvalidArgument, "--input is required");
  if (o.response.empty() || o.threshold.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--response and --threshold are required");
  }
  ColumnMapping m;
  m.response = o.response;
  m.threshold = o.threshold;
  m.covariates = o.covariates;
  m.intercept = !o.no_intercept;
  return ingest_csv(o.input, m);
}

Json data_json(const Options& o, const Dataset& d) {
  return {{"input", o.input},         {"response", o.response},  {"threshold", o.threshold},
          {"covariates", o.covariates}, {"intercept", !o.no_intercept}, {"n", d.n()},
          {"p", d.p()}};
}

std::ofstream open_output(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / name;
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return f;
}

void write_json(const Options& o, const std::string& name, const std::string& command,
                Json config, Json results) {
  auto f = open_output(o, name);
  const std::string ts = o.no_timestamp ? std::string() : utc_timestamp();
  f << envelope(command, o.seed, std::move(config), std::move(results), ts).dump(2) << '\n';
}

std::vector<TestReport> run_tests(const Options& o, const Dataset& d) {
  const TestConfig t = test_config(o);
  std::vector<TestReport> reports;
  for (const Method m : methods(o)) {
    reports.push_back({to_string(m), m == Method::Rank ? run_cusum_test(d, t) : ls_cusum_test(d, t)});
  }
  return reports;
}

void emit_tests(const Options& o, const std::vector<TestReport>& tests, Json& results) {
  if (wants(o, "csv")) {
    auto s = open_output(o, "test_summary.csv");
    write_test_summary_csv(s, tests);
    auto p = open_output(o, "test_path.csv");
    write_test_path_csv(p, tests);
    auto b = open_output(o, "test_bootstrap.csv");
    write_bootstrap_csv(b, tests);
  }
  Json arr = Json::array();
  for (const auto& t : tests) arr.push_back(to_json(t));
  results["tests"] = std::move(arr);
}

int cmd_fit(const Options& o, std::ostream& out) {
  const Dataset d = load(o);
  const FitConfig config = fit_config(o);
  Json results;
  if (o.run_test) {
    const auto tests = run_tests(o, d);
    emit_tests(o, tests, results);
    for (const auto& t : tests) out << t.method << " test: p = " << t.result.p_value << '\n';
  }
  std::vector<ParamRow> rows;
  std::vector<CurveSeries> curves;
  Json fits = Json::array();
  std::vector<std::string> unconverged;
  for (const Method m : methods(o)) {
    BentLineFit fit;
    try {
      fit = m == Method::Rank ? fit_bent_line(d, config) : fit_ls_bent_line(d, config);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Unidentified) {
        throw CommandError(e, "run `bentrank test` on the same data to check for a change point "
                              "before fitting the bent line");
      }
      throw;
    }
    const auto name = to_string(m);
    auto r = parameter_rows(name, fit);
    rows.insert(rows.end(), r.begin(), r.end());
    curves.push_back({name, fit.params});
    fits.push_back(to_json(fit, name));
    if (!fit.converged) unconverged.push_back(name);
    for (const auto& row : r) {
      out << name << ' ' << row.parameter << " = " << row.estimate << " (se " << row.se << ")\n";
    }
  }
  results["fits"] = std::move(fits);
  if (wants(o, "csv")) {
    auto p = open_output(o, "params.csv");
    write_params_csv(p, rows);
    auto c = open_output(o, "curve.csv");
    write_curve_csv(c, d, curves);
  }
  if (wants(o, "json")) {
    Json echo{{"data", data_json(o, d)}, {"fit", to_json(config)}, {"method", o.method}};
    if (o.run_test) echo["test"] = to_json(test_config(o));
    write_json(o, "fit.json", "fit", std::move(echo), std::move(results));
  }
  if (!unconverged.empty()) {
    std::string which;
    for (const auto& u : unconverged) which += (which.empty() ? "" : ", ") + u;
    throw CommandError(Error(ErrorKind::NotConverged,
                             "fit did not converge within " + std::to_string(o.max_iter) +
                                 " iterations for: " + which),
                       "outputs were written; raise --max-iter or supply --tau-init");
  }
  return 0;
}

int cmd_test(const Options& o, std::ostream& out) {
  const Dataset d = load(o);
  const auto tests = run_tests(o, d);
  Json results;
  emit_tests(o, tests, results);
  for (const auto& t : tests) {
    out << t.method << ": T_n = " << t.result.t_n << ", p = " << t.result.p_value << '\n';
  }
  if (wants(o, "json")) {
    Json config{{"data", data_json(o, d)}, {"test", to_json(test_config(o))}, {"method", o.method}};
    write_json(o, "test.json", "test", std::move(config), std::move(results));
  }
  return 0;
}

int cmd_cv(const Options& o, std::ostream& out) {
  const Dataset d = load(o);
  const FitConfig config = fit_config(o);
  std::vector<CvReport> reports;
  for (const Method m : methods(o)) {
    reports.push_back({to_string(m), kfold_prediction_error(d, o.kfold, config, o.seed, m)});
    out << to_string(m) << ": PE = " << reports.back().error.total << '\n';
  }
  if (wants(o, "csv")) {
    auto f = open_output(o, "cv.csv");
    write_cv_csv(f, reports);
  }
  if (wants(o, "json")) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    Json echo{{"data", data_json(o, d)}, {"fit", to_json(config)}, {"kfold", o.kfold},
              {"method", o.method}};
    write_json(o, "cv.json", "cv", std::move(echo), Json{{"cv", std::move(arr)}});
  }
  return 0;
}

std::vector<ErrorLaw> laws(const Options& o) {
  std::vector<ErrorLaw> out;
  for (const auto& c : o.cases) out.push_back(parse_error_law(c));
  return out;
}

TestStudyConfig study_config(const Options& o) {
  TestStudyConfig s;
  s.n = o.n;
  s.reps = o.reps;
  s.cases = laws(o);
  s.gammas = o.gammas;
  s.alpha = o.alpha;
  s.test = test_config(o);
  s.test.threads = 1;
  s.seed = o.seed;
  s.threads = thread_count(o);
  return s;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const FitConfig fit = fit_config(o);
  const TestStudyConfig tests = study_config(o);
  Json results;
  if (o.study == "estimation" || o.study == "both") {
    std::vector<EstimationReport> reports;
    for (const ErrorLaw law : tests.cases) {
      SimScenario s;
      s.n = o.n;
      s.reps = o.reps;
      s.error = law;
      s.contamination = o.contamination;
      s.seed = o.seed;
      s.scenario_id = static_cast<std::uint64_t>(law) + 1;
      reports.push_back(run_estimation_study(s, fit, tests.threads));
      out << "estimation " << to_string(law) << " done\n";
    }
    if (wants(o, "csv")) {
      auto f = open_output(o, "estimation.csv");
      write_estimation_csv(f, reports);
    }
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    results["estimation"] = std::move(arr);
  }
  if (o.study == "test" || o.study == "both") {
    const auto cells = run_test_study(tests);
    out << "test study done\n";
    if (wants(o, "csv")) {
      auto f = open_output(o, "test_study.csv");
      write_test_study_csv(f, cells);
    }
    Json arr = Json::array();
    for (const auto& c : cells) arr.push_back(to_json(c));
    results["tests"] = std::move(arr);
  }
  if (wants(o, "json")) {
    Json config{{"study", o.study},   {"n", o.n},          {"reps", o.reps},
                {"cases", o.cases},   {"gammas", o.gammas}, {"alpha", o.alpha},
                {"contamination", o.contamination},         {"fit", to_json(fit)},
                {"test", to_json(tests.test)}};
    write_json(o, "simulate.json", "simulate", std::move(config), std::move(results));
  }
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const TestStudyConfig base = study_config(o);
  std::vector<SweepSeries> sweeps;
  for (const ErrorLaw law : base.cases) {
    sweeps.push_back(bandwidth_sweep(law, o.c_values, o.reps, base));
    for (const auto& p : sweeps.back().points) {
      out << to_string(law) << " c = " << p.c << ": size = " << p.size << '\n';
    }
  }
  if (wants(o, "csv")) {
    auto f = open_output(o, "sweep.csv");
    write_sweep_csv(f, sweeps);
  }
  if (wants(o, "json")) {
    Json arr = Json::array();
    for (const auto& s : sweeps) arr.push_back(to_json(s));
    Json config{{"n", o.n},           {"reps", o.reps},   {"cases", o.cases},
                {"c_values", o.c_values}, {"alpha", o.alpha}, {"test", to_json(base.test)}};
    write_json(o, "sweep.json", "sweep", std::move(config), Json{{"sweep", std::move(arr)}});
  }
  return 0;
}

void add_data_options(CLI::App* app, Options& o) {
  app->add_option("--input", o.input, "CSV file with a header row")->required();
  app->add_option("--response", o.response, "Response column")->required();
  app->add_option("--threshold", o.threshold, "Threshold covariate column (z)")->required();
  app->add_option("--covariates", o.covariates, "Linear covariate columns")->delimiter(',');
  app->add_flag("--no-intercept", o.no_intercept, "Do not prepend a constant column to X");
}

void add_method_option(CLI::App* app, Options& o, const std::string& fallback) {
  app->add_option("--method", o.method, "Estimator (default: " + fallback + ")")
      ->check(CLI::IsMember({"rank", "ls", "both"}));
}

void add_fit_options(CLI::App* app, Options& o) {
  app->add_option("--ci-level", o.ci_level, "Confidence level")->capture_default_str();
  app->add_option("--tau-init", o.tau_init, "Starting change point");
  app->add_option("--tol", o.tol, "Convergence tolerance")->capture_default_str();
  app->add_option("--max-iter", o.max_iter, "Iteration cap")->capture_default_str();
  app->add_option("--score", o.score, "Rank score")
      ->check(CLI::IsMember({"wilcoxon", "sign"}))
      ->capture_default_str();
}

void add_test_options(CLI::App* app, Options& o) {
  app->add_option("--nb", o.nb, "Bootstrap replicates")->capture_default_str();
  app->add_option("--bandwidth-mult", o.bandwidth_mult, "Bandwidth multiplier c")
      ->capture_default_str();
  app->add_option("--kernel", o.kernel, "Density kernel")
      ->check(CLI::IsMember({"epanechnikov", "gaussian"}))
      ->capture_default_str();
}

void add_study_options(CLI::App* app, Options& o, int reps) {
  app->add_option("--cases", o.cases, "Error laws: normal, t3, contaminated")
      ->delimiter(',')
      ->check(CLI::IsMember({"normal", "t3", "contaminated"}));
  app->add_option("--n", o.n, "Sample size")->capture_default_str();
  app->add_option("--reps", o.reps,
                  "Monte Carlo replicates (default: " + std::to_string(reps) + ")");
  app->add_option("--alpha", o.alpha, "Significance level")->capture_default_str();
}

void add_common_options(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app->add_option("--threads", o.threads, "Worker threads (default: BENTRANK_THREADS or 1)");
  app->add_option("--out", o.out, "Output directory")->capture_default_str();
  app->add_option("--format", o.formats, "Output formats")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json"}));
  app->add_flag("--no-timestamp", o.no_timestamp, "Omit the timestamp from JSON metadata");
}

void report_error(const Options& o, const std::string& command, const Error& e,
                  const std::string& hint, std::ostream& err) {
  Json rec;
  rec["command"] = command;
  rec["kind"] = std::string(to_string(e.kind()));
  rec["message"] = e.what();
  if (!hint.empty()) rec["hint"] = hint;
  const Json doc{{"error", rec}};
  err << doc.dump() << '\n';
  try {
    auto f = open_output(o, "error.json");
    f << doc.dump(2) << '\n';
  } catch (const std::exception&) {
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank-based bent line regression with an unknown change point"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Fit the bent line model");
  add_data_options(fit, o);
  add_method_option(fit, o, "rank");
  add_fit_options(fit, o);
  add_test_options(fit, o);
  fit->add_flag("--test", o.run_test, "Run the change-point test before fitting");

  auto* test = app.add_subcommand("test", "Test for the existence of a change point");
  add_data_options(test, o);
  add_method_option(test, o, "rank");
  add_test_options(test, o);

  auto* cv = app.add_subcommand("cv", "K-fold cross-validated prediction error");
  add_data_options(cv, o);
  add_method_option(cv, o, "both");
  add_fit_options(cv, o);
  cv->add_option("--kfold", o.kfold, "Number of folds")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimation and test studies");
  add_study_options(sim, o, 1000);
  add_fit_options(sim, o);
  add_test_options(sim, o);
  sim->add_option("--gammas", o.gammas, "Slope changes for the test study")->delimiter(',');
  sim->add_option("--study", o.study, "Which study")
      ->check(CLI::IsMember({"estimation", "test", "both"}))
      ->capture_default_str();
  sim->add_option("--contamination", o.contamination, "Cauchy mixing rate")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Type I error across bandwidth multipliers");
  add_study_options(sweep, o, 100);
  add_test_options(sweep, o);
  sweep->add_option("--c-values", o.c_values, "Bandwidth multipliers")->delimiter(',');

  for (auto* sub : {fit, test, cv, sim, sweep}) add_common_options(sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  if (o.method.empty()) o.method = cv->parsed() ? "both" : "rank";
  if (o.reps == 0) o.reps = sim->parsed() ? 1000 : 100;
  if (sweep->parsed() && sweep->count("--cases") == 0) o.cases = {"normal"};

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (fit->parsed()) return cmd_fit(o, out);
    if (test->parsed()) return cmd_test(o, out);
    if (cv->parsed()) return cmd_cv(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    return cmd_sweep(o, out);
  } catch (const CommandError& e) {
    report_error(o, command, e, e.hint(), err);
    return 2;
  } catch (const Error& e) {
    report_error(o, command, e, "", err);
    return 2;
  } catch (const std::exception& e) {
    err << Json{{"error", {{"command", command}, {"kind", "Internal"}, {"message", e.what()}}}}.dump()
        << '\n';
    return 3;
  }
}

}  // namespace bentrank
