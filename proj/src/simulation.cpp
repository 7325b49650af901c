#include "bentrank/simulation.hpp"

#include "bentrank/error.hpp"
#include "bentrank/ls_baseline.hpp"
#include "bentrank/parallel.hpp"
#include "bentrank/reports.hpp"
#include "bentrank/stats.hpp"

#include <cmath>

namespace bentrank {

std::string to_string(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::Normal: return "normal";
    case ErrorLaw::T3: return "t3";
    case ErrorLaw::ContaminatedNormal: return "contaminated";
  }
  return "unknown";
}

ErrorLaw parse_error_law(const std::string& name) {
  if (name == "normal" || name == "1") return ErrorLaw::Normal;
  if (name == "t3" || name == "2") return ErrorLaw::T3;
  if (name == "contaminated" || name == "3") return ErrorLaw::ContaminatedNormal;
  throw Error(ErrorKind::InvalidArgument, "unknown error law '" + name + "'");
}

double SimScenario::effective_gamma() const {
  double g = gamma_override.value_or(truth.gamma);
  if (local_alt) g *= local_alt->a_n / std::sqrt(static_cast<double>(n));
  return g;
}

void SimScenario::validate() const {
  if (reps < 1) throw Error(ErrorKind::InvalidArgument, "reps must be at least 1");
  if (n < 10) throw Error(ErrorKind::InvalidArgument, "n must be at least 10");
  if (!(contamination >= 0.0 && contamination < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "contamination rate must lie in [0, 1)");
  }
  if (!(z_lo < z_hi)) throw Error(ErrorKind::InvalidArgument, "need z_lo < z_hi");
}

double draw_error(ErrorLaw law, double contamination, Rng& rng) {
  switch (law) {
    case ErrorLaw::Normal: return std::normal_distribution<double>(0.0, 1.0)(rng);
    case ErrorLaw::T3: return std::student_t_distribution<double>(3.0)(rng);
    case ErrorLaw::ContaminatedNormal: {
      const bool outlier = std::bernoulli_distribution(contamination)(rng);
      if (outlier) return std::cauchy_distribution<double>(0.0, 1.0)(rng);
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    }
  }
  return 0.0;
}

Dataset generate(const SimScenario& scenario, int rep) {
  scenario.validate();
  const std::uint64_t stream = kStreamData ^ (scenario.scenario_id << 8);
  Rng rng = make_rng(scenario.seed, stream, static_cast<std::uint64_t>(rep));
  std::uniform_real_distribution<double> unif(scenario.z_lo, scenario.z_hi);
  const auto n = static_cast<Eigen::Index>(scenario.n);
  BentLineParams truth = scenario.truth;
  truth.gamma = scenario.effective_gamma();
  Vector z(n), y(n);
  Matrix x = Matrix::Ones(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = unif(rng);
    y[i] = predict(truth, x.row(i).transpose(), z[i]) +
           draw_error(scenario.error, scenario.contamination, rng);
  }
  return validate_dataset(std::move(y), std::move(x), std::move(z));
}

namespace {

ReplicateEstimate summarize_fit(const BentLineFit& fit) {
  const auto p = fit.params.alpha.size();
  ReplicateEstimate r;
  r.estimates.resize(p + 3);
  r.estimates.head(p) = fit.params.alpha;
  r.estimates[p] = fit.params.beta;
  r.estimates[p + 1] = fit.params.gamma;
  r.estimates[p + 2] = fit.params.tau;
  r.standard_errors = fit.standard_errors();
  r.ok = fit.converged && r.estimates.allFinite() && r.standard_errors.allFinite();
  if (!fit.converged) r.failure = "not converged";
  return r;
}

template <class Fitter>
ReplicateEstimate try_fit(const Dataset& data, const FitConfig& config, Fitter fitter) {
  try {
    return summarize_fit(fitter(data, config));
  } catch (const Error& e) {
    ReplicateEstimate r;
    r.failure = e.what();
    return r;
  }
}

std::vector<MetricRow> metrics(const std::string& method,
                               const std::vector<ReplicateEstimate>& reps, const Vector& truth,
                               double ci_level) {
  const double zc = normal_quantile(0.5 + ci_level / 2.0);
  const auto names = parameter_names(truth.size() - 3);
  std::vector<MetricRow> rows;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    MetricRow row;
    row.method = method;
    row.parameter = names[static_cast<std::size_t>(j)];
    row.truth = truth[j];
    std::vector<double> est, se;
    for (const auto& r : reps) {
      if (!r.ok) {
        ++row.failures;
        continue;
      }
      est.push_back(r.estimates[j]);
      se.push_back(r.standard_errors[j]);
    }
    row.used = static_cast<int>(est.size());
    if (!est.empty()) {
      const double m = static_cast<double>(est.size());
      double bias = 0.0, ese = 0.0, mse = 0.0, cover = 0.0;
      for (std::size_t k = 0; k < est.size(); ++k) {
        const double err = est[k] - truth[j];
        bias += err;
        ese += se[k];
        mse += err * err;
        if (std::abs(err) <= zc * se[k]) cover += 1.0;
      }
      row.bias = bias / m;
      row.ese = ese / m;
      row.mse = mse / m;
      row.cp = cover / m;
      row.al = 2.0 * zc * *row.ese;
      if (est.size() >= 2) {
        row.sd = sample_sd(Eigen::Map<const Vector>(est.data(), static_cast<Eigen::Index>(est.size())));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

EstimationReport run_estimation_study(const SimScenario& scenario, const FitConfig& fit,
                                      int threads) {
  scenario.validate();
  EstimationReport report;
  report.scenario = scenario;
  const auto reps = static_cast<std::size_t>(scenario.reps);
  report.rank.resize(reps);
  report.ls.resize(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const Dataset data = generate(scenario, static_cast<int>(r));
    report.rank[r] = try_fit(data, fit, [](const Dataset& d, const FitConfig& c) {
      return fit_bent_line(d, c);
    });
    report.ls[r] = try_fit(data, fit, [](const Dataset& d, const FitConfig& c) {
      return fit_ls_bent_line(d, c);
    });
  });

  const auto p = scenario.truth.alpha.size();
  Vector truth(p + 3);
  truth.head(p) = scenario.truth.alpha;
  truth[p] = scenario.truth.beta;
  truth[p + 1] = scenario.effective_gamma();
  truth[p + 2] = scenario.truth.tau;
  report.rows = metrics("rank", report.rank, truth, fit.ci_level);
  auto ls_rows = metrics("ls", report.ls, truth, fit.ci_level);
  report.rows.insert(report.rows.end(), ls_rows.begin(), ls_rows.end());
  return report;
}

namespace {

SimScenario cell_scenario(const TestStudyConfig& config, ErrorLaw law, double gamma,
                          std::uint64_t id, int reps) {
  SimScenario s;
  s.n = config.n;
  s.reps = reps;
  s.error = law;
  s.gamma_override = gamma;
  s.local_alt = config.local_alt;
  s.seed = config.seed;
  s.scenario_id = id;
  return s;
}

TestConfig replicate_test_config(const TestConfig& base, const SimScenario& s, int rep) {
  TestConfig t = base;
  t.threads = 1;
  t.seed = mix64(base.seed ^ mix64(s.scenario_id * 1000003ULL + static_cast<std::uint64_t>(rep)));
  return t;
}

}  // namespace

std::vector<double> test_p_values(const SimScenario& scenario, const TestConfig& test,
                                  int threads) {
  std::vector<double> p(static_cast<std::size_t>(scenario.reps), -1.0);
  parallel_for(p.size(), threads, [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    try {
      p[r] = run_cusum_test(generate(scenario, rep), replicate_test_config(test, scenario, rep))
                 .p_value;
    } catch (const Error&) {
      p[r] = -1.0;
    }
  });
  return p;
}

std::vector<TestCell> run_test_study(const TestStudyConfig& config) {
  config.test.validate();
  std::vector<TestCell> cells;
  for (std::size_t c = 0; c < config.cases.size(); ++c) {
    for (std::size_t g = 0; g < config.gammas.size(); ++g) {
      const auto id = static_cast<std::uint64_t>(1000 + 100 * c + g);
      const SimScenario s = cell_scenario(config, config.cases[c], config.gammas[g], id, config.reps);
      const auto reps = static_cast<std::size_t>(config.reps);
      std::vector<double> rank_p(reps, -1.0), ls_p(reps, -1.0);
      parallel_for(reps, config.threads, [&](std::size_t r) {
        const int rep = static_cast<int>(r);
        const Dataset data = generate(s, rep);
        const TestConfig t = replicate_test_config(config.test, s, rep);
        try {
          rank_p[r] = run_cusum_test(data, t).p_value;
        } catch (const Error&) {
        }
        if (config.include_ls) {
          try {
            ls_p[r] = ls_cusum_test(data, t).p_value;
          } catch (const Error&) {
          }
        }
      });
      auto tally = [&](Method m, const std::vector<double>& ps) {
        TestCell cell;
        cell.error = config.cases[c];
        cell.gamma = config.gammas[g];
        cell.method = m;
        for (const double p : ps) {
          if (p < 0.0) {
            ++cell.failures;
            continue;
          }
          ++cell.reps;
          if (p < config.alpha) ++cell.rejections;
        }
        cell.rejection_rate = cell.reps > 0 ? static_cast<double>(cell.rejections) / cell.reps : 0.0;
        cells.push_back(cell);
      };
      tally(Method::Rank, rank_p);
      if (config.include_ls) tally(Method::LeastSquares, ls_p);
    }
  }
  return cells;
}

SweepSeries bandwidth_sweep(ErrorLaw law, const std::vector<double>& c_values, int reps,
                            const TestStudyConfig& base) {
  SweepSeries series;
  series.error = law;
  const auto id = static_cast<std::uint64_t>(5000 + static_cast<int>(law));
  const SimScenario s = cell_scenario(base, law, 0.0, id, reps);
  for (const double c : c_values) {
    TestConfig t = base.test;
    t.bandwidth_mult = c;
    const auto p = test_p_values(s, t, base.threads);
    SweepPoint pt;
    pt.c = c;
    for (const double v : p) {
      if (v < 0.0) continue;
      ++pt.reps;
      if (v < base.alpha) ++pt.rejections;
    }
    pt.size = pt.reps > 0 ? static_cast<double>(pt.rejections) / pt.reps : 0.0;
    series.points.push_back(pt);
  }
  return series;
}

}  // namespace bentrank
