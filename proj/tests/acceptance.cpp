// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; no arguments runs all eight.

#include "bentrank/bent_line.hpp"
#include "bentrank/csv_io.hpp"
#include "bentrank/cusum_test.hpp"
#include "bentrank/ls_baseline.hpp"
#include "bentrank/parallel.hpp"
#include "bentrank/rank_regression.hpp"
#include "bentrank/simulation.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace bentrank;

namespace {

constexpr std::uint64_t kEstimationSeed = 20240601;
constexpr std::uint64_t kTestSeed = 20160607;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const MetricRow& row(const EstimationReport& r, const std::string& method, const std::string& param) {
  for (const auto& m : r.rows) {
    if (m.method == method && m.parameter == param) return m;
  }
  throw std::runtime_error("metric row missing");
}

const TestCell& cell(const std::vector<TestCell>& cells, ErrorLaw law, double gamma, Method m) {
  for (const auto& c : cells) {
    if (c.error == law && c.gamma == gamma && c.method == m) return c;
  }
  throw std::runtime_error("test cell missing");
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(2, 50);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    Vector e(n);
    for (auto& v : e) v = g(rng);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) s += std::abs(e[i] - e[j]);
    }
    const double oracle = std::sqrt(12.0) / (2.0 * (n + 1)) * s;
    worst = std::max(worst, std::abs(dispersion(e) - oracle));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 1.0,
          "max |diff| = " + fmt("%.2e", worst) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  SimScenario s;
  s.seed = kEstimationSeed + 2;
  int bad = 0;
  double worst = -1.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Dataset d = generate(s, rep);
    const BentLineFit f = fit_bent_line(d);
    const double at_fit = profile_dispersion(d, f.params.tau);
    std::vector<double> taus;
    for (int k = 0; k < 200; ++k) taus.push_back(d.z_min() + (d.z_max() - d.z_min()) * (k + 0.5) / 200.0);
    double best = std::numeric_limits<double>::infinity();
    for (const double v : profile_dispersion(d, taus)) {
      if (!std::isnan(v)) best = std::min(best, v);
    }
    const double rel = (at_fit - best) / best;
    worst = std::max(worst, rel);
    bad += rel > 1e-6;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 60.0, std::to_string(bad) + "/50 above grid minimum, worst relative gap " +
                                       fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  const int threads = default_threads();
  SimScenario s;
  s.reps = 500;
  s.seed = kEstimationSeed;
  s.error = ErrorLaw::Normal;
  s.scenario_id = 1;
  const EstimationReport normal = run_estimation_study(s, {}, threads);
  s.error = ErrorLaw::ContaminatedNormal;
  s.scenario_id = 3;
  const EstimationReport contaminated = run_estimation_study(s, {}, threads);
  const double secs = seconds_since(t0);

  const auto& tau = row(normal, "rank", "tau");
  const double bias = tau.bias.value_or(NAN), sd = tau.sd.value_or(NAN), cp = tau.cp.value_or(NAN);
  const double mse3 = row(contaminated, "rank", "tau").mse.value_or(NAN);
  const double ls_sd = row(contaminated, "ls", "alpha0").sd.value_or(NAN);
  const bool ok_bias = std::abs(bias - (-0.017)) <= 0.02;
  const bool ok_sd = std::abs(sd - 0.090) <= 0.02;
  const bool ok_cp = std::abs(cp - 0.916) <= 0.04;
  const bool ok_mse = mse3 <= 0.02;
  const bool ok_ls = ls_sd > 50.0;
  std::ostringstream d;
  d << "case 1 tau bias " << fmt("%.4f", bias) << (ok_bias ? "" : " (outside -0.017+-0.02)")
    << ", sd " << fmt("%.4f", sd) << (ok_sd ? "" : " (outside)") << ", cp " << fmt("%.3f", cp)
    << (ok_cp ? "" : " (outside)") << ", failures " << tau.failures << "; case 3 tau mse "
    << fmt("%.4f", mse3) << ", ls sd(alpha0) " << fmt("%.1f", ls_sd) << "; " << fmt("%.0f", secs) << " s";
  return {ok_bias && ok_sd && ok_cp && ok_mse && ok_ls && secs <= 900.0, d.str()};
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  TestStudyConfig c;
  c.reps = 500;
  c.cases = {ErrorLaw::Normal, ErrorLaw::ContaminatedNormal};
  c.gammas = {0.0};
  c.test.nb = 500;
  c.seed = kTestSeed;
  c.threads = default_threads();
  const auto cells = run_test_study(c);
  const double secs = seconds_since(t0);
  const double size1 = cell(cells, ErrorLaw::Normal, 0.0, Method::Rank).rejection_rate;
  const double size3 = cell(cells, ErrorLaw::ContaminatedNormal, 0.0, Method::Rank).rejection_rate;
  const double ls3 = cell(cells, ErrorLaw::ContaminatedNormal, 0.0, Method::LeastSquares).rejection_rate;
  const bool ok = size1 >= 0.03 && size1 <= 0.07 && size3 <= 0.07 && ls3 >= 0.20 && secs <= 1800.0;
  return {ok, "case 1 size " + fmt("%.3f", size1) + ", case 3 size " + fmt("%.3f", size3) +
                  ", case 3 ls size " + fmt("%.3f", ls3) + ", " + fmt("%.0f", secs) + " s"};
}

Outcome criterion5() {
  TestStudyConfig c;
  c.reps = 500;
  c.cases = {ErrorLaw::Normal};
  c.gammas = {-2.0, -1.0};
  c.test.nb = 500;
  c.include_ls = false;
  c.seed = kTestSeed;
  c.threads = default_threads();
  const auto cells = run_test_study(c);
  const double p2 = cell(cells, ErrorLaw::Normal, -2.0, Method::Rank).rejection_rate;
  const double p1 = cell(cells, ErrorLaw::Normal, -1.0, Method::Rank).rejection_rate;
  return {p2 >= 0.98 && p1 >= 0.85 && p1 <= 0.97,
          "power at gamma=-2 " + fmt("%.3f", p2) + ", at gamma=-1 " + fmt("%.3f", p1)};
}

Outcome criterion6() {
  TestStudyConfig c;
  c.test.nb = 500;
  c.seed = kTestSeed;
  c.threads = default_threads();
  const SweepSeries s = bandwidth_sweep(ErrorLaw::Normal, {0.1, 1.06, 2.0}, 100, c);
  bool ok = true;
  std::string d;
  for (const auto& p : s.points) {
    ok = ok && p.size >= 0.0 && p.size <= 0.12 && p.reps == 100;
    d += (d.empty() ? "" : ", ") + std::string("c=") + fmt("%.2f", p.c) + " size " + fmt("%.2f", p.size);
  }
  return {ok, d};
}

bool psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

Outcome criterion7() {
  std::vector<std::string> failed;
  const auto check = [&](const std::string& name, bool ok) {
    if (!ok) failed.push_back(name);
  };
  SimScenario s;
  s.seed = kEstimationSeed + 7;

  // equivariance
  bool eq = true;
  bool cov_psd = true;
  for (int rep = 0; rep < 3; ++rep) {
    const Dataset d = generate(s, rep);
    const BentLineFit f = fit_bent_line(d);
    cov_psd = cov_psd && psd(f.covariance);
    const BentLineFit shift = fit_bent_line(validate_dataset(d.y(), d.x(), d.z().array() + 1.75));
    eq = eq && std::abs(shift.params.tau - f.params.tau - 1.75) < 1e-6 &&
         std::abs(shift.params.gamma - f.params.gamma) < 1e-6 &&
         std::abs(shift.params.beta - f.params.beta) < 1e-6;
    const BentLineFit scale = fit_bent_line(validate_dataset(3.5 * d.y(), d.x(), d.z()));
    eq = eq && std::abs(scale.params.tau - f.params.tau) < 1e-6 &&
         std::abs(scale.params.gamma - 3.5 * f.params.gamma) < 3.5e-6;
    const BentLineFit trans = fit_bent_line(validate_dataset(d.y().array() + 10.0, d.x(), d.z()));
    eq = eq && std::abs(trans.params.tau - f.params.tau) < 1e-6 &&
         std::abs(trans.params.alpha[0] - f.params.alpha[0] - 10.0) < 1e-6;
    const Vector e = f.residuals;
    eq = eq && std::abs(dispersion(Vector(e.array() + 4.0)) - dispersion(e)) < 1e-9 &&
         std::abs(dispersion(Vector(2.0 * e)) - 2.0 * dispersion(e)) < 1e-9;
  }
  check("equivariance", eq);
  check("psd covariance", cov_psd);

  // continuity of predict at tau
  bool cont = true;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const BentLineParams p{Vector::Constant(1, u(rng)), u(rng), u(rng), u(rng)};
    const Vector x = Vector::Ones(1);
    const double at = predict(p, x, p.tau);
    const double tol = 1e-6 * std::abs(p.gamma) + 1e-8;
    cont = cont && std::abs(predict(p, x, p.tau - 1e-9) - at) <= tol &&
           std::abs(predict(p, x, p.tau + 1e-9) - at) <= tol;
  }
  check("continuity", cont);

  // bootstrap determinism
  SimScenario null = s;
  null.gamma_override = 0.0;
  TestConfig tc;
  tc.nb = 500;
  const Dataset d0 = generate(null, 0);
  const CusumTestResult a = run_cusum_test(d0, tc);
  const CusumTestResult b = run_cusum_test(d0, tc);
  tc.threads = 3;
  const CusumTestResult c = run_cusum_test(d0, tc);
  check("bootstrap determinism", a.p_value == b.p_value && a.bootstrap_stats == b.bootstrap_stats &&
                                     a.bootstrap_stats == c.bootstrap_stats);

  // null mean-zero of R_n
  const Vector grid{{-1.0, -0.5, 0.0, 0.5, 1.0}};
  const int reps = 1000;
  Matrix paths(reps, grid.size());
  for (int r = 0; r < reps; ++r) {
    const Dataset d = generate(null, r);
    paths.row(r) = rn_process(fit_null(d), d, grid).transpose();
  }
  bool zero_mean = true;
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const Vector col = paths.col(g);
    const double mean = col.mean();
    const double se = std::sqrt((col.array() - mean).square().sum() / (reps - 1.0) / reps);
    zero_mean = zero_mean && std::abs(mean) < 3.0 * se;
  }
  check("null mean zero", zero_mean);

  // midranks
  bool mid = ranks(Vector{{3.1, -2.0, 7.7}}) == Vector{{2.0, 1.0, 3.0}} &&
             ranks(Vector{{5.0, 5.0, 1.0}}) == Vector{{2.5, 2.5, 1.0}};
  std::uniform_int_distribution<int> level(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 40;
    Vector v(n);
    for (auto& x : v) x = level(rng);
    const Vector r = ranks(v);
    for (int i = 0; i < n; ++i) {
      double below = 0.0, equal = 0.0;
      for (int j = 0; j < n; ++j) {
        below += v[j] < v[i];
        equal += v[j] == v[i];
      }
      mid = mid && r[i] == below + (equal + 1.0) / 2.0;
    }
  }
  check("midranks", mid);

  std::string detail = "equivariance, continuity, bootstrap determinism, null mean zero, psd covariance, midranks";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

struct FixtureCase {
  std::string file;
  ColumnMapping mapping;
  std::vector<double> truth;
};

Outcome criterion8() {
  namespace fs = std::filesystem;
  const fs::path dir = BENTRANK_FIXTURES;
  const fs::path hayden = dir / "real" / "hayden.csv";
  const fs::path mrs = dir / "real" / "mrs.csv";
  std::string detail;
  bool ok = true;

  if (fs::exists(hayden) && fs::exists(mrs)) {
    const auto sig2 = [](double got, double want) {
      const double mag = std::pow(10.0, std::floor(std::log10(std::abs(want))) - 1.0);
      return std::abs(got - want) <= 0.5 * mag;
    };
    const Dataset h = ingest_csv(hayden, {"transport", "discharge", {}, true});
    const BentLineFit fh = fit_bent_line(h);
    TestConfig tc;
    const double p = run_cusum_test(h, tc).p_value;
    ok = sig2(fh.params.alpha[0], -0.0053) && sig2(fh.params.beta, 0.0119) && sig2(fh.params.gamma, 0.0733) &&
         sig2(fh.params.tau, 1.5394) && std::abs(p - 0.028) <= 0.02;
    const Dataset m = ingest_csv(mrs, {"log_speed", "log_mass", {"hopper"}, true});
    const BentLineFit fm = fit_bent_line(m);
    ok = ok && sig2(fm.params.alpha[0], 3.208) && sig2(fm.params.alpha[1], 0.640) &&
         sig2(fm.params.beta, 0.285) && sig2(fm.params.gamma, -0.409) && sig2(fm.params.tau, 3.658);
    detail = "real data: hayden tau " + fmt("%.4f", fh.params.tau) + ", p " + fmt("%.3f", p) + "; mrs tau " +
             fmt("%.4f", fm.params.tau);
    return {ok, detail};
  }

  const std::vector<FixtureCase> cases{
      {"bedload_synthetic.csv", {"transport", "discharge", {}, true}, {-0.0053, 0.0119, 0.0733, 1.5394}},
      {"running_speed_synthetic.csv",
       {"log_speed", "log_mass", {"hopper"}, true},
       {3.208, 0.640, 0.285, -0.409, 3.658}}};
  double worst = 0.0;
  for (const auto& c : cases) {
    const Dataset d = ingest_csv(dir / c.file, c.mapping);
    const BentLineFit f = fit_bent_line(d);
    const auto p = f.params.alpha.size();
    Vector est(p + 3);
    est.head(p) = f.params.alpha;
    est[p] = f.params.beta;
    est[p + 1] = f.params.gamma;
    est[p + 2] = f.params.tau;
    for (Eigen::Index j = 0; j < est.size(); ++j) {
      worst = std::max(worst, std::abs(est[j] - c.truth[static_cast<std::size_t>(j)]));
    }
  }
  ok = worst <= 1e-4;
  return {ok, "real data absent; synthetic fixtures max |error| " + fmt("%.2e", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
