#include "bentrank/cusum_test.hpp"
#include "bentrank/error.hpp"
#include "bentrank/rank_regression.hpp"
#include "bentrank/simulation.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace bentrank;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Dataset null_case1(int rep, std::uint64_t seed = 3) {
  SimScenario s;
  s.gamma_override = 0.0;
  s.seed = seed;
  return generate(s, rep);
}

}  // namespace

TEST_CASE("R_n small-sample oracle", "[cusum-test]") {
  const Dataset d = validate_dataset(Vector::Zero(4), Matrix::Ones(4, 1), Vector{{-1.5, -0.5, 0.5, 1.5}});
  NullFit nf;
  nf.ecdf_at_residuals = Vector{{1.0, 2.0, 3.0, 4.0}} / 5.0;
  CHECK_THAT(rn_process(nf, d, Vector{{0.5}})[0], WithinAbs(1.212435565298214, 1e-14));
  CHECK(rn_process(nf, d, Vector{{-1.5}})[0] == 0.0);
  CHECK_THROWS_AS(rn_process(nf, d, Vector{{3.0}}), Error);
}

TEST_CASE("test statistic", "[cusum-test]") {
  CHECK(test_statistic(Vector{{0.1, -0.9, 0.4}}) == 0.9);
  CHECK(test_statistic(Vector::Zero(5)) == 0.0);
}

TEST_CASE("tau grid holds distinct z between the quantiles", "[cusum-test]") {
  const Dataset d = validate_dataset(Vector::Zero(11), Matrix::Ones(11, 1), Vector::LinSpaced(11, 0, 10));
  const Vector g = tau_grid(d);
  CHECK(g == Vector{{1, 2, 3, 4, 5, 6, 7, 8, 9}});
}

TEST_CASE("null fit", "[cusum-test]") {
  SECTION("noiseless line leaves zero residuals") {
    const Vector z = Vector::LinSpaced(50, -1, 1);
    const Dataset d = validate_dataset(2.0 + 3.0 * z.array(), Matrix::Ones(50, 1), z);
    const NullFit nf = fit_null(d);
    CHECK(nf.residuals.cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("empirical cdf values are a permutation of k/(n+1)") {
    const Dataset d = null_case1(0);
    const NullFit nf = fit_null(d);
    std::vector<double> f(nf.ecdf_at_residuals.data(), nf.ecdf_at_residuals.data() + d.n());
    std::sort(f.begin(), f.end());
    for (std::size_t k = 0; k < f.size(); ++k) {
      CHECK_THAT(f[k], WithinAbs((k + 1.0) / (d.n() + 1.0), 1e-12));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(nf.s_wn);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(nf.bandwidth > 0.0);
  }
}

TEST_CASE("zero multipliers give zero bootstrap statistics", "[cusum-test]") {
  const Dataset d = null_case1(1);
  TestConfig c;
  c.nb = 50;
  const auto zero = [](int, Eigen::Ref<Vector> u) { u.setZero(); };
  const CusumTestResult r = wild_bootstrap(fit_null(d, c), d, c, zero);
  CHECK(r.bootstrap_stats.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(r.t_n > 0.0);
  CHECK(r.p_value == 0.0);
}

TEST_CASE("bootstrap determinism", "[cusum-test][property]") {
  const Dataset d = null_case1(2);
  TestConfig c;
  c.nb = 300;
  c.seed = 77;
  const CusumTestResult a = run_cusum_test(d, c);
  const CusumTestResult b = run_cusum_test(d, c);
  c.threads = 3;
  const CusumTestResult t = run_cusum_test(d, c);
  CHECK(a.p_value == b.p_value);
  CHECK(a.bootstrap_stats == b.bootstrap_stats);
  CHECK(a.bootstrap_stats == t.bootstrap_stats);
  c.seed = 78;
  CHECK(run_cusum_test(d, c).bootstrap_stats != a.bootstrap_stats);
}

TEST_CASE("R_n is invariant to response translation", "[cusum-test][property]") {
  const Dataset d = null_case1(4);
  const Dataset shifted = validate_dataset(d.y().array() + 12.5, d.x(), d.z());
  const Vector g = tau_grid(d);
  const Vector a = rn_process(fit_null(d), d, g);
  const Vector b = rn_process(fit_null(shifted), shifted, g);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("R_n has mean zero under the null", "[cusum-test][property]") {
  const Vector grid{{-1.0, -0.5, 0.0, 0.5, 1.0}};
  const int reps = 1000;
  Matrix paths(reps, grid.size());
  for (int r = 0; r < reps; ++r) {
    const Dataset d = null_case1(r, 101);
    paths.row(r) = rn_process(fit_null(d), d, grid).transpose();
  }
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const Vector col = paths.col(g);
    const double mean = col.mean();
    const double se = std::sqrt((col.array() - mean).square().sum() / (reps - 1.0) / reps);
    CHECK(std::abs(mean) < 3.0 * se);
  }
}

TEST_CASE("configuration checks", "[cusum-test]") {
  TestConfig c;
  c.nb = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.q_lo = 0.9;
  c.q_hi = 0.1;
  CHECK_THROWS_AS(c.validate(), Error);
}
