#include "reltest/simulation.hpp"

#include "reltest/relative_tests.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

using namespace reltest;

TEST_CASE("inverse_normal_cdf") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.025) ==
        doctest::Approx(-1.959963984540054).epsilon(1e-12));
  for (double p : {1e-10, 1e-4, 0.2, 0.7, 0.9999, 1.0 - 1e-12}) {
    CHECK(normal_cdf(inverse_normal_cdf(p)) ==
          doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), invalid_input);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), invalid_input);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t g = 0; g < 40; ++g) {
    for (std::uint64_t t = 0; t < 40; ++t) {
      seen.insert(derive_seed(123, g, t));
    }
  }
  CHECK(seen.size() == 1600);
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("gen_sine_family") {
  SineFamilyParams p;
  p.m = 64;
  p.seed = 42;
  SUBCASE("deterministic per seed") {
    const Triple a = gen_sine_family(p);
    const Triple b = gen_sine_family(p);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.z - b.z).cwiseAbs().maxCoeff() == 0.0);
    p.seed = 43;
    const Triple c = gen_sine_family(p);
    CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("noise-free draws are deterministic functions of t") {
    p.gamma1 = p.gamma2 = p.gamma3 = 0.0;
    const Triple t = gen_sine_family(p);
    // constructions (b) and (c) coincide exactly without noise
    CHECK((t.y - t.z).cwiseAbs().maxCoeff() == 0.0);
    for (Index i = 0; i < p.m; ++i) {
      CHECK(t.x(i, 1) == doctest::Approx(std::sin(t.x(i, 0))).epsilon(1e-12));
      CHECK(t.y(i, 0) ==
            doctest::Approx(t.x(i, 0) * std::cos(t.x(i, 0))).epsilon(1e-12));
    }
  }
  SUBCASE("parameter validation") {
    p.m = 4;
    CHECK_THROWS_AS(gen_sine_family(p), invalid_input);
    p.m = 64;
    p.gamma2 = -0.1;
    CHECK_THROWS_AS(gen_sine_family(p), invalid_input);
  }
}

TEST_CASE("gen_gaussian_triple") {
  GaussianTripleParams p;
  p.seed = 7;
  SUBCASE("endpoints and midpoint") {
    p.m = 2000;
    p.gamma = 0.0;
    Triple t = gen_gaussian_triple(p);
    CHECK(t.x.col(0).mean() == doctest::Approx(p.mu_y[0]).epsilon(0.01));
    p.gamma = 0.5;  // mu_y = -mu_z so the reference mean is the origin
    t = gen_gaussian_triple(p);
    CHECK(std::abs(t.x.col(0).mean()) < 4.0 / std::sqrt(2000.0));
    CHECK(std::abs(t.x.col(1).mean()) < 4.0 / std::sqrt(2000.0));
  }
  SUBCASE("law of large numbers at m = 1e5") {
    p.m = 100000;
    p.n = 100000;
    p.r = 100000;
    p.gamma = 0.3;
    const Triple t = gen_gaussian_triple(p);
    const double se = 1.0 / std::sqrt(100000.0);
    const Eigen::Vector2d mu_x = 0.7 * p.mu_y + 0.3 * p.mu_z;
    for (int c = 0; c < 2; ++c) {
      CHECK(std::abs(t.x.col(c).mean() - mu_x[c]) < 4.0 * se);
      CHECK(std::abs(t.y.col(c).mean() - p.mu_y[c]) < 4.0 * se);
      CHECK(std::abs(t.z.col(c).mean() - p.mu_z[c]) < 4.0 * se);
      // unit variances, within 4 standard errors of the moment estimate
      const double vx =
          (t.x.col(c).array() - t.x.col(c).mean()).square().mean();
      CHECK(std::abs(vx - 1.0) < 4.0 * std::sqrt(2.0) * se);
    }
  }
  SUBCASE("validation") {
    p.gamma = 1.5;
    CHECK_THROWS_AS(gen_gaussian_triple(p), invalid_input);
    p.gamma = 0.5;
    p.n = 1;
    CHECK_THROWS_AS(gen_gaussian_triple(p), invalid_input);
  }
}

TEST_CASE("sine-family marginal moments at m = 1e5") {
  SineFamilyParams p;
  p.m = 100000;
  p.gamma1 = 0.3;
  p.gamma2 = 0.3;
  p.gamma3 = 0.7;
  p.seed = 99;
  const Triple t = gen_sine_family(p);
  const double se = 1.0 / std::sqrt(100000.0);
  // E[t] = pi, E[sin t] = 0, E[t cos t] = 0, E[t sin t] = -1
  CHECK(std::abs(t.x.col(0).mean() - M_PI) < 4.0 * 2.0 * se);
  CHECK(std::abs(t.x.col(1).mean() - 0.0) < 4.0 * se);
  CHECK(std::abs(t.y.col(0).mean() - 0.0) < 4.0 * 5.0 * se);
  CHECK(std::abs(t.y.col(1).mean() - (-1.0)) < 4.0 * 5.0 * se);
}

TEST_CASE("power_curve") {
  HarnessConfig cfg;
  cfg.test = TestKind::hsic_dependent;
  cfg.family = Family::sine;
  cfg.sine.m = 40;
  cfg.trials = 1;
  cfg.alpha = 0.05;
  cfg.master_seed = 5;
  SUBCASE("single trial gives a rate in {0, 1}") {
    const PowerCurve pc = power_curve(cfg, {0.3, 1.7});
    for (double r : pc.rejection_rate) {
      CHECK((r == 0.0 || r == 1.0));
    }
    CHECK(pc.grid.size() == 2);
  }
  SUBCASE("deterministic regardless of the harness thread cap") {
    cfg.trials = 6;
    setenv("RELTEST_THREADS", "1", 1);
    const PowerCurve a = power_curve(cfg, {0.5, 0.9});
    setenv("RELTEST_THREADS", "2", 1);
    const PowerCurve b = power_curve(cfg, {0.5, 0.9});
    unsetenv("RELTEST_THREADS");
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
      CHECK(a.rejection_rate[i] == b.rejection_rate[i]);
      CHECK(a.p_median[i] == b.p_median[i]);
      CHECK(a.p_q1[i] == b.p_q1[i]);
      CHECK(a.p_q3[i] == b.p_q3[i]);
    }
  }
  SUBCASE("validation") {
    cfg.trials = 0;
    CHECK_THROWS_AS(power_curve(cfg, {0.5}), invalid_input);
    cfg.trials = 1;
    CHECK_THROWS_AS(power_curve(cfg, {}), invalid_input);
  }
}

TEST_CASE("calibrate") {
  HarnessConfig cfg;
  cfg.family = Family::sine;
  cfg.sine.m = 200;
  cfg.sine.gamma2 = 0.5;
  cfg.sine.gamma3 = 0.5;
  cfg.trials = 200;
  cfg.alpha = 0.05;
  cfg.master_seed = 31;
  SUBCASE("held at the boundary null") {
    const double rate = calibrate(cfg);
    CHECK(rate <= 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / 200.0));
  }
  SUBCASE("non-symmetric parameters rejected") {
    cfg.sine.gamma3 = 0.6;
    CHECK_THROWS_AS(calibrate(cfg), invalid_input);
    cfg.sine.gamma3 = 0.5;
    cfg.family = Family::gaussian_triple;
    cfg.gaussian.gamma = 0.4;
    CHECK_THROWS_AS(calibrate(cfg), invalid_input);
  }
  SUBCASE("zero trials rejected") {
    cfg.trials = 0;
    CHECK_THROWS_AS(calibrate(cfg), invalid_input);
  }
}

TEST_CASE("monte_carlo_covariance_check plumbing") {
  CovarianceCheckConfig cfg;
  cfg.stat = StatKind::mmd;
  cfg.family = Family::gaussian_triple;
  cfg.gaussian.m = 50;
  cfg.gaussian.n = 50;
  cfg.gaussian.r = 50;
  cfg.redraws = 100;
  cfg.master_seed = 3;
  const CovarianceCheckReport rep = monte_carlo_covariance_check(cfg);
  SUBCASE("small redraw counts carry a wide-uncertainty warning") {
    CHECK(rep.redraws == 100);
    CHECK(!rep.warnings.empty());
  }
  SUBCASE("redraws below the precondition are rejected") {
    cfg.redraws = 50;
    CHECK_THROWS_AS(monte_carlo_covariance_check(cfg), invalid_input);
  }
}

TEST_CASE("run_trial smoke across selectors") {
  HarnessConfig cfg;
  cfg.family = Family::sine;
  cfg.sine.m = 64;
  cfg.alpha = 0.05;
  for (TestKind k :
       {TestKind::hsic_dependent, TestKind::hsic_independent}) {
    cfg.test = k;
    const TestResult res = run_trial(cfg, 0.7, 11);
    CHECK(res.p_value >= 0.0);
    CHECK(res.p_value <= 1.0);
  }
  cfg.test = TestKind::mmd;
  cfg.family = Family::gaussian_triple;
  cfg.gaussian.m = 64;
  cfg.gaussian.n = 64;
  cfg.gaussian.r = 64;
  const TestResult res = run_trial(cfg, 0.8, 11);
  CHECK(res.p_value >= 0.0);
  CHECK(res.p_value <= 1.0);
}
