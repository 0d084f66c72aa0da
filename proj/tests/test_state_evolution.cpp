#include "ampcs/minimax_mse.hpp"
#include "ampcs/rng.hpp"
#include "ampcs/state_evolution.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ampcs;

TEST_CASE("state evolution map") {
  SUBCASE("identity denoiser") {
    SEConfig c = make_se_config(0.4, ShrinkParams::soft(0.0), {0.1, 3.0, true});
    for (double m : {1e-3, 0.2, 1.0, 7.0}) CHECK(psi(m, c) == doctest::Approx(m / 0.4));
    CHECK(psi(0.0, c) == 0.0);
    CHECK_THROWS_AS(psi(-1.0, c), std::invalid_argument);
  }
  SUBCASE("small-m limit uses the risk at infinity") {
    ShrinkParams p = ShrinkParams::soft(1.2);
    SEConfig c = make_se_config(0.5, p, {0.1, 2.0, true});
    double r_inf = risk_two_point(p, {0.1, kInf, true});
    CHECK(psi(1e-10, c) / 1e-10 == doctest::Approx(r_inf / 0.5).epsilon(1e-6));
  }
  SUBCASE("matches a direct denoising experiment") {
    // Oracle: draw x from the three-point prior, add noise of variance m/delta,
    // denoise at threshold tau sigma and average the squared error per coordinate.
    const double eps = 0.1, mu = 2.0, delta = 0.4, m = 0.3, tau = 1.1;
    ShrinkParams p = ShrinkParams::soft(tau);
    SEConfig c = make_se_config(delta, p, {eps, mu, true});
    const double sigma = std::sqrt(m / delta);
    Rng rng(61);
    const int N = 10000, reps = 20;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      Vec x(N), y(N);
      for (int i = 0; i < N; ++i) {
        double u = rng.uniform();
        x[i] = u < eps / 2 ? mu : (u < eps ? -mu : 0.0);
        y[i] = x[i] + sigma * rng.normal();
      }
      double mse = (apply(y, p, sigma) - x).squaredNorm() / N;
      s += mse;
      s2 += mse * mse;
    }
    double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / (reps - 1));
    CHECK(std::abs(mean - psi(m, c)) <= 3.0 * se);
  }
  SUBCASE("nonnegative and decreasing in delta") {
    ShrinkParams p = ShrinkParams::firm(1.0, 3.0);
    for (double m : {1e-4, 0.01, 0.5, 3.0}) {
      double prev = kInf;
      for (double delta : {0.1, 0.2, 0.4, 0.8, 1.0}) {
        double v = psi(m, make_se_config(delta, p, {0.1, 2.5, true}));
        CHECK(v >= 0.0);
        CHECK(v <= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("iteration") {
  SETrace down = iterate(make_se_config_linear(2.0, 1.0, 1.0), 200, 1e-12);
  CHECK(down.converged);
  for (std::size_t t = 1; t < down.states.size(); ++t) CHECK(down.states[t] == doctest::Approx(down.states[t - 1] / 2));
  SETrace flat = iterate(make_se_config_linear(1.0, 1.0, 0.7), 10, 1e-12);
  CHECK_FALSE(flat.converged);
  for (double m : flat.states) CHECK(m == 0.7);
  CHECK_THROWS_AS(iterate(make_se_config_linear(1.0, 1.0), 0, 1e-9), std::invalid_argument);

  SUBCASE("limit equals the highest fixed point for a starshaped map") {
    ShrinkParams p = ShrinkParams::soft(1.0);
    SEConfig c = make_se_config(0.3, p, {0.2, 2.0, true});
    SETrace tr = iterate(c, 20000, 1e-14);
    CHECK(tr.hfp > 0.0);
    CHECK(tr.states.back() == doctest::Approx(tr.hfp).epsilon(1e-6));
  }
  SUBCASE("below the transition the trace stays away from zero") {
    MinimaxCurvePoint f = mse_firm(0.15);
    REQUIRE(std::isfinite(f.mu_star));
    SEConfig c = make_se_config(f.M - 0.03, f.tau_star, {0.15, f.mu_star, true});
    SETrace tr = iterate(c, 3000, 1e-12);
    CHECK_FALSE(tr.converged);
    CHECK(tr.states.back() > 1e-3 * c.m0);
  }
  SUBCASE("trace csv") {
    std::ostringstream os;
    write_se_trace_csv(os, down);
    CHECK(os.str().rfind("t,m\n0,1\n1,0.5\n", 0) == 0);
  }
}

TEST_CASE("highest fixed point") {
  CHECK(hfp([](double m) { return std::sqrt(m); }, 4.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hfp([](double m) { return m / 2; }, 4.0) == 0.0);
  HfpResult edge = hfp_detail([](double m) { return 2 * m; }, 4.0);
  CHECK(edge.at_boundary);
  CHECK_THROWS_AS(hfp([](double m) { return m; }, 0.0), std::invalid_argument);

  SUBCASE("soft above its minimax MSE has no positive fixed point") {
    MinimaxCurvePoint s = mse_soft(0.05);
    for (double mu : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      SEConfig c = make_se_config(0.25, s.tau_star, {0.05, mu, true});
      CHECK(hfp(c, 10.0 * c.m0) == 0.0);
    }
  }
}

TEST_CASE("state evolution phase transition") {
  for (double eps : {0.05, 0.15}) {
    double d = delta_se(eps, Kind::soft, 1e-4);
    CHECK(std::abs(d - mse_soft(eps).M) <= 2e-4);
  }
  CHECK(std::abs(delta_se(0.1, Kind::block_soft, 1e-4, 4) - mse_block_soft(0.1, 4).M) <= 2e-4);
  double prev = 0.0;
  for (double eps : {0.02, 0.1, 0.2, 0.3}) {
    double d = delta_se(eps, Kind::soft, 1e-4);
    CHECK(d > prev);
    prev = d;
  }
  CHECK_THROWS_AS(delta_se(0.1, ShrinkParams::soft(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("starshaped certificate") {
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(std::pow(10.0, -6.0 + 8.0 * i / 199));
  for (double tau : {0.5, 1.5})
    for (double mu : {0.3, 2.0, 8.0})
      CHECK(check_starshaped(make_se_config(0.3, ShrinkParams::soft(tau), {0.1, mu, true}), grid).pass);
  CHECK(check_starshaped(make_se_config(0.3, ShrinkParams::james_stein(6), {0.1, 4.0, true}), grid).pass);

  SEConfig bad;
  bad.delta = 0.5;
  bad.mu = 1.0;
  bad.risk = [](double nu) { return 1.0 + std::sin(3.0 * nu); };
  StarshapedReport rep = check_starshaped(bad, grid);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.violations.empty());
  CHECK_THROWS_AS(check_starshaped(bad, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("superquadratic certificate") {
  for (double eps : {0.05, 0.15}) {
    MinimaxCurvePoint f = mse_firm(eps);
    REQUIRE(std::isfinite(f.mu_star));
    SuperquadraticReport rep = check_superquadratic(f.tau_star, eps, f.mu_star);
    CHECK(rep.pass);
    CHECK(rep.n_grid == 200);
  }
  SuperquadraticReport quad = check_superquadratic([](double mu) { return 0.7 * mu * mu; }, 2.0, 200);
  CHECK(quad.pass);
  CHECK(std::abs(quad.min_margin) < 1e-12);
  SuperquadraticReport fails = check_superquadratic([](double mu) { return mu * mu * mu; }, 2.0, 200);
  CHECK_FALSE(fails.pass);
  CHECK_THROWS_AS(check_superquadratic([](double) { return 1.0; }, kInf), std::invalid_argument);
}
