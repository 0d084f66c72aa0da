#include "ampcs/normal.hpp"
#include "ampcs/risk.hpp"
#include "ampcs/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace ampcs;
using boost::math::quadrature::gauss_kronrod;

namespace {

double phi_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double eta1(const ShrinkParams& p, double y) {
  Vec v(1);
  v[0] = y;
  return apply(v, p)[0];
}

// E (eta(mu + Z) - mu)^2 by adaptive Gauss-Kronrod between the kinks.
double quad_risk(const ShrinkParams& p, double mu, std::vector<double> kinks) {
  std::vector<double> cuts{-14.0, 14.0};
  for (double k : kinks)
    for (double s : {-1.0, 1.0})
      if (std::abs(s * k - mu) < 14.0) cuts.push_back(s * k - mu);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto f = [&](double z) {
      double e = eta1(p, mu + z) - mu;
      return e * e * phi_pdf(z);
    };
    total += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-13);
  }
  return total;
}

struct Stat {
  double mean = 0.0, se = 0.0;
};

template <class F>
Stat monte_carlo(long n, F&& draw) {
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double x = draw();
    s += x;
    s2 += x * x;
  }
  Stat st;
  st.mean = s / n;
  st.se = std::sqrt(std::max(0.0, s2 / n - st.mean * st.mean) / (n - 1));
  return st;
}

Vec noise(Rng& rng, int n) {
  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  return z;
}

}  // namespace

TEST_CASE("scalar risk: closed forms and trivial cases") {
  for (double mu : {0.0, 0.7, 3.0, 20.0}) CHECK(risk_scalar(ShrinkParams::soft(0.0), mu) == doctest::Approx(1.0));
  CHECK(risk_scalar(ShrinkParams::hard(1e3), 0.0) < 1e-12);
  for (double tau : {0.0, 0.5, 1.3, 2.5}) {
    double closed = 2.0 * (1.0 + tau * tau) * normal_cdf(-tau) - 2.0 * tau * phi(tau);
    CHECK(risk_scalar(ShrinkParams::soft(tau), 0.0) == doctest::Approx(closed).epsilon(1e-12));
  }
  CHECK(risk_scalar(ShrinkParams::soft(1.2), kInf) == doctest::Approx(1.0 + 1.44));
}

TEST_CASE("scalar risk agrees with adaptive quadrature") {
  struct Case {
    ShrinkParams p;
    std::vector<double> kinks;
  };
  std::vector<Case> cases = {
      {ShrinkParams::soft(1.1), {1.1}},           {ShrinkParams::softpos(0.8), {0.8}},
      {ShrinkParams::cap(), {0.0, 1.0}},          {ShrinkParams::hard(1.7), {1.7}},
      {ShrinkParams::firm(0.9, 2.4), {0.9, 2.4}},
  };
  for (const auto& c : cases) {
    CAPTURE(to_string(c.p.kind));
    for (double mu : {0.0, 0.4, 1.0, 2.2, 5.0, 9.0}) {
      CAPTURE(mu);
      CHECK(std::abs(risk_scalar(c.p, mu) - quad_risk(c.p, mu, c.kinks)) <= 1e-8);
    }
  }
}

TEST_CASE("scalar risk agrees with Monte Carlo") {
  ShrinkParams p = ShrinkParams::firm(1.0, 2.5);
  Rng rng(7);
  Stat st = monte_carlo(400000, [&] {
    double e = eta1(p, 1.6 + rng.normal()) - 1.6;
    return e * e;
  });
  CHECK(std::abs(st.mean - risk_scalar(p, 1.6)) <= 3.0 * st.se);
}

TEST_CASE("two-point risk") {
  ShrinkParams p = ShrinkParams::soft(0.9);
  CHECK(risk_two_point(p, {0.0, 3.0, true}) == doctest::Approx(risk_scalar(p, 0.0)));
  CHECK(risk_two_point(p, {1.0, 3.0, true}) == doctest::Approx(risk_scalar(p, 3.0)));
  CHECK(risk_two_point(p, {0.2, kInf, true}) ==
        doctest::Approx(0.8 * risk_scalar(p, 0.0) + 0.2 * (1.0 + 0.81)));
  // Symmetric and one-sided priors agree for odd denoisers.
  CHECK(risk_two_point(p, {0.3, 1.7, true}) == doctest::Approx(risk_two_point(p, {0.3, 1.7, false})));
  ShrinkParams pos = ShrinkParams::softpos(0.5);
  CHECK(risk_two_point(pos, {0.3, 1.7, false}) == doctest::Approx(0.7 * risk_scalar(pos, 0.0) + 0.3 * risk_scalar(pos, 1.7)));
  CHECK_THROWS_AS(risk_two_point(p, {1.5, 1.0, true}), std::invalid_argument);
  CHECK_THROWS_AS(risk_two_point(p, {0.5, -1.0, true}), std::invalid_argument);
}

TEST_CASE("Gaussian piece moments") {
  // Whole line: mass 1, first moment 0, second moment 1.
  GaussianMoments m = gaussian_piece_moments(0.7, -kInf, kInf);
  CHECK(m.mass == doctest::Approx(1.0));
  CHECK(std::abs(m.first) < 1e-15);
  CHECK(m.second == doctest::Approx(1.0));
  GaussianMoments h = gaussian_piece_moments(0.0, 0.0, kInf);
  CHECK(h.mass == doctest::Approx(0.5));
  CHECK(h.first == doctest::Approx(phi(0.0)));
  CHECK(h.second == doctest::Approx(0.5));
}

TEST_CASE("block soft SURE risk") {
  CHECK(risk_block_soft_sure(3.0, 0.0, 5) == doctest::Approx(5.0));
  CHECK(risk_block_soft_sure(1e4, 1.5, 5) == doctest::Approx(5.0 + 2.25).epsilon(1e-3));
  CHECK(risk_block_soft_sure(0.8, 1.3, 1) == doctest::Approx(risk_scalar(ShrinkParams::soft(1.3), 0.8)).epsilon(1e-9));

  SUBCASE("Monte Carlo with a million draws") {
    const int B = 5;
    const double mu = 2.0, tau = 3.0;
    Rng rng(11);
    Vec x = Vec::Zero(B);
    x[0] = mu;
    Stat st = monte_carlo(1000000, [&] {
      Vec y = x + noise(rng, B);
      return (apply_block_soft(y, tau, B) - x).squaredNorm();
    });
    CHECK(std::abs(st.mean - risk_block_soft_sure(mu, tau, B)) <= 3.0 * st.se);
  }
  SUBCASE("truncation is reported") {
    MixtureExpectation d = risk_block_soft_sure_detail(4.0, 1.0, 6);
    CHECK(d.components > 0);
    CHECK(d.truncated_weight < 1e-10);
  }
  SUBCASE("monotone in mu, derivative and oracle bounds") {
    for (int B : {1, 3, 8, 30}) {
      for (double tau : {0.5, 1.0, 2.0, 4.0}) {
        CAPTURE(B);
        CAPTURE(tau);
        double r0 = risk_block_soft_sure(0.0, tau, B);
        double prev = r0;
        for (int i = 1; i <= 60; ++i) {
          double mu = 0.2 * i;
          double r = risk_block_soft_sure(mu, tau, B);
          CHECK(r >= prev - 1e-9);
          // d R / d(mu^2) <= 1
          double mu_prev = 0.2 * (i - 1);
          CHECK(r - prev <= (mu * mu - mu_prev * mu_prev) + 1e-9);
          CHECK(r <= std::min(r0 + mu * mu, B + tau * tau) + 1e-9);
          prev = r;
        }
      }
    }
  }
}

TEST_CASE("James-Stein SURE risk") {
  SUBCASE("Monte Carlo") {
    const int B = 10;
    const double mu = 3.0;
    Rng rng(12);
    Vec x = Vec::Zero(B);
    x[0] = mu;
    Stat st = monte_carlo(400000, [&] {
      Vec y = x + noise(rng, B);
      return (apply_james_stein(y, B) - x).squaredNorm();
    });
    CHECK(std::abs(st.mean - risk_js_sure(mu, B)) <= 3.0 * st.se);
  }
  SUBCASE("risk at zero") {
    Rng rng(13);
    Stat st = monte_carlo(400000, [&] { return apply_james_stein(noise(rng, 5), 5).squaredNorm(); });
    CHECK(std::abs(st.mean - risk_js_zero(5)) <= 3.0 * st.se);
    CHECK(std::abs(risk_js_zero(50) - (1.0 + 0.752 / std::sqrt(48.0))) <= 0.01);
    CHECK(std::abs(risk_js_zero(5000) - 1.0) <= 0.02);
    CHECK(risk_js_sure(0.0, 7) == doctest::Approx(risk_js_zero(7)).epsilon(1e-8));
    CHECK_THROWS_AS(risk_js_zero(2), std::invalid_argument);
  }
  SUBCASE("monotone in mu and bounded by B") {
    for (int B : {3, 5, 20}) {
      double prev = risk_js_sure(0.0, B);
      for (int i = 1; i <= 80; ++i) {
        double r = risk_js_sure(0.25 * i, B);
        CHECK(r >= prev - 1e-9);
        CHECK(r <= B + 1e-9);
        prev = r;
      }
      CHECK(risk_js_sure(1e4, B) == doctest::Approx(B).epsilon(1e-3));
    }
  }
}

TEST_CASE("scalar risk is nondecreasing in mu for soft and softpos") {
  for (double tau : {0.3, 1.0, 2.5}) {
    for (const auto& p : {ShrinkParams::soft(tau), ShrinkParams::softpos(tau)}) {
      double prev = risk_scalar(p, 0.0);
      for (int i = 1; i <= 200; ++i) {
        double r = risk_scalar(p, 0.05 * i);
        CHECK(r >= prev - 1e-12);
        prev = r;
      }
    }
  }
}

TEST_CASE("monotone regression risk at zero") {
  McEstimate r1 = risk_mono_zero(1, 1000, 5);
  CHECK(r1.estimate == 1.0);
  CHECK(r1.std_error == 0.0);

  SUBCASE("length two against a 2-D quadrature oracle") {
    // E ||P(Z)||^2 over R^2: identity when z1 <= z2, both coordinates at the mean otherwise.
    auto inner = [](double z1) {
      auto f = [z1](double z2) {
        double sq = z1 <= z2 ? z1 * z1 + z2 * z2 : 0.5 * (z1 + z2) * (z1 + z2);
        return sq * phi_pdf(z2);
      };
      return gauss_kronrod<double, 61>::integrate(f, -12.0, z1, 15, 1e-12) +
             gauss_kronrod<double, 61>::integrate(f, z1, 12.0, 15, 1e-12);
    };
    double oracle = gauss_kronrod<double, 61>::integrate([&](double z1) { return inner(z1) * phi_pdf(z1); }, -12.0,
                                                         12.0, 15, 1e-12);
    CHECK(oracle == doctest::Approx(1.5).epsilon(1e-8));
    McEstimate r2 = risk_mono_zero(2, 200000, 6);
    CHECK(std::abs(r2.estimate - oracle) <= 3.0 * r2.std_error);
  }
  SUBCASE("reproducible and bounded") {
    McEstimate a = risk_mono_zero(37, 5000, 9), b = risk_mono_zero(37, 5000, 9);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    for (int n : {10, 100}) {
      McEstimate r = risk_mono_zero(n, 20000, 10);
      CHECK(r.estimate <= 20.0 * std::log(n) * std::log(n));
      CHECK(r.estimate <= 2.0 * n * (std::log(n) + 1.0));
    }
  }
}

TEST_CASE("risk at infinity for monotone regression") {
  MonoRiskCache cache(100000, 14);
  CHECK(risk_at_infinity_mono({1, 1, 1, 1}, cache) == 4.0);
  CHECK(risk_at_infinity_mono({50}, cache) == cache.get(50).estimate);

  SUBCASE("lengths (2,3) against direct simulation at a huge jump") {
    double predicted = risk_at_infinity_mono({2, 3}, cache);
    double se = std::hypot(cache.get(2).std_error, cache.get(3).std_error);
    Vec x(5);
    x << 0, 0, 1000, 1000, 1000;
    Rng rng(15);
    Stat st = monte_carlo(100000, [&] { return (apply_monotone(x + noise(rng, 5)) - x).squaredNorm(); });
    CHECK(std::abs(st.mean - predicted) <= 3.0 * std::hypot(st.se, se));
  }
}

TEST_CASE("boundary-typed TV risk at zero") {
  CHECK(risk_tv_zero(12, Boundary::pp, 0.0, 2000, 3).estimate == doctest::Approx(12.0).epsilon(0.05));
  CHECK(risk_tv_zero(1, Boundary::pm, 0.0, 10, 3).estimate == doctest::Approx(1.0).epsilon(0.5));
  double big = risk_tv_zero(16, Boundary::pm, 50.0, 2000, 4).estimate;
  double small = risk_tv_zero(16, Boundary::pm, 2.0, 2000, 4).estimate;
  CHECK(big < small);
  // For s = +- the penalty tau (TV(x) + x_1 - x_N) vanishes exactly on nondecreasing x,
  // so the large-tau limit is the monotone projection.
  McEstimate mono = risk_mono_zero(16, 2000, 4);
  CHECK(std::abs(big - mono.estimate) <= 0.05);
  for (int len : {2, 8, 32}) {
    for (double tau : {0.5, 1.0, 2.0}) {
      McEstimate pp = risk_tv_zero(len, Boundary::pp, tau, 4000, 5);
      McEstimate pm = risk_tv_zero(len, Boundary::pm, tau, 4000, 5);
      CHECK(pp.estimate >= pm.estimate - 3.0 * std::hypot(pp.std_error, pm.std_error));
    }
  }
  SUBCASE("grid version matches single calls") {
    std::vector<double> taus{0.5, 1.5};
    auto grid = risk_tv_zero_grid(9, Boundary::pp, taus, 500, 8);
    for (std::size_t k = 0; k < taus.size(); ++k)
      CHECK(grid[k].estimate == doctest::Approx(risk_tv_zero(9, Boundary::pp, taus[k], 500, 8).estimate));
  }
}

TEST_CASE("risk table CSV round trip") {
  std::vector<RiskRow> rows(2);
  rows[0].kind = "monotone";
  rows[0].mu_or_len = 8;
  rows[0].estimate = 2.718281828459045;
  rows[0].std_error = 0.01;
  rows[0].n_mc = 100;
  rows[0].seed = 42;
  rows[1].kind = "tv";
  rows[1].boundary = "pm";
  rows[1].tau = 0.3;
  rows[1].estimate = 1.0 / 3.0;
  std::stringstream ss;
  write_risk_csv(ss, rows);
  CHECK(ss.str().rfind("kind,B,tau,mu_or_len,boundary,estimate,std_error,n_mc,seed\n", 0) == 0);
  auto back = read_risk_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].estimate == rows[0].estimate);
  CHECK(back[0].seed == 42);
  CHECK(back[1].boundary == "pm");
  CHECK(back[1].estimate == rows[1].estimate);
}
