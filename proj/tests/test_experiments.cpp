#include "ampcs/experiments.hpp"
#include "ampcs/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace ampcs;

namespace {

SignalSpec spec_of(SignalClass c, int N, double eps, double amp) {
  SignalSpec s;
  s.cls = c;
  s.N = N;
  s.epsilon = eps;
  s.amplitude = amp;
  return s;
}

std::vector<int> run_lengths(const Vec& x) {
  std::vector<int> out;
  int len = 1;
  for (int i = 1; i < x.size(); ++i) {
    if (x[i] != x[i - 1]) {
      out.push_back(len);
      len = 1;
    } else {
      ++len;
    }
  }
  out.push_back(len);
  return out;
}

// Counts drawn from logit p = alpha + beta (delta - pred) on an 11-point grid.
PTGridResult synthetic_grid(double alpha, double beta, double pred, int trials, std::uint64_t seed) {
  Rng rng(seed);
  PTGridResult r;
  for (double d : default_delta_grid(pred, 0.05, 11)) {
    double p = 1.0 / (1.0 + std::exp(-(alpha + beta * (d - pred))));
    std::binomial_distribution<int> bin(trials, p);
    PTRow row;
    row.delta = d;
    row.n_trials = trials;
    row.n_success = bin(rng.engine());
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST_CASE("signal classes") {
  SUBCASE("simple sparse nonzero fraction") {
    const int N = 20000;
    const double eps = 0.1;
    Vec x = sample_signal(spec_of(SignalClass::simple_sparse, N, eps, 100.0), 3);
    double k = (x.array() != 0.0).count();
    CHECK(std::abs(k - N * eps) <= 4.0 * std::sqrt(N * eps * (1 - eps)));
    CHECK((x.array().abs() == 100.0 || x.array() == 0.0).all());
    CHECK(x == sample_signal(spec_of(SignalClass::simple_sparse, N, eps, 100.0), 3));
  }
  SUBCASE("positive and box") {
    Vec p = sample_signal(spec_of(SignalClass::positive_sparse, 1000, 0.2, 5.0), 1);
    CHECK((p.array() >= 0.0).all());
    Vec b = sample_signal(spec_of(SignalClass::box, 1000, 0.2, 1.0), 1);
    CHECK((b.array() >= 0.0 && b.array() <= 1.0).all());
    double interior = (b.array() > 0.0 && b.array() < 1.0).count();
    CHECK(std::abs(interior - 200.0) <= 4.0 * std::sqrt(1000 * 0.2 * 0.8));
  }
  SUBCASE("block sparse") {
    SignalSpec s = spec_of(SignalClass::block_sparse, 1000, 0.2, 3.0);
    s.B = 10;
    Vec x = sample_signal(s, 2);
    for (int b = 0; b < 100; ++b) {
      double nrm = x.segment(b * 10, 10).norm();
      CHECK((nrm == doctest::Approx(3.0) || nrm == 0.0));
    }
    s.B = 7;
    CHECK_THROWS_AS(sample_signal(s, 2), std::invalid_argument);
  }
  SUBCASE("monotone least favorable") {
    SignalSpec s = spec_of(SignalClass::monotone_lf, 500, 0.2, 10.0);
    IntervalDistribution d;
    d.entries = {{3, Boundary::none, 0.5}, {10, Boundary::none, 0.5}};
    s.intervals = d;
    Vec x = sample_signal(s, 4);
    CHECK(x[0] == 10.0);
    for (int i = 1; i < x.size(); ++i) CHECK((x[i] == x[i - 1] || x[i] - x[i - 1] == doctest::Approx(10.0)));
    std::vector<int> lens = run_lengths(x);
    for (std::size_t k = 0; k + 1 < lens.size(); ++k) CHECK((lens[k] == 3 || lens[k] == 10));
    s.intervals.reset();
    CHECK_THROWS_AS(sample_signal(s, 4), std::invalid_argument);
  }
  SUBCASE("random TV has geometric run lengths") {
    const double eps = 0.1;
    Vec x = sample_signal(spec_of(SignalClass::tv_random, 100000, eps, 1.0), 5);
    std::vector<int> lens = run_lengths(x);
    lens.pop_back();  // truncated by the end of the signal
    const double n = static_cast<double>(lens.size());
    double mean = 0.0, ones = 0.0;
    for (int l : lens) {
      mean += l;
      ones += (l == 1);
    }
    mean /= n;
    // geometric on {1, 2, ...}: mean 1/eps, sd sqrt(1 - eps)/eps, P(1) = eps
    CHECK(std::abs(mean - 1.0 / eps) <= 4.0 * std::sqrt(1.0 - eps) / eps / std::sqrt(n));
    CHECK(std::abs(ones / n - eps) <= 4.0 * std::sqrt(eps * (1 - eps) / n));
  }
  SUBCASE("names round trip") {
    for (SignalClass c : {SignalClass::simple_sparse, SignalClass::box, SignalClass::tv_lf})
      CHECK(parse_signal_class(to_string(c)) == c);
    CHECK_THROWS_AS(parse_signal_class("sparse"), std::invalid_argument);
  }
}

TEST_CASE("delta grid and measurement counts") {
  std::vector<double> g = default_delta_grid(0.3);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == doctest::Approx(0.25));
  CHECK(g.back() == doctest::Approx(0.35));
  CHECK(default_delta_grid(0.98).size() == 8);
  CHECK(measurements_for(0.3, 1000) == 300);
  CHECK(measurements_for(1e-6, 10) == 1);
  CHECK_THROWS_AS(measurements_for(0.0, 10), std::invalid_argument);
}

TEST_CASE("phase transition grid") {
  const double eps = 0.1;
  MinimaxCurvePoint s = mse_soft(eps);
  SignalSpec sig = spec_of(SignalClass::simple_sparse, 500, eps, 10.0);
  PTOptions opt;
  opt.criterion = SuccessCriterion::relative_mse();

  PTGridResult r = run_pt_grid(sig, s.tau_star, {s.M - 0.05, s.M + 0.05}, 20, 77, opt);
  CHECK(r.rows[0].n_success < 10);
  CHECK(r.rows[1].n_success > 10);
  for (const PTRow& row : r.rows) {
    CHECK(row.n_success >= 0);
    CHECK(row.n_success <= row.n_trials);
  }

  SUBCASE("reproducible and thread independent") {
    PTGridResult again = run_pt_grid(sig, s.tau_star, {s.M - 0.05, s.M + 0.05}, 20, 77, opt);
    opt.threads = 2;
    PTGridResult par = run_pt_grid(sig, s.tau_star, {s.M - 0.05, s.M + 0.05}, 20, 77, opt);
    std::ostringstream a, b, c;
    write_grid_csv(a, {r});
    write_grid_csv(b, {again});
    write_grid_csv(c, {par});
    CHECK(a.str() == b.str());
    CHECK(a.str() == c.str());
    CHECK(a.str().rfind("kind,epsilon,N,delta,n_success,n_trials,seed\n", 0) == 0);
  }
  SUBCASE("success fraction is monotone up to binomial noise") {
    SignalSpec small = spec_of(SignalClass::simple_sparse, 300, eps, 10.0);
    const int trials = 20;
    PTGridResult g = run_pt_grid(small, s.tau_star, default_delta_grid(s.M, 0.06, 7), trials, 5, opt);
    Vec p(g.rows.size());
    for (std::size_t i = 0; i < g.rows.size(); ++i) p[i] = static_cast<double>(g.rows[i].n_success) / trials;
    Vec iso = apply_monotone(p);
    CHECK((p - iso).cwiseAbs().maxCoeff() <= 3.0 * std::sqrt(0.25 / trials));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(run_pt_grid(sig, s.tau_star, {0.3}, 0, 1, opt), std::invalid_argument);
    CHECK_THROWS_AS(run_pt_grid(sig, s.tau_star, {}, 5, 1, opt), std::invalid_argument);
  }
}

TEST_CASE("logistic fit") {
  SUBCASE("recovers its generative model") {
    LogisticFit f = fit_logistic(synthetic_grid(0.0, 50.0, 0.3, 200, 1), 0.3);
    CHECK_FALSE(f.separated);
    CHECK(f.ci_lo <= 0.0);
    CHECK(f.ci_hi >= 0.0);
    CHECK(f.ci_lo <= f.offset);
    CHECK(f.offset <= f.ci_hi);
    CHECK(f.beta_hat == doctest::Approx(50.0).epsilon(0.2));
  }
  SUBCASE("interval coverage") {
    // 1000 replications so the coverage estimate has sd ~0.7%.
    const double alpha = 0.4, beta = 50.0, truth = -alpha / beta;
    int covered = 0;
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
      LogisticFit f = fit_logistic(synthetic_grid(alpha, beta, 0.3, 200, 1000 + r), 0.3);
      covered += (f.ci_lo <= truth && truth <= f.ci_hi);
    }
    double cov = static_cast<double>(covered) / reps;
    MESSAGE("offset CI coverage " << cov);
    CHECK(cov >= 0.93);
    CHECK(cov <= 0.97);
  }
  SUBCASE("complete separation") {
    PTGridResult all = synthetic_grid(0.0, 50.0, 0.3, 10, 2);
    for (PTRow& row : all.rows) row.n_success = row.n_trials;
    CHECK(fit_logistic(all, 0.3).separated);
    PTGridResult step = synthetic_grid(0.0, 50.0, 0.3, 10, 2);
    for (PTRow& row : step.rows) row.n_success = row.delta > 0.315 ? row.n_trials : 0;
    LogisticFit f = fit_logistic(step, 0.3);
    CHECK(f.separated);
    CHECK(f.ci_lo == doctest::Approx(0.01));
    CHECK(f.ci_hi == doctest::Approx(0.02));
    CHECK(f.offset == doctest::Approx(0.015));
  }
}

TEST_CASE("finite-N scaling fits") {
  const std::vector<int> Ns = {500, 1000, 2000, 4000};
  auto best = [](const std::vector<ScalingRow>& rows) {
    return std::max_element(rows.begin(), rows.end(),
                            [](const ScalingRow& a, const ScalingRow& b) { return a.r_squared < b.r_squared; })
        ->gamma;
  };
  std::vector<ScalingGroup> off(2), slope(2);
  for (int g = 0; g < 2; ++g) {
    off[g].label = slope[g].label = "g" + std::to_string(g);
    for (int N : Ns) {
      off[g].values[N] = {(0.2 + 0.1 * g) * std::pow(N, -1.0 / 3), 0.0};
      slope[g].values[N] = {(1.5 + g) * std::sqrt(N), 0.0};
    }
  }
  std::vector<ScalingRow> o = fit_offset_scaling(off, default_gammas());
  REQUIRE(o.size() == 5);
  CHECK(best(o) == doctest::Approx(1.0 / 3));
  CHECK(o.front().r_squared == doctest::Approx(1.0));
  CHECK(o.front().coefficients[1] == doctest::Approx(0.3));
  CHECK(o.back().r_squared < o.front().r_squared);
  CHECK(best(fit_slope_scaling(slope, default_gammas())) == doctest::Approx(0.5));

  CHECK_THROWS_AS(fit_offset_scaling({}, default_gammas()), std::invalid_argument);
  ScalingGroup single{"one", {{1000, {0.01, 0.001}}}};
  CHECK_THROWS_AS(fit_offset_scaling({single}, default_gammas()), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope_scaling(off, {}), std::invalid_argument);
}
