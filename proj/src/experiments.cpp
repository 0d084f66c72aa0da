#include "ampcs/experiments.hpp"

#include "ampcs/csv.hpp"
#include "ampcs/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace ampcs {

namespace {

const std::vector<std::pair<SignalClass, std::string>> kClassNames = {
    {SignalClass::simple_sparse, "simple_sparse"}, {SignalClass::positive_sparse, "positive_sparse"},
    {SignalClass::box, "box"},                     {SignalClass::block_sparse, "block_sparse"},
    {SignalClass::monotone_lf, "monotone_lf"},     {SignalClass::tv_random, "tv_random"},
    {SignalClass::tv_lf, "tv_lf"},
};

const IntervalEntry& draw_interval(const IntervalDistribution& d, Rng& rng) {
  double u = rng.uniform(), acc = 0.0;
  for (const auto& e : d.entries) {
    acc += e.weight;
    if (u < acc) return e;
  }
  return d.entries.back();
}

}  // namespace

std::string to_string(SignalClass c) {
  for (const auto& [k, name] : kClassNames)
    if (k == c) return name;
  throw std::invalid_argument("unknown signal class");
}

SignalClass parse_signal_class(const std::string& s) {
  std::string valid;
  for (const auto& [k, name] : kClassNames) {
    if (name == s) return k;
    valid += (valid.empty() ? "" : ", ") + name;
  }
  throw std::invalid_argument("unknown signal class '" + s + "' (valid: " + valid + ")");
}

void SignalSpec::validate() const {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (!(amplitude >= 0.0) || std::isinf(amplitude)) throw std::invalid_argument("amplitude must be finite and >= 0");
  if (cls == SignalClass::block_sparse && (B < 1 || N % B != 0))
    throw std::invalid_argument("block size must divide N");
  if (cls == SignalClass::monotone_lf || cls == SignalClass::tv_lf) {
    if (!intervals) throw std::invalid_argument(to_string(cls) + " needs an interval distribution");
    intervals->validate();
  }
}

Vec sample_signal(const SignalSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int N = spec.N;
  const double mu = spec.amplitude;
  Vec x = Vec::Zero(N);
  auto sign = [&rng] { return rng.uniform() < 0.5 ? -1.0 : 1.0; };
  switch (spec.cls) {
    case SignalClass::simple_sparse:
      for (int i = 0; i < N; ++i)
        if (rng.uniform() < spec.epsilon) x[i] = sign() * mu;
      break;
    case SignalClass::positive_sparse:
      for (int i = 0; i < N; ++i)
        if (rng.uniform() < spec.epsilon) x[i] = mu;
      break;
    case SignalClass::box:
      for (int i = 0; i < N; ++i) {
        if (rng.uniform() < spec.epsilon)
          x[i] = rng.uniform();
        else
          x[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
      }
      break;
    case SignalClass::block_sparse: {
      const double per = mu / std::sqrt(static_cast<double>(spec.B));
      for (int b = 0; b < N / spec.B; ++b)
        if (rng.uniform() < spec.epsilon)
          for (int j = 0; j < spec.B; ++j) x[b * spec.B + j] = sign() * per;
      break;
    }
    case SignalClass::monotone_lf: {
      int i = 0;
      double level = mu;
      while (i < N) {
        int len = draw_interval(*spec.intervals, rng).length;
        for (int j = 0; j < len && i < N; ++j) x[i++] = level;
        level += mu;
      }
      break;
    }
    case SignalClass::tv_random: {
      double level = 0.0;
      for (int i = 0; i < N; ++i) {
        if (i > 0) {
          double u = rng.uniform();
          if (u < spec.epsilon / 2.0)
            level += mu;
          else if (u < spec.epsilon)
            level -= mu;
        }
        x[i] = level;
      }
      break;
    }
    case SignalClass::tv_lf: {
      // dir is the direction of the jump into the current interval; a ++ interval
      // reverses it on the way out, a +- interval keeps it.
      int i = 0;
      double level = 0.0;
      double dir = sign();
      while (i < N) {
        const IntervalEntry& e = draw_interval(*spec.intervals, rng);
        for (int j = 0; j < e.length && i < N; ++j) x[i++] = level;
        if (e.boundary == Boundary::pp) dir = -dir;
        level += dir * mu;
      }
      break;
    }
  }
  return x;
}

int measurements_for(double delta, int N) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  return std::max(1, static_cast<int>(std::lround(delta * N)));
}

std::vector<double> default_delta_grid(double center, double half_width, int points) {
  if (points < 2) throw std::invalid_argument("delta grid needs >= 2 points");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    double d = center - half_width + 2.0 * half_width * i / (points - 1);
    if (d > 0.0 && d <= 1.0) out.push_back(d);
  }
  if (out.empty()) throw std::invalid_argument("delta grid is empty after clipping to (0,1]");
  return out;
}

PTGridResult run_pt_grid(const SignalSpec& signal, const ShrinkParams& params, const std::vector<double>& delta_grid,
                         int n_trials, std::uint64_t seed, const PTOptions& options) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (delta_grid.empty()) throw std::invalid_argument("delta grid is empty");
  signal.validate();
  params.validate();
  PTGridResult res;
  res.kind = to_string(params.kind);
  res.epsilon = signal.epsilon;
  res.N = signal.N;
  res.seed = seed;
  const std::size_t nd = delta_grid.size();
  const std::size_t total = nd * static_cast<std::size_t>(n_trials);
  std::vector<signed char> outcome(total, 0);  // 1 success, 0 failure, -1 numeric failure
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t di = k / static_cast<std::size_t>(n_trials);
      const std::size_t trial = k % static_cast<std::size_t>(n_trials);
      const std::uint64_t ts = derive_seed(seed, di, trial);
      const int n = measurements_for(delta_grid[di], signal.N);
      Vec x0 = sample_signal(signal, derive_seed(ts, 1));
      SensingProblem prob = make_problem(gaussian_matrix(n, signal.N, derive_seed(ts, 2)), x0);
      AmpRun run = amp_run(prob, params, options.T_max, options.criterion, options.onsager);
      outcome[k] = run.numeric_failure ? -1 : (run.success ? 1 : 0);
    }
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t di = 0; di < nd; ++di) {
    PTRow row;
    row.delta = delta_grid[di];
    row.n = measurements_for(delta_grid[di], signal.N);
    row.n_trials = n_trials;
    for (int t = 0; t < n_trials; ++t) {
      signed char o = outcome[di * static_cast<std::size_t>(n_trials) + static_cast<std::size_t>(t)];
      row.n_success += o == 1;
      row.n_numeric_failures += o == -1;
    }
    res.rows.push_back(row);
  }
  return res;
}

void write_grid_csv(std::ostream& os, const std::vector<PTGridResult>& results) {
  os << "kind,epsilon,N,delta,n_success,n_trials,seed\n";
  for (const auto& r : results)
    for (const auto& row : r.rows)
      os << r.kind << ',' << format_double(r.epsilon) << ',' << r.N << ',' << format_double(row.delta) << ','
         << row.n_success << ',' << row.n_trials << ',' << r.seed << '\n';
}

LogisticFit fit_logistic(const PTGridResult& result, double delta_pred) {
  LogisticFit fit;
  fit.delta_pred = delta_pred;
  std::vector<double> xs, ks, ns;
  for (const auto& r : result.rows) {
    if (r.n_trials <= 0) continue;
    xs.push_back(r.delta - delta_pred);
    ks.push_back(r.n_success);
    ns.push_back(r.n_trials);
  }
  if (xs.empty()) throw std::invalid_argument("no trials to fit");
  // Complete separation: every failure sits strictly below every success.
  double max_fail = -std::numeric_limits<double>::infinity(), min_succ = std::numeric_limits<double>::infinity();
  bool mixed_row = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ks[i] < ns[i]) max_fail = std::max(max_fail, xs[i]);
    if (ks[i] > 0) min_succ = std::min(min_succ, xs[i]);
    if (ks[i] > 0 && ks[i] < ns[i]) mixed_row = true;
  }
  if (!mixed_row && max_fail < min_succ) {
    fit.separated = true;
    fit.beta_hat = std::numeric_limits<double>::infinity();
    fit.ci_lo = max_fail;
    fit.ci_hi = min_succ;
    if (std::isfinite(max_fail) && std::isfinite(min_succ))
      fit.offset = 0.5 * (max_fail + min_succ);
    else
      fit.offset = std::isfinite(max_fail) ? max_fail : min_succ;
    fit.alpha_hat = -fit.offset * fit.beta_hat;
    return fit;
  }
  double a = 0.0, b = 0.0;
  Eigen::Matrix2d info;
  for (int it = 1; it <= 100; ++it) {
    Eigen::Vector2d score = Eigen::Vector2d::Zero();
    info.setZero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double eta = a + b * xs[i];
      double p = 1.0 / (1.0 + std::exp(-eta));
      double w = ns[i] * p * (1.0 - p);
      Eigen::Vector2d v(1.0, xs[i]);
      score += (ks[i] - ns[i] * p) * v;
      info += w * v * v.transpose();
    }
    Eigen::Vector2d step = info.ldlt().solve(score);
    a += step[0];
    b += step[1];
    fit.iterations = it;
    if (step.norm() < 1e-12 * (1.0 + std::abs(a) + std::abs(b))) break;
  }
  // Observed information at the optimum.
  info.setZero();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double p = 1.0 / (1.0 + std::exp(-(a + b * xs[i])));
    Eigen::Vector2d v(1.0, xs[i]);
    info += ns[i] * p * (1.0 - p) * v * v.transpose();
  }
  Eigen::Matrix2d cov = info.inverse();
  fit.alpha_hat = a;
  fit.beta_hat = b;
  fit.offset = -a / b;
  Eigen::Vector2d g(-1.0 / b, a / (b * b));
  double se = std::sqrt(std::max(0.0, g.dot(cov * g)));
  fit.ci_lo = fit.offset - 1.959963984540054 * se;
  fit.ci_hi = fit.offset + 1.959963984540054 * se;
  return fit;
}

namespace {

std::vector<ScalingRow> fit_power(const std::vector<ScalingGroup>& groups, const std::vector<double>& gammas,
                                  double sign) {
  if (groups.empty()) throw std::invalid_argument("no scaling groups");
  if (gammas.empty()) throw std::invalid_argument("no exponents");
  for (const auto& g : groups)
    if (g.values.size() < 2) throw std::invalid_argument("group '" + g.label + "' needs at least two values of N");
  std::vector<ScalingRow> out;
  for (double gamma : gammas) {
    ScalingRow row;
    row.gamma = gamma;
    double sse = 0.0, sst = 0.0;
    for (const auto& g : groups) {
      double sxy = 0.0, sxx = 0.0;
      for (const auto& [N, v] : g.values) {
        double w = v.second > 0.0 ? 1.0 / (v.second * v.second) : 1.0;
        double x = std::pow(static_cast<double>(N), sign * gamma);
        sxy += w * x * v.first;
        sxx += w * x * x;
      }
      double c = sxy / sxx;
      row.coefficients.push_back(c);
      for (const auto& [N, v] : g.values) {
        double w = v.second > 0.0 ? 1.0 / (v.second * v.second) : 1.0;
        double r = v.first - c * std::pow(static_cast<double>(N), sign * gamma);
        sse += w * r * r;
        sst += w * v.first * v.first;
      }
    }
    row.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::vector<ScalingRow> fit_offset_scaling(const std::vector<ScalingGroup>& groups, const std::vector<double>& gammas) {
  return fit_power(groups, gammas, -1.0);
}

std::vector<ScalingRow> fit_slope_scaling(const std::vector<ScalingGroup>& groups, const std::vector<double>& gammas) {
  return fit_power(groups, gammas, 1.0);
}

std::vector<double> default_gammas() { return {1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75, 1.0}; }

}  // namespace ampcs
