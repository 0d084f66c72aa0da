#include "ampcs/state_evolution.hpp"

#include "ampcs/csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ampcs {

RiskProfile two_point_profile(const ShrinkParams& p, double epsilon, bool symmetric) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (is_scalar(p.kind)) {
    auto f = std::make_shared<PiecewiseLinear>(piecewise_form(p));
    return [f, epsilon, symmetric](double nu) { return risk_two_point(*f, {epsilon, nu, symmetric}); };
  }
  const double B = p.block_size;
  if (p.kind == Kind::block_soft) {
    const double r0 = risk_block_soft_sure(0.0, p.tau1, p.block_size);
    return [p, epsilon, r0, B](double nu) {
      return ((1.0 - epsilon) * r0 + epsilon * risk_block_soft_sure(nu, p.tau1, p.block_size)) / B;
    };
  }
  if (p.kind == Kind::james_stein) {
    const double r0 = risk_js_zero(p.block_size);
    return [p, epsilon, r0, B](double nu) {
      return ((1.0 - epsilon) * r0 + epsilon * risk_js_sure(nu, p.block_size)) / B;
    };
  }
  throw std::invalid_argument("no two-point risk profile for " + to_string(p.kind));
}

void SEConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (!(m0 >= 0.0)) throw std::invalid_argument("m0 must be >= 0");
  if (!risk) throw std::invalid_argument("state evolution needs a risk profile");
}

SEConfig make_se_config(double delta, const ShrinkParams& p, const TwoPointPrior& prior) {
  prior.validate();
  SEConfig c;
  c.delta = delta;
  c.risk = two_point_profile(p, prior.epsilon, prior.symmetric);
  c.mu = prior.mu;
  // Block kinds: prior.mu is a block norm, so the per-coordinate power is eps mu^2 / B.
  c.m0 = prior.epsilon * prior.mu * prior.mu / p.block_size;
  c.validate();
  return c;
}

SEConfig make_se_config_linear(double delta, double risk_const, double m0) {
  SEConfig c;
  c.delta = delta;
  c.risk = [risk_const](double) { return risk_const; };
  c.mu = kInf;
  c.m0 = m0;
  c.validate();
  return c;
}

double psi(double m, const SEConfig& c) {
  if (m < 0.0) throw std::invalid_argument("state must be >= 0");
  if (m == 0.0) return 0.0;
  const double nu = std::isinf(c.mu) ? kInf : c.mu * std::sqrt(c.delta / m);
  return m / c.delta * c.risk(nu);
}

SETrace iterate(const SEConfig& c, int T, double tol) {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  c.validate();
  SETrace tr;
  tr.states.push_back(c.m0);
  for (int t = 0; t < T && tr.states.back() >= tol; ++t) tr.states.push_back(psi(tr.states.back(), c));
  tr.converged = tr.states.back() < tol;
  if (std::isfinite(c.m0) && c.m0 > 0.0) tr.hfp = hfp(c, 10.0 * c.m0);
  return tr;
}

void write_se_trace_csv(std::ostream& os, const SETrace& trace) {
  os << "t,m\n";
  for (std::size_t t = 0; t < trace.states.size(); ++t) os << t << ',' << format_double(trace.states[t]) << '\n';
}

HfpResult hfp_detail(const std::function<double(double)>& map, double m_max) {
  if (!(m_max > 0.0)) throw std::invalid_argument("m_max must be > 0");
  constexpr int kNodes = 400;
  const double lo = std::log(1e-12 * m_max), hi = std::log(m_max);
  auto g = [&](double m) { return map(m) - m; };
  HfpResult out;
  if (g(m_max) >= 0.0) {
    out.value = m_max;
    out.at_boundary = true;
    return out;
  }
  double right = m_max;
  for (int i = kNodes - 2; i >= 0; --i) {
    double m = std::exp(lo + (hi - lo) * i / (kNodes - 1));
    if (g(m) >= 0.0) {
      double a = m, b = right;
      while (b - a > 1e-10 * b) {
        double mid = 0.5 * (a + b);
        (g(mid) >= 0.0 ? a : b) = mid;
      }
      out.value = a;
      return out;
    }
    right = m;
  }
  return out;
}

double hfp(const std::function<double(double)>& map, double m_max) { return hfp_detail(map, m_max).value; }

double hfp(const SEConfig& c, double m_max) {
  return hfp([&c](double m) { return psi(m, c); }, m_max);
}

namespace {

// HFP* > 0: some amplitude on the grid (or the rescaled limit) leaves a positive fixed point.
bool hfp_star_positive(double epsilon, const RiskProfile& risk, double delta) {
  if (risk(kInf) >= delta) return true;
  constexpr int kMu = 40;
  for (int i = 0; i < kMu; ++i) {
    double mu = 0.1 + (20.0 - 0.1) * i / (kMu - 1);
    SEConfig c;
    c.delta = delta;
    c.risk = risk;
    c.mu = mu;
    c.m0 = epsilon * mu * mu;
    if (hfp(c, 10.0 * c.m0) > 0.0) return true;
  }
  return false;
}

}  // namespace

double delta_se(double epsilon, const ShrinkParams& tuned, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  RiskProfile risk = two_point_profile(tuned, epsilon);
  double lo = 0.0, hi = 1.0;
  if (hfp_star_positive(epsilon, risk, hi)) throw std::runtime_error("delta_se bracket failure: HFP > 0 at delta = 1");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    (hfp_star_positive(epsilon, risk, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double delta_se(double epsilon, Kind kind, double tol, int B) {
  return delta_se(epsilon, minimax_point(kind, epsilon, B).tau_star, tol);
}

StarshapedReport check_starshaped(const SEConfig& c, const std::vector<double>& m_grid, double tol) {
  StarshapedReport rep;
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (!(m_grid[i] > 0.0) || (i > 0 && !(m_grid[i] > m_grid[i - 1])))
      throw std::invalid_argument("m grid must be positive and increasing");
  }
  double prev = kInf;
  for (double m : m_grid) {
    double ratio = psi(m, c) / m;
    if (ratio > prev + tol * std::max(1.0, std::abs(prev))) {
      rep.pass = false;
      rep.violations.push_back(m);
    }
    prev = ratio;
  }
  return rep;
}

SuperquadraticReport check_superquadratic(const RiskProfile& risk, double mu_star, int n_grid, double tol) {
  if (!(mu_star > 0.0) || std::isinf(mu_star)) throw std::invalid_argument("mu_star must be finite and > 0");
  if (n_grid < 1) throw std::invalid_argument("grid needs at least one node");
  SuperquadraticReport rep;
  rep.mu_star = mu_star;
  rep.n_grid = n_grid;
  rep.min_margin = kInf;
  const double r_star = risk(mu_star);
  for (int i = 1; i <= n_grid; ++i) {
    double mu = mu_star * i / (n_grid + 1);
    double margin = risk(mu) - (mu / mu_star) * (mu / mu_star) * r_star;
    if (margin < rep.min_margin) rep.min_margin = margin, rep.worst_mu = mu;
  }
  rep.pass = rep.min_margin >= -tol;
  return rep;
}

SuperquadraticReport check_superquadratic(const ShrinkParams& tuned, double epsilon, double mu_star, int n_grid) {
  return check_superquadratic(two_point_profile(tuned, epsilon), mu_star, n_grid);
}

}  // namespace ampcs
