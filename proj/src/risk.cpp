#include "ampcs/risk.hpp"

#include "ampcs/csv.hpp"
#include "ampcs/normal.hpp"
#include "ampcs/rng.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ampcs {

void TwoPointPrior::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
}

// ------------------------------------------------------------ scalar kinds

PiecewiseLinear piecewise_form(const ShrinkParams& p) {
  p.validate();
  PiecewiseLinear f;
  const double t = p.tau1;
  switch (p.kind) {
    case Kind::soft:
      f.knots = {-t, t};
      f.a = {1.0, 0.0, 1.0};
      f.b = {t, 0.0, -t};
      return f;
    case Kind::softpos:
      f.knots = {t};
      f.a = {0.0, 1.0};
      f.b = {0.0, -t};
      return f;
    case Kind::cap:
      f.knots = {0.0, 1.0};
      f.a = {0.0, 1.0, 0.0};
      f.b = {0.0, 0.0, 1.0};
      return f;
    case Kind::hard:
      f.knots = {-t, t};
      f.a = {1.0, 0.0, 1.0};
      f.b = {0.0, 0.0, 0.0};
      return f;
    case Kind::firm: {
      if (std::isinf(p.tau2)) return piecewise_form(ShrinkParams::soft(t));
      const double t2 = p.tau2;
      const double s = t2 / (t2 - t);
      f.knots = {-t2, -t, t, t2};
      f.a = {1.0, s, 0.0, s, 1.0};
      f.b = {0.0, s * t, 0.0, -s * t, 0.0};
      return f;
    }
    case Kind::minimax_scalar: {
      const ScoreTable& tab = *p.score_table;
      f.knots = tab.grid;
      f.a.push_back(1.0);
      f.b.push_back(tab.tail_shift);
      for (std::size_t i = 0; i + 1 < tab.grid.size(); ++i) {
        double s = (tab.score[i + 1] - tab.score[i]) / (tab.grid[i + 1] - tab.grid[i]);
        f.a.push_back(1.0 - s);
        f.b.push_back(s * tab.grid[i] - tab.score[i]);
      }
      f.a.push_back(1.0);
      f.b.push_back(-tab.tail_shift);
      return f;
    }
    default:
      throw std::invalid_argument("piecewise form exists for scalar kinds only, got " + to_string(p.kind));
  }
}

GaussianMoments gaussian_piece_moments(double mu, double l, double h) {
  GaussianMoments m;
  const double lz = l - mu, hz = h - mu;
  if (!(hz > lz)) return m;
  auto xphi = [](double x) { return std::isinf(x) ? 0.0 : x * phi(x); };
  m.mass = normal_mass(lz, hz);
  m.first = phi(lz) - phi(hz);
  m.second = m.mass + xphi(lz) - xphi(hz);
  return m;
}

double risk_scalar(const PiecewiseLinear& f, double mu) {
  if (std::isinf(mu)) {
    double a = mu > 0 ? f.a.back() : f.a.front();
    double b = mu > 0 ? f.b.back() : f.b.front();
    return a == 1.0 ? 1.0 + b * b : kInf;
  }
  double r = 0.0;
  const std::size_t m = f.knots.size();
  for (std::size_t k = 0; k <= m; ++k) {
    double l = k == 0 ? -kInf : f.knots[k - 1];
    double h = k == m ? kInf : f.knots[k];
    if (!(h > l)) continue;
    GaussianMoments g = gaussian_piece_moments(mu, l, h);
    if (g.mass == 0.0 && g.first == 0.0) continue;
    const double a = f.a[k];
    const double c = (a - 1.0) * mu + f.b[k];
    r += a * a * g.second + 2.0 * a * c * g.first + c * c * g.mass;
  }
  return r;
}

double risk_scalar(const ShrinkParams& p, double mu) {
  if (!is_scalar(p.kind)) throw std::invalid_argument("risk_scalar needs a scalar denoiser");
  return risk_scalar(piecewise_form(p), mu);
}

double risk_two_point(const PiecewiseLinear& f, const TwoPointPrior& prior) {
  prior.validate();
  const double eps = prior.epsilon;
  double r0 = eps < 1.0 ? risk_scalar(f, 0.0) : 0.0;
  double rmu = 0.0;
  if (eps > 0.0) {
    rmu = risk_scalar(f, prior.mu);
    if (prior.symmetric) rmu = 0.5 * (rmu + risk_scalar(f, -prior.mu));
  }
  return (1.0 - eps) * r0 + eps * rmu;
}

double risk_two_point(const ShrinkParams& p, const TwoPointPrior& prior) {
  return risk_two_point(piecewise_form(p), prior);
}

// ------------------------------------------------------------ block kinds

namespace {

using boost::math::gamma_p;
using boost::math::gamma_q;

// E[X^{-1/2} ; X >= c] for X ~ chi2_k.
double inv_sqrt_upper(double k, double c) {
  if (k == 1.0) {
    if (c <= 0.0) return kInf;
    return boost::math::expint(1, c / 2.0) / std::sqrt(2.0 * std::numbers::pi);
  }
  double ratio = std::exp(std::lgamma((k - 1.0) / 2.0) - std::lgamma(k / 2.0)) / std::numbers::sqrt2;
  return ratio * (c <= 0.0 ? 1.0 : gamma_q((k - 1.0) / 2.0, c / 2.0));
}

double lower_p(double a, double x) { return x <= 0.0 ? 0.0 : gamma_p(a, x); }
double upper_q(double a, double x) { return x <= 0.0 ? 1.0 : gamma_q(a, x); }

// Sums w_j * g(B + 2j) over Poisson(xi/2) weights, dropping weights below 1e-12.
template <class G>
MixtureExpectation poisson_mixture(double xi, int B, G g) {
  MixtureExpectation out;
  const double lam = xi / 2.0;
  if (lam == 0.0) {
    out.value = g(static_cast<double>(B));
    out.components = 1;
    return out;
  }
  auto weight = [lam](long j) { return std::exp(-lam + j * std::log(lam) - std::lgamma(j + 1.0)); };
  const long mode = static_cast<long>(std::floor(lam));
  double total = 0.0;
  for (long j = mode; j >= 0; --j) {
    double w = weight(j);
    if (w < 1e-12) break;
    out.value += w * g(B + 2.0 * j);
    total += w;
    ++out.components;
  }
  for (long j = mode + 1;; ++j) {
    double w = weight(j);
    if (w < 1e-12) break;
    out.value += w * g(B + 2.0 * j);
    total += w;
    ++out.components;
  }
  out.truncated_weight = std::max(0.0, 1.0 - total);
  return out;
}

// Block norm beyond which the Poisson mixture is replaced by a large-norm expansion.
double large_norm_cutoff(double tau, int B) { return 100.0 + 2.0 * tau + 2.0 * std::sqrt(static_cast<double>(B)); }

}  // namespace

MixtureExpectation risk_block_soft_sure_detail(double mu_norm, double tau, int B) {
  if (B < 1) throw std::invalid_argument("block size must be >= 1");
  if (!(tau >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  if (std::isinf(mu_norm)) return {B + tau * tau, 0, 0.0};
  if (tau == 0.0) return {static_cast<double>(B), 1, 0.0};
  if (mu_norm >= large_norm_cutoff(tau, B)) {
    // S = ||mu + Z|| > tau almost surely; E[1/S] = (1 + (3 - B) / (2 mu^2)) / mu + O(mu^-5).
    double inv_s = (1.0 + (3.0 - B) / (2.0 * mu_norm * mu_norm)) / mu_norm;
    return {B + tau * tau - 2.0 * (B - 1.0) * tau * inv_s, 0, 0.0};
  }
  const double c = tau * tau;
  const double d = B;
  // U(S) = S^2 - d below tau, d + tau^2 - 2 (d-1) tau / S above.
  auto g = [&](double k) {
    double below = k * lower_p(k / 2.0 + 1.0, c / 2.0) - d * lower_p(k / 2.0, c / 2.0);
    double above = (d + c) * upper_q(k / 2.0, c / 2.0);
    if (B > 1) above -= 2.0 * (d - 1.0) * tau * inv_sqrt_upper(k, c);
    return below + above;
  };
  return poisson_mixture(mu_norm * mu_norm, B, g);
}

double risk_block_soft_sure(double mu_norm, double tau, int B) {
  return risk_block_soft_sure_detail(mu_norm, tau, B).value;
}

MixtureExpectation risk_js_sure_detail(double mu_norm, int B) {
  if (B <= 2) throw std::invalid_argument("James-Stein requires B > 2");
  if (std::isinf(mu_norm)) return {static_cast<double>(B), 0, 0.0};
  if (mu_norm >= large_norm_cutoff(std::sqrt(B - 2.0), B)) {
    // E[1/S^2] = (1 + (4 - B) / mu^2) / mu^2 + O(mu^-6).
    double m2 = mu_norm * mu_norm;
    return {B - (B - 2.0) * (B - 2.0) * (1.0 + (4.0 - B) / m2) / m2, 0, 0.0};
  }
  const double d = B;
  const double c = d - 2.0;
  // U(S) = S^2 - d below d - 2, d - (d-2)^2 / S^2 above.
  auto g = [&](double k) {
    double below = k * lower_p(k / 2.0 + 1.0, c / 2.0) - d * lower_p(k / 2.0, c / 2.0);
    double above = d * upper_q(k / 2.0, c / 2.0) - c * c * upper_q(k / 2.0 - 1.0, c / 2.0) / (k - 2.0);
    return below + above;
  };
  return poisson_mixture(mu_norm * mu_norm, B, g);
}

double risk_js_sure(double mu_norm, int B) { return risk_js_sure_detail(mu_norm, B).value; }

double risk_js_zero(int B) {
  if (B <= 2) throw std::invalid_argument("James-Stein requires B > 2");
  const double D = B - 2.0;
  const double h = D / 2.0;
  double ex2 = D * (D + 2.0) * gamma_q(h + 2.0, h);
  double ex1 = D * gamma_q(h + 1.0, h);
  double p = gamma_q(h, h);
  return (ex2 - 2.0 * D * ex1 + D * D * p) / D;
}

// ------------------------------------------------------------ Monte Carlo

namespace {

struct Welford {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double v) {
    ++n;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  double se() const { return n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0; }
};

}  // namespace

McEstimate risk_mono_zero(int len, long n_mc, std::uint64_t seed) {
  if (len < 1) throw std::invalid_argument("length must be >= 1");
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  // A single coordinate is never pooled: r(1) = E Z^2 = 1.
  if (len == 1) return {1.0, 0.0, n_mc, seed};
  Rng rng(seed);
  Welford acc;
  Vec z(len);
  for (long i = 0; i < n_mc; ++i) {
    for (int j = 0; j < len; ++j) z[j] = rng.normal();
    acc.add(apply_monotone(z).squaredNorm());
  }
  return {acc.mean, acc.se(), n_mc, seed};
}

std::string to_string(Boundary s) {
  switch (s) {
    case Boundary::pp:
      return "++";
    case Boundary::pm:
      return "+-";
    case Boundary::none:
      return "none";
  }
  return "none";
}

Boundary parse_boundary(const std::string& s) {
  if (s == "++" || s == "pp") return Boundary::pp;
  if (s == "+-" || s == "pm") return Boundary::pm;
  if (s == "none" || s == "00" || s.empty()) return Boundary::none;
  throw std::invalid_argument("unknown boundary type '" + s + "' (expected ++, +-, none)");
}

namespace {

std::pair<int, int> boundary_signs(Boundary s) {
  switch (s) {
    case Boundary::pp:
      return {1, 1};
    case Boundary::pm:
      return {1, -1};
    default:
      return {0, 0};
  }
}

}  // namespace

std::vector<McEstimate> risk_tv_zero_grid(int len, Boundary s, const std::vector<double>& taus, long n_mc,
                                          std::uint64_t seed) {
  if (len < 1) throw std::invalid_argument("length must be >= 1");
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  for (double t : taus)
    if (!(t >= 0.0)) throw std::invalid_argument("tau must be >= 0");
  auto [s1, s2] = boundary_signs(s);
  Rng rng(seed);
  std::vector<Welford> acc(taus.size());
  Vec z(len);
  for (long i = 0; i < n_mc; ++i) {
    for (int j = 0; j < len; ++j) z[j] = rng.normal();
    for (std::size_t k = 0; k < taus.size(); ++k)
      acc[k].add(apply_tv_boundary(z, taus[k], s1, s2).squaredNorm());
  }
  std::vector<McEstimate> out;
  for (const auto& a : acc) out.push_back({a.mean, a.se(), n_mc, seed});
  return out;
}

McEstimate risk_tv_zero(int len, Boundary s, double tau, long n_mc, std::uint64_t seed) {
  return risk_tv_zero_grid(len, s, {tau}, n_mc, seed).front();
}

// ------------------------------------------------------------ tables

void write_risk_csv(std::ostream& os, const std::vector<RiskRow>& rows) {
  os << "kind,B,tau,mu_or_len,boundary,estimate,std_error,n_mc,seed\n";
  for (const auto& r : rows)
    os << r.kind << "," << r.B << "," << format_double(r.tau) << "," << format_double(r.mu_or_len) << ","
       << r.boundary << "," << format_double(r.estimate) << "," << format_double(r.std_error) << "," << r.n_mc
       << "," << r.seed << "\n";
}

std::vector<RiskRow> read_risk_csv(std::istream& is) {
  std::vector<RiskRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("kind,", 0) == 0) continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 9) throw std::invalid_argument("risk CSV row needs 9 fields: " + line);
    RiskRow r;
    r.kind = f[0];
    r.B = std::stoi(f[1]);
    r.tau = parse_double(f[2]);
    r.mu_or_len = parse_double(f[3]);
    r.boundary = f[4];
    r.estimate = parse_double(f[5]);
    r.std_error = parse_double(f[6]);
    r.n_mc = std::stol(f[7]);
    r.seed = std::stoull(f[8]);
    rows.push_back(r);
  }
  return rows;
}

const McEstimate& MonoRiskCache::get(int len) {
  auto it = table_.find(len);
  if (it != table_.end()) return it->second;
  McEstimate e = risk_mono_zero(len, n_mc_, derive_seed(seed_, static_cast<std::uint64_t>(len)));
  return table_.emplace(len, e).first->second;
}

std::vector<RiskRow> MonoRiskCache::rows() const {
  std::vector<RiskRow> out;
  for (const auto& [len, e] : table_)
    out.push_back({"monotone", 1, 0.0, static_cast<double>(len), "none", e.estimate, e.std_error, e.n_mc, e.seed});
  return out;
}

void MonoRiskCache::load(const std::vector<RiskRow>& rows) {
  for (const auto& r : rows)
    if (r.kind == "monotone")
      table_[static_cast<int>(r.mu_or_len)] = {r.estimate, r.std_error, r.n_mc, r.seed};
}

double risk_at_infinity_mono(const std::vector<int>& interval_lengths, MonoRiskCache& cache) {
  double total = 0.0;
  for (int len : interval_lengths) {
    if (len < 1) throw std::invalid_argument("interval lengths must be >= 1");
    total += cache.get(len).estimate;
  }
  return total;
}

}  // namespace ampcs
