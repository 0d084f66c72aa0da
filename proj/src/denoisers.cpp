#include "ampcs/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ampcs {

namespace {

struct KindName {
  Kind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {Kind::soft, "soft"},
    {Kind::softpos, "softpos"},
    {Kind::cap, "cap"},
    {Kind::hard, "hard"},
    {Kind::firm, "firm"},
    {Kind::minimax_scalar, "minimax"},
    {Kind::block_soft, "block_soft"},
    {Kind::james_stein, "james_stein"},
    {Kind::monotone, "monotone"},
    {Kind::tv, "tv"},
};

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

void check_blocks(const Vec& y, int B) {
  if (B < 1) throw std::invalid_argument("block size must be >= 1");
  if (y.size() % B != 0)
    throw std::invalid_argument("length " + std::to_string(y.size()) +
                                " is not divisible by block size " + std::to_string(B));
}

}  // namespace

std::string to_string(Kind k) {
  for (const auto& kn : kKindNames)
    if (kn.kind == k) return kn.name;
  return "unknown";
}

Kind parse_kind(const std::string& name) {
  for (const auto& kn : kKindNames)
    if (name == kn.name) return kn.kind;
  if (name == "minimax_scalar") return Kind::minimax_scalar;
  std::string msg = "unknown denoiser '" + name + "'; valid names:";
  for (const auto& kn : kKindNames) msg += std::string(" ") + kn.name;
  throw std::invalid_argument(msg);
}

bool is_scalar(Kind k) {
  switch (k) {
    case Kind::soft:
    case Kind::softpos:
    case Kind::cap:
    case Kind::hard:
    case Kind::firm:
    case Kind::minimax_scalar:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------- ScoreTable

void ScoreTable::validate() const {
  if (grid.empty()) throw std::invalid_argument("score table is empty");
  if (grid.size() != score.size())
    throw std::invalid_argument("score table grid/score size mismatch");
  const std::size_t n = grid.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("score table grid not strictly increasing");
    double d_eta = (grid[i] - score[i]) - (grid[i - 1] - score[i - 1]);
    if (d_eta < -1e-9) throw std::invalid_argument("score table gives a decreasing denoiser");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (std::abs(grid[i] + grid[j]) > 1e-9 || std::abs(score[i] + score[j]) > 1e-9)
      throw std::invalid_argument("score table is not odd-symmetric");
  }
}

double ScoreTable::eta(double y) const {
  if (grid.empty()) throw std::invalid_argument("score table is empty");
  if (y < grid.front() || y > grid.back()) return y - sgn(y) * tail_shift;
  auto it = std::upper_bound(grid.begin(), grid.end(), y);
  if (it == grid.end()) return y - score.back();
  std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  double w = (y - grid[i]) / (grid[i + 1] - grid[i]);
  return y - ((1.0 - w) * score[i] + w * score[i + 1]);
}

double ScoreTable::eta_slope(double y) const {
  if (grid.empty()) throw std::invalid_argument("score table is empty");
  if (y < grid.front() || y >= grid.back()) return 1.0;
  auto it = std::upper_bound(grid.begin(), grid.end(), y);
  std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return 1.0 - (score[i + 1] - score[i]) / (grid[i + 1] - grid[i]);
}

void ScoreTable::write_csv(std::ostream& os) const {
  os << "# epsilon=" << std::setprecision(17) << epsilon << " tail_shift=" << tail_shift << "\n";
  os << "y,psi\n";
  for (std::size_t i = 0; i < grid.size(); ++i) os << grid[i] << "," << score[i] << "\n";
}

ScoreTable ScoreTable::read_csv(std::istream& is) {
  ScoreTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        double v = std::stod(tok.substr(eq + 1));
        if (tok.substr(0, eq) == "epsilon") t.epsilon = v;
        if (tok.substr(0, eq) == "tail_shift") t.tail_shift = v;
      }
      continue;
    }
    if (line.rfind("y,", 0) == 0) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed score table row: " + line);
    t.grid.push_back(std::stod(line.substr(0, comma)));
    t.score.push_back(std::stod(line.substr(comma + 1)));
  }
  t.validate();
  return t;
}

// -------------------------------------------------------------- ShrinkParams

ShrinkParams ShrinkParams::soft(double tau) { return {Kind::soft, tau, 0.0, 1, nullptr}; }
ShrinkParams ShrinkParams::softpos(double tau) { return {Kind::softpos, tau, 0.0, 1, nullptr}; }
ShrinkParams ShrinkParams::cap() { return {Kind::cap, 0.0, 0.0, 1, nullptr}; }
ShrinkParams ShrinkParams::hard(double tau) { return {Kind::hard, tau, 0.0, 1, nullptr}; }
ShrinkParams ShrinkParams::firm(double t1, double t2) { return {Kind::firm, t1, t2, 1, nullptr}; }
ShrinkParams ShrinkParams::minimax(std::shared_ptr<const ScoreTable> table) {
  return {Kind::minimax_scalar, 0.0, 0.0, 1, std::move(table)};
}
ShrinkParams ShrinkParams::block_soft(double tau, int B) { return {Kind::block_soft, tau, 0.0, B, nullptr}; }
ShrinkParams ShrinkParams::james_stein(int B) { return {Kind::james_stein, 0.0, 0.0, B, nullptr}; }
ShrinkParams ShrinkParams::monotone() { return {Kind::monotone, 0.0, 0.0, 1, nullptr}; }
ShrinkParams ShrinkParams::tv(double tau) { return {Kind::tv, tau, 0.0, 1, nullptr}; }

void ShrinkParams::validate() const {
  if (!(tau1 >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  switch (kind) {
    case Kind::firm:
      if (!(tau1 < tau2)) throw std::invalid_argument("firm requires tau1 < tau2");
      break;
    case Kind::minimax_scalar:
      if (!score_table) throw std::invalid_argument("minimax denoiser needs a score table");
      if (score_table->grid.empty()) throw std::invalid_argument("score table is empty");
      break;
    case Kind::block_soft:
      if (block_size < 1) throw std::invalid_argument("block size must be >= 1");
      break;
    case Kind::james_stein:
      if (block_size <= 2) throw std::invalid_argument("James-Stein requires B > 2");
      break;
    default:
      break;
  }
}

// ------------------------------------------------------------------ operators

Vec apply_soft(const Vec& y, double tau) {
  return y.unaryExpr([tau](double v) { return sgn(v) * std::max(std::abs(v) - tau, 0.0); });
}

Vec apply_softpos(const Vec& y, double tau) {
  return y.unaryExpr([tau](double v) { return std::max(v - tau, 0.0); });
}

Vec apply_cap(const Vec& y) {
  return y.unaryExpr([](double v) { return std::min(1.0, std::max(v, 0.0)); });
}

Vec apply_hard(const Vec& y, double tau) {
  return y.unaryExpr([tau](double v) { return std::abs(v) > tau ? v : 0.0; });
}

Vec apply_firm(const Vec& y, double tau1, double tau2) {
  if (!(tau1 >= 0.0 && tau1 < tau2)) throw std::invalid_argument("firm requires 0 <= tau1 < tau2");
  return y.unaryExpr([tau1, tau2](double v) {
    double a = std::abs(v);
    if (a <= tau1) return 0.0;
    if (a >= tau2) return v;
    if (std::isinf(tau2)) return sgn(v) * (a - tau1);
    return sgn(v) * (a - tau1) * tau2 / (tau2 - tau1);
  });
}

Vec apply_minimax_scalar(const Vec& y, const ScoreTable& table) {
  if (table.grid.empty()) throw std::invalid_argument("score table is empty");
  return y.unaryExpr([&table](double v) { return table.eta(v); });
}

Vec apply_block_soft(const Vec& y, double tau, int B) {
  check_blocks(y, B);
  Vec out(y.size());
  for (Eigen::Index s = 0; s < y.size(); s += B) {
    double norm = y.segment(s, B).norm();
    double f = norm > tau ? 1.0 - tau / norm : 0.0;
    out.segment(s, B) = f * y.segment(s, B);
  }
  return out;
}

namespace {

Vec james_stein_scaled(const Vec& y, int B, double sigma2) {
  if (B <= 2) throw std::invalid_argument("James-Stein requires B > 2");
  check_blocks(y, B);
  Vec out(y.size());
  const double c = (B - 2) * sigma2;
  for (Eigen::Index s = 0; s < y.size(); s += B) {
    double sq = y.segment(s, B).squaredNorm();
    double f = sq > c ? 1.0 - c / sq : 0.0;
    out.segment(s, B) = f * y.segment(s, B);
  }
  return out;
}

}  // namespace

Vec apply_james_stein(const Vec& y, int B) { return james_stein_scaled(y, B, 1.0); }

Vec apply_monotone(const Vec& y) {
  const Eigen::Index n = y.size();
  std::vector<double> sum;
  std::vector<Eigen::Index> count;
  sum.reserve(n);
  count.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sum.push_back(y[i]);
    count.push_back(1);
    while (sum.size() > 1) {
      std::size_t k = sum.size() - 1;
      if (sum[k - 1] * count[k] <= sum[k] * count[k - 1]) break;
      sum[k - 1] += sum[k];
      count[k - 1] += count[k];
      sum.pop_back();
      count.pop_back();
    }
  }
  Vec out(n);
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    double m = sum[k] / static_cast<double>(count[k]);
    for (Eigen::Index j = 0; j < count[k]; ++j) out[pos++] = m;
  }
  return out;
}

Vec apply_tv_boundary(const Vec& y, double tau, int s1, int s2) {
  Vec shifted = y;
  if (y.size() > 0) {
    shifted[0] -= tau * s1;
    shifted[y.size() - 1] -= tau * s2;
  }
  return apply_tv(shifted, tau);
}

double tv_stationarity_residual(const Vec& y, const Vec& x, double tau) {
  const Eigen::Index n = y.size();
  if (n == 0) return 0.0;
  if (tau == 0.0) return (x - y).cwiseAbs().maxCoeff();
  // tau*v_i accumulates x - y; v_0 = v_N = 0 and v_i must be a subgradient of |x_{i+1} - x_i|.
  double tv = 0.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    tv += x[i] - y[i];
    double v = tv / tau;
    double viol;
    if (x[i + 1] > x[i])
      viol = std::abs(v - 1.0);
    else if (x[i + 1] < x[i])
      viol = std::abs(v + 1.0);
    else
      viol = std::max(0.0, std::abs(v) - 1.0);
    worst = std::max(worst, tau * viol);
  }
  tv += x[n - 1] - y[n - 1];
  return std::max(worst, std::abs(tv));
}

Vec apply(const Vec& y, const ShrinkParams& p, double sigma) {
  p.validate();
  switch (p.kind) {
    case Kind::soft:
      return apply_soft(y, p.tau1 * sigma);
    case Kind::softpos:
      return apply_softpos(y, p.tau1 * sigma);
    case Kind::cap:
      return apply_cap(y);
    case Kind::hard:
      return apply_hard(y, p.tau1 * sigma);
    case Kind::firm:
      if (!(sigma > 0.0)) return y;
      return apply_firm(y, p.tau1 * sigma, p.tau2 * sigma);
    case Kind::minimax_scalar:
      if (!(sigma > 0.0)) return y;
      return sigma * apply_minimax_scalar(y / sigma, *p.score_table);
    case Kind::block_soft:
      return apply_block_soft(y, p.tau1 * sigma, p.block_size);
    case Kind::james_stein:
      return james_stein_scaled(y, p.block_size, sigma * sigma);
    case Kind::monotone:
      return apply_monotone(y);
    case Kind::tv:
      return apply_tv(y, p.tau1 * sigma);
  }
  throw std::logic_error("unhandled denoiser kind");
}

int count_segments(const Vec& x) {
  if (x.size() == 0) return 0;
  int k = 1;
  for (Eigen::Index i = 1; i < x.size(); ++i)
    if (x[i] != x[i - 1]) ++k;
  return k;
}

bool divergence_is_heuristic(Kind k) { return k == Kind::hard; }

double divergence(const Vec& y, const ShrinkParams& p, double sigma) {
  p.validate();
  const double t1 = p.tau1 * sigma;
  double d = 0.0;
  switch (p.kind) {
    case Kind::soft:
    case Kind::hard:
      for (double v : y) d += std::abs(v) > t1;
      return d;
    case Kind::softpos:
      for (double v : y) d += v > t1;
      return d;
    case Kind::cap:
      for (double v : y) d += (v > 0.0 && v < 1.0);
      return d;
    case Kind::firm: {
      // Ties at the knots take the slope of the piece to their left.
      const double t2 = p.tau2 * sigma;
      const double ramp = std::isinf(p.tau2) ? 1.0 : p.tau2 / (p.tau2 - p.tau1);
      for (double v : y) {
        double a = std::abs(v);
        if (a > t2)
          d += 1.0;
        else if (a > t1)
          d += ramp;
      }
      return d;
    }
    case Kind::minimax_scalar:
      if (!(sigma > 0.0)) return static_cast<double>(y.size());
      for (double v : y) d += p.score_table->eta_slope(v / sigma);
      return d;
    case Kind::block_soft: {
      check_blocks(y, p.block_size);
      const int B = p.block_size;
      for (Eigen::Index s = 0; s < y.size(); s += B) {
        double norm = y.segment(s, B).norm();
        if (norm > t1) d += B - (B - 1) * t1 / norm;
      }
      return d;
    }
    case Kind::james_stein: {
      check_blocks(y, p.block_size);
      const int B = p.block_size;
      const double s2 = sigma * sigma;
      for (Eigen::Index s = 0; s < y.size(); s += B) {
        double sq = y.segment(s, B).squaredNorm();
        if (sq > (B - 2) * s2) d += B - double(B - 2) * (B - 2) * s2 / sq;
      }
      return d;
    }
    case Kind::monotone:
      return count_segments(apply_monotone(y));
    case Kind::tv:
      return count_segments(apply_tv(y, t1));
  }
  throw std::logic_error("unhandled denoiser kind");
}

// ------------------------------------------------------------ implied penalty

namespace {

// Scalar (or radial) profile of a denoiser on s >= 0.
std::function<double(double)> radial_profile(const ShrinkParams& p) {
  switch (p.kind) {
    case Kind::block_soft: {
      double tau = p.tau1;
      return [tau](double s) { return std::max(s - tau, 0.0); };
    }
    case Kind::james_stein: {
      double c = p.block_size - 2.0;
      return [c](double s) { return s > 0.0 ? std::max(s - c / s, 0.0) : 0.0; };
    }
    case Kind::monotone:
    case Kind::tv:
      throw std::invalid_argument("implied penalty is defined for scalar and radial block denoisers only");
    default: {
      ShrinkParams q = p;
      return [q](double s) {
        Vec v(1);
        v[0] = s;
        return apply(v, q)[0];
      };
    }
  }
}

}  // namespace

PenaltyTable implied_penalty(const ShrinkParams& p, const std::vector<double>& x_grid) {
  p.validate();
  if (p.kind == Kind::hard)
    throw std::domain_error("hard thresholding is not invertible on (0, tau): no implied penalty");
  auto eta = radial_profile(p);

  double xmax = 0.0;
  for (double x : x_grid) xmax = std::max(xmax, std::abs(x));

  // Smallest y >= 0 with eta(y) >= u, by bisection to 1e-10.
  auto inverse = [&](double u) {
    double hi = 1.0;
    while (eta(hi) < u) {
      hi *= 2.0;
      if (hi > 1e12) throw std::domain_error("denoiser does not reach level " + std::to_string(u));
    }
    double lo = 0.0;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
      double mid = 0.5 * (lo + hi);
      (eta(mid) >= u ? hi : lo) = mid;
    }
    double got = eta(hi);
    if (std::abs(got - u) > 1e-6 * std::max(1.0, u))
      throw std::domain_error("denoiser is not invertible near u = " + std::to_string(u) +
                              " (jump from " + std::to_string(eta(lo)) + " to " + std::to_string(got) + ")");
    return hi;
  };

  std::vector<double> nodes{0.0};
  const int fine = 4000;
  for (int i = 1; i <= fine; ++i) nodes.push_back(xmax * i / fine);
  for (double x : x_grid) nodes.push_back(std::abs(x));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<double> delta(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    // At u = 0 use the right limit of the residual.
    double u = nodes[i] > 0.0 ? nodes[i] : 1e-9 * std::max(1.0, xmax);
    double y = inverse(u);
    delta[i] = y - eta(y);
  }
  std::vector<double> J(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i)
    J[i] = J[i - 1] + 0.5 * (delta[i] + delta[i - 1]) * (nodes[i] - nodes[i - 1]);

  PenaltyTable out;
  out.denoiser_kind = p.kind;
  out.x_grid = x_grid;
  for (double x : x_grid) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), std::abs(x));
    out.J.push_back(J[static_cast<std::size_t>(it - nodes.begin())]);
  }
  return out;
}

void PenaltyTable::write_csv(std::ostream& os) const {
  os << "x,J\n" << std::setprecision(12);
  for (std::size_t i = 0; i < x_grid.size(); ++i) os << x_grid[i] << "," << J[i] << "\n";
}

}  // namespace ampcs
